#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "fmie/models.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result fmie_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = fmie::cli::main(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "fmie_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("cli: geometry build and inspect") {
  const auto r = fmie_cli({"geometry", "build", "complete", "--n", "10"});
  REQUIRE(r.code == 0);
  const auto g = json::parse(r.out);
  CHECK(g["n"] == 10);
  CHECK(g["edges"].size() == 45);
  for (const auto& e : g["edges"]) CHECK(e[2].get<double>() == doctest::Approx(1.0 / 9));

  const auto file = scratch() / "torus.json";
  REQUIRE(fmie_cli({"geometry", "build", "torus", "--m", "4", "--d", "2", "-o", file.string()}).code == 0);
  const auto info = fmie_cli({"geometry", "inspect", file.string()});
  REQUIRE(info.code == 0);
  const auto j = json::parse(info.out);
  CHECK(j["n"] == 16);
  CHECK(j["edges"] == 32);
  CHECK(j["row_sum_min"] == 1.0);
  CHECK(j["row_sum_max"] == 1.0);
  CHECK(j["connected"] == true);

  const auto broken = scratch() / "broken.json";
  write(broken, R"({"n": 4, "label": "split", "edges": [[0, 1, 1.0], [2, 3, 1.0]]})");
  const auto bad = fmie_cli({"geometry", "inspect", broken.string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("not irreducible") != std::string::npos);

  CHECK(fmie_cli({"geometry", "build", "small-world", "--m", "4"}).code == 2);  // no seed
  CHECK(fmie_cli({"geometry", "build", "small-world", "--m", "4", "--seed", "3"}).code == 0);
  CHECK(fmie_cli({"geometry", "build", "pyramid", "--n", "4"}).code == 2);
  CHECK(fmie_cli({"geometry", "build", "complete", "--n", "1"}).code == 2);
  CHECK(fmie_cli({"geometry", "frobnicate"}).code == 2);
  CHECK(fmie_cli({}).code == 2);
  CHECK(fmie_cli({"--help"}).code == 0);
}

TEST_CASE("cli: bottleneck") {
  const auto file = scratch() / "k8.json";
  REQUIRE(fmie_cli({"geometry", "build", "complete", "--n", "8", "-o", file.string()}).code == 0);
  const auto r = fmie_cli({"geometry", "bottleneck", file.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("kappa 1\n") != std::string::npos);
  const auto big = scratch() / "k30.json";
  REQUIRE(fmie_cli({"geometry", "build", "complete", "--n", "30", "-o", big.string()}).code == 0);
  CHECK(fmie_cli({"geometry", "bottleneck", big.string()}).code == 3);
}

TEST_CASE("cli: run") {
  const auto dir = scratch();
  const auto cfg = dir / "voter.json";
  write(cfg, R"({"geometry": {"builder": "complete", "n": 2}, "rule": "voter",
                 "replicas": 3, "seed": 5, "sample_times": [0, 0.5, 1]})");
  const auto a = fmie_cli({"run", cfg.string()});
  const auto b = fmie_cli({"run", cfg.string()});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto s = json::parse(a.out);
  CHECK(s["classification"] == "ordered-absorbing");
  CHECK(s["runs"].size() == 3);
  CHECK(s["runs"][0]["absorbed"] == true);
  CHECK(s["schema"] == 1);
  const auto c = json::parse(fmie_cli({"run", cfg.string(), "--seed", "6"}).out);
  CHECK(c["runs"][0]["absorption_time"] != s["runs"][0]["absorption_time"]);

  const auto gam = dir / "gambler.json";
  write(gam, R"({"geometry": {"builder": "complete", "n": 4}, "rule": "gambler", "seed": 1})");
  CHECK(json::parse(fmie_cli({"run", gam.string()}).out)["classification"] ==
        "disordered-absorbing");

  const auto fash = dir / "fashion.json";
  write(fash, R"({"geometry": {"builder": "complete", "n": 10}, "rule": "fashionista",
                  "params": {"lambda": 2}, "seed": 1,
                  "sample_times": {"start": 0, "stop": 3, "step": 0.5}})");
  const auto traj = dir / "fashion.jsonl";
  const auto f = fmie_cli({"run", fash.string(), "--trajectory", traj.string()});
  REQUIRE(f.code == 0);
  CHECK(json::parse(f.out)["classification"] == "stationary");
  std::istringstream lines(slurp(traj));
  int count = 0;
  for (std::string line; std::getline(lines, line); ++count) CHECK(json::parse(line)["schema"] == 1);
  CHECK(count == 7);

  const auto noseed = dir / "noseed.json";
  write(noseed, R"({"geometry": {"builder": "complete", "n": 3}, "rule": "voter"})");
  CHECK(fmie_cli({"run", noseed.string()}).code == 2);
  const auto forever = dir / "forever.json";
  write(forever, R"({"geometry": {"builder": "complete", "n": 3}, "rule": "token", "seed": 1})");
  CHECK(fmie_cli({"run", forever.string()}).code == 2);
  const auto garbage = dir / "garbage.json";
  write(garbage, "{not json");
  CHECK(fmie_cli({"run", garbage.string()}).code == 2);
  const auto unknown = dir / "unknown.json";
  write(unknown, R"({"geometry": {"builder": "complete", "n": 3}, "rule": "zombie", "seed": 1})");
  CHECK(fmie_cli({"run", unknown.string()}).code == 2);
  CHECK(fmie_cli({"run", (dir / "missing.json").string()}).code == 2);
}

TEST_CASE("cli: suite") {
  const auto dir = scratch();
  const auto report = dir / "avg.json", csv = dir / "avg.csv";
  const auto r = fmie_cli({"suite", "averaging", "--geometry", "complete", "--n", "5", "--seed",
                           "1", "-o", report.string(), "--csv", csv.string()});
  CHECK(r.code == 0);
  const auto j = json::parse(slurp(report));
  CHECK(j["suite"] == "averaging");
  CHECK(j["schema"] == 1);
  for (const auto& c : j["checks"]) {
    if (c["kind"] != "exploratory") CHECK(c["pass"] == true);
  }
  CHECK(slurp(csv).rfind("suite,name,kind,value,target,tolerance,pass\n", 0) == 0);

  CHECK(fmie_cli({"suite", "nonsense", "--seed", "1"}).code == 2);
  CHECK(fmie_cli({"suite", "voter", "--geometry", "complete", "--n", "5"}).code == 2);  // no seed

  // A failing check exits 5 and still writes the report.
  const auto wl = dir / "wlln.json";
  fs::remove(wl);
  const auto w = fmie_cli({"suite", "wlln", "--geometry", "complete", "--n", "20", "--epsilon",
                           "0.3", "--seed", "2", "--replicas", "50", "--max-failing", "0.0",
                           "-o", wl.string()});
  CHECK(w.code == 0);  // wlln checks are exploratory and never gate
  CHECK(fs::exists(wl));
  const auto fail = fmie_cli({"suite", "averaging", "--geometry", "complete", "--n", "3",
                              "--x0", "1,0,0", "--seed", "1", "--replicas", "2", "-o",
                              (dir / "tiny.json").string()});
  CHECK(fail.code == 5);
  CHECK(fs::exists(dir / "tiny.json"));
}

TEST_CASE("cli: golden trajectories") {
  // One small pinned run per rule. Set FMIE_UPDATE_GOLDEN=1 to regenerate.
  const bool update = std::getenv("FMIE_UPDATE_GOLDEN") != nullptr;
  const auto dir = scratch();
  for (const auto& rule : fmie::rule_names()) {
    json cfg = {{"geometry", {{"builder", "cycle"}, {"n", 5}}},
                {"rule", rule},
                {"seed", 2024},
                {"replicas", 2},
                {"horizon", 3.0},
                {"sample_times", {0.0, 0.5, 1.0, 2.0, 3.0}},
                {"params", {{"k", 2}, {"lambda", 1.5}, {"second", 3}}}};
    const auto cfg_path = dir / (rule + ".json");
    write(cfg_path, cfg.dump());
    const auto out = dir / (rule + ".jsonl");
    REQUIRE(fmie_cli({"run", cfg_path.string(), "--trajectory", out.string(), "--summary",
                      (dir / (rule + ".summary.json")).string()})
                .code == 0);
    const fs::path golden = fs::path(FMIE_GOLDEN_DIR) / (rule + ".jsonl");
    if (update) {
      fs::copy_file(out, golden, fs::copy_options::overwrite_existing);
      continue;
    }
    REQUIRE_MESSAGE(fs::exists(golden), golden.string());
    CHECK_MESSAGE(slurp(out) == slurp(golden), rule);
  }
}
