#include <array>
#include <ostream>

#include <json.hpp>

#include "fashionista_drive.hpp"
#include "fmie/chain.hpp"
#include "fmie/error.hpp"
#include "fmie/models.hpp"

namespace fmie {

namespace {

using nlohmann::json;

struct RuleInfo {
  const char* name;
  LongRunBehavior behavior;
};

constexpr std::array<RuleInfo, 11> kRules{{
    {"token", LongRunBehavior::Stationary},
    {"pandemic", LongRunBehavior::OrderedAbsorbing},
    {"averaging", LongRunBehavior::OrderedAbsorbing},
    {"pennies", LongRunBehavior::Stationary},
    {"voter", LongRunBehavior::OrderedAbsorbing},
    {"voter-two", LongRunBehavior::OrderedAbsorbing},
    {"coalescing", LongRunBehavior::OrderedAbsorbing},
    {"gambler", LongRunBehavior::DisorderedAbsorbing},
    {"interchange", LongRunBehavior::Stationary},
    {"deference", LongRunBehavior::OrderedAbsorbing},
    {"fashionista", LongRunBehavior::Stationary},
}};

std::vector<std::uint32_t> block_sizes(std::span<const std::uint32_t> counts) {
  std::vector<std::uint32_t> out;
  for (auto c : counts) {
    if (c > 0) out.push_back(c);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

template <class Rule, class Fill>
TrajectorySummary emit(std::string_view name, Rule& rule, EventStream& stream,
                       std::span<const double> times, std::ostream& out, Fill&& fill) {
  const RunResult r = run(rule, stream, times, [&](double t) {
    json line;
    line["schema"] = kTrajectorySchemaVersion;
    line["t"] = t;
    fill(line);
    out << line.dump() << '\n';
  });
  TrajectorySummary s;
  s.rule = std::string(name);
  s.absorbed = r.absorbed;
  s.absorption_time = r.absorption_time;
  s.events = r.events;
  s.behavior = long_run_behavior(name);
  return s;
}

void check_source(AgentId a, std::size_t n) {
  if (a >= n) throw InvalidArgument("rule parameter: agent out of range");
}

}  // namespace

std::string_view to_string(LongRunBehavior b) {
  switch (b) {
    case LongRunBehavior::OrderedAbsorbing:
      return "ordered-absorbing";
    case LongRunBehavior::DisorderedAbsorbing:
      return "disordered-absorbing";
    case LongRunBehavior::Stationary:
      return "stationary";
  }
  return "stationary";
}

const std::vector<std::string>& rule_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& r : kRules) v.emplace_back(r.name);
    return v;
  }();
  return names;
}

LongRunBehavior long_run_behavior(std::string_view rule) {
  for (const auto& r : kRules) {
    if (rule == r.name) return r.behavior;
  }
  throw InvalidArgument("unknown rule '" + std::string(rule) + "'");
}

TrajectorySummary trajectory(std::string_view rule, const RuleParams& p, const Geometry& g,
                             EventStream& stream, std::span<const double> times,
                             std::ostream& out) {
  const std::size_t n = g.n();
  long_run_behavior(rule);  // validates the name
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0) || (k > 0 && times[k] < times[k - 1])) {
      throw InvalidArgument("sample times must be ascending and >= 0");
    }
  }

  if (rule == "token") {
    check_source(p.source, n);
    TokenProcess r(n, p.source);
    return emit(rule, r, stream, times, out, [&](json& j) { j["holder"] = r.holder(); });
  }
  if (rule == "pandemic") {
    check_source(p.source, n);
    Pandemic r(n, p.source);
    return emit(rule, r, stream, times, out, [&](json& j) {
      j["infected"] = r.infected_count();
      j["fraction"] = static_cast<double>(r.infected_count()) / static_cast<double>(n);
    });
  }
  if (rule == "averaging") {
    std::vector<double> x0 = p.x0;
    if (x0.empty()) {
      check_source(p.source, n);
      x0.assign(n, 0.0);
      x0[p.source] = 1.0;
    }
    const bool probability = is_probability(x0);
    Averaging r(g, std::move(x0));
    return emit(rule, r, stream, times, out, [&](json& j) {
      j["x"] = r.money();
      j["norm"] = l2_norm(r.money());
      j["dirichlet"] = r.dirichlet_exact();
      if (probability) j["entropy"] = entropy(r.money());
    });
  }
  if (rule == "pennies") {
    check_source(p.source, n);
    check_source(p.second, n);
    CoupledPennies r(p.source, p.second);
    return emit(rule, r, stream, times, out, [&](json& j) {
      j["z1"] = r.first();
      j["z2"] = r.second();
    });
  }
  if (rule == "voter") {
    Voter r(n);
    return emit(rule, r, stream, times, out, [&](json& j) {
      const auto blocks = block_sizes(r.counts());
      j["opinions"] = blocks.size();
      j["blocks"] = blocks;
      j["q"] = q_statistic(blocks, n);
    });
  }
  if (rule == "voter-two") {
    if (p.k < 1 || p.k + 1 > n) throw InvalidArgument("voter-two needs 1 <= k <= n-1");
    std::vector<std::uint32_t> opinions(n, 1);
    std::fill(opinions.begin(), opinions.begin() + p.k, 0);
    Voter r(std::move(opinions));
    return emit(rule, r, stream, times, out, [&](json& j) { j["count"] = r.counts()[0]; });
  }
  if (rule == "coalescing") {
    Coalescing r(n);
    return emit(rule, r, stream, times, out, [&](json& j) {
      std::vector<std::uint32_t> sizes;
      for (const auto& c : r.clusters()) {
        if (!c.empty()) sizes.push_back(static_cast<std::uint32_t>(c.size()));
      }
      std::sort(sizes.begin(), sizes.end(), std::greater<>());
      j["clusters"] = sizes.size();
      j["blocks"] = sizes;
    });
  }
  if (rule == "gambler") {
    std::vector<double> x0 = p.x0.empty() ? std::vector<double>(n, 1.0) : p.x0;
    Gambler r(g, std::move(x0));
    return emit(rule, r, stream, times, out, [&](json& j) {
      j["money"] = r.money();
      std::size_t support = 0;
      for (double v : r.money()) support += v > 0.0 ? 1 : 0;
      j["support"] = support;
    });
  }
  if (rule == "interchange") {
    Interchange r(n);
    return emit(rule, r, stream, times, out, [&](json& j) {
      j["token_at"] = r.token_at();
      j["parity"] = r.parity();
    });
  }
  if (rule == "deference") {
    Deference r(n);
    const std::size_t k = std::min<std::size_t>(std::max<std::uint32_t>(p.k, 1), n);
    return emit(rule, r, stream, times, out, [&](json& j) {
      std::vector<double> share(k);
      for (std::size_t l = 0; l < k; ++l) {
        share[l] = static_cast<double>(r.counts()[l]) / static_cast<double>(n);
      }
      j["shares"] = share;
    });
  }
  // fashionista
  Fashionista r(n);
  const std::uint64_t events = detail::drive_fashionista(r, n, p.lambda, stream, times, [&](double t) {
    json line;
    line["schema"] = kTrajectorySchemaVersion;
    line["t"] = t;
    line["diversity"] = r.diversity();
    line["fashions"] = r.live_fashions();
    out << line.dump() << '\n';
  });
  TrajectorySummary s;
  s.rule = "fashionista";
  s.events = events;
  s.behavior = LongRunBehavior::Stationary;
  return s;
}

}  // namespace fmie
