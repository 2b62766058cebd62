#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fmie/error.hpp"
#include "fmie/geometry.hpp"

namespace fmie {

using nlohmann::json;

std::string to_json(const Geometry& g) {
  json edges = json::array();
  for (const auto& e : g.edges()) edges.push_back(json::array({e.i, e.j, e.rate}));
  json doc = {{"n", g.n()}, {"label", g.label()}, {"edges", std::move(edges)}};
  return doc.dump();
}

Geometry geometry_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw InvalidArgument(std::string("geometry JSON does not parse: ") + err.what());
  }
  try {
    const auto n = doc.at("n").get<std::size_t>();
    std::vector<Edge> edges;
    for (const auto& item : doc.at("edges")) {
      if (!item.is_array() || item.size() != 3) throw InvalidArgument("edge must be [i, j, rate]");
      edges.push_back({item[0].get<AgentId>(), item[1].get<AgentId>(), item[2].get<double>()});
    }
    return Geometry(n, std::move(edges), doc.value("label", std::string("custom")));
  } catch (const json::exception& err) {
    throw InvalidArgument(std::string("malformed geometry JSON: ") + err.what());
  }
}

void save_geometry(const Geometry& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << to_json(g) << '\n';
}

Geometry load_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return geometry_from_json(buf.str());
}

}  // namespace fmie
