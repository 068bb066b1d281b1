#include "ginv/graph_io.hpp"

#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "ginv/errors.hpp"

namespace ginv {

namespace {

std::int64_t as_int(const nlohmann::json& v, const char* what, std::size_t line) {
  if (!v.is_number_integer()) throw ParseError(std::string(what) + " must be an integer", line);
  return v.get<std::int64_t>();
}

Graph parse_line(const std::string& text, std::size_t line) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line);
  }
  if (!obj.is_object()) throw ParseError("expected a JSON object", line);
  if (!obj.contains("n")) throw ParseError("missing field n", line);
  std::int64_t n = as_int(obj["n"], "n", line);
  if (n <= 0 || n > std::numeric_limits<std::uint32_t>::max()) {
    throw ParseError("n must be a positive 32-bit integer", line);
  }

  std::vector<Edge> edges;
  if (obj.contains("edges")) {
    const auto& e = obj["edges"];
    if (!e.is_array()) throw ParseError("edges must be a list", line);
    edges.reserve(e.size());
    for (const auto& pair : e) {
      if (!pair.is_array() || pair.size() != 2) {
        throw ParseError("each edge must be a [u, v] pair", line);
      }
      std::int64_t u = as_int(pair[0], "edge endpoint", line);
      std::int64_t v = as_int(pair[1], "edge endpoint", line);
      if (u < 0 || v < 0 || u > std::numeric_limits<VertexId>::max() ||
          v > std::numeric_limits<VertexId>::max()) {
        throw InvariantViolation("line " + std::to_string(line) + ": edge endpoint out of range");
      }
      edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
    }
  }

  std::optional<std::vector<AttrId>> attrs;
  if (obj.contains("attrs") && !obj["attrs"].is_null()) {
    const auto& a = obj["attrs"];
    if (!a.is_array()) throw ParseError("attrs must be a list", line);
    attrs.emplace();
    attrs->reserve(a.size());
    for (const auto& x : a) {
      std::int64_t id = as_int(x, "attribute id", line);
      if (id < 0 || id > 255) throw ParseError("attribute ids must lie in [0, 255]", line);
      attrs->push_back(static_cast<AttrId>(id));
    }
  }

  std::optional<int> label;
  if (obj.contains("label") && !obj["label"].is_null()) {
    std::int64_t l = as_int(obj["label"], "label", line);
    if (l < 0 || l > std::numeric_limits<int>::max()) throw ParseError("label out of range", line);
    label = static_cast<int>(l);
  }

  try {
    return Graph(static_cast<std::uint32_t>(n), std::move(edges), std::move(attrs), label);
  } catch (const InvariantViolation& e) {
    throw InvariantViolation("line " + std::to_string(line) + ": " + e.what());
  }
}

}  // namespace

std::vector<Graph> read_graphs(std::istream& in) {
  std::vector<Graph> graphs;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    graphs.push_back(parse_line(text, line));
  }
  return graphs;
}

std::vector<Graph> read_graphs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open graph file " + path.string());
  return read_graphs(in);
}

void write_graphs(std::ostream& out, const std::vector<Graph>& graphs) {
  for (const Graph& g : graphs) {
    nlohmann::ordered_json obj;
    obj["n"] = g.n();
    auto edges = nlohmann::ordered_json::array();
    for (const auto& [u, v] : g.edges()) edges.push_back({u, v});
    obj["edges"] = std::move(edges);
    if (g.attrs()) {
      auto attrs = nlohmann::ordered_json::array();
      for (AttrId a : *g.attrs()) attrs.push_back(static_cast<int>(a));
      obj["attrs"] = std::move(attrs);
    }
    if (g.label()) obj["label"] = *g.label();
    out << obj.dump() << '\n';
  }
}

void write_graphs(const std::filesystem::path& path, const std::vector<Graph>& graphs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write graph file " + path.string());
  write_graphs(out, graphs);
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace ginv
