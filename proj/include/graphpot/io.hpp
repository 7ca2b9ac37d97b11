#pragma once

// Graph JSON, node-field CSV and dense-matrix CSV/JSON.

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "graphpot/cloaking.hpp"
#include "graphpot/generators.hpp"

namespace graphpot::io {

using json = nlohmann::json;

// Shortest round-trip decimal form.
inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) fail(ErrorKind::InvalidInput, "number formatting failed");
  return std::string(buf, end);
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::InvalidInput, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::InvalidInput, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorKind::InvalidInput, "write failed for " + path);
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, what + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Graphs

inline ProblemGraph graph_from_json(const json& j, double default_fraction = kDefaultBoundaryFraction) {
  try {
    std::vector<NodeId> nodes = j.at("nodes").get<std::vector<NodeId>>();
    const auto& p = j.at("partition");
    PartitionInput part{p.at("B").get<std::vector<NodeId>>(), p.at("omega_plus").get<std::vector<NodeId>>(),
                        p.at("boundary").get<std::vector<NodeId>>(), p.at("omega_minus").get<std::vector<NodeId>>()};
    std::vector<EdgeInput> edges;
    std::vector<std::optional<double>> p_plus;
    for (const auto& e : j.at("edges")) {
      edges.push_back({e.at("i").get<NodeId>(), e.at("j").get<NodeId>(), e.at("sigma").get<double>()});
      p_plus.push_back(e.contains("p_plus") ? std::optional<double>(e.at("p_plus").get<double>()) : std::nullopt);
    }
    auto graph = build_graph(nodes, part, edges);
    auto pou = partition_of_unity_from_edges(graph, classify_edges(graph), p_plus, default_fraction);
    return {std::move(graph), std::move(pou)};
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("malformed graph JSON: ") + e.what());
  }
}

// Canonical form: nodes in region order, edges in stored order, p_plus only
// on ∂Ω-internal edges (elsewhere it is forced).
inline json graph_to_json(const ProblemGraph& problem) {
  const auto& g = problem.graph;
  const auto& lay = g.layout();
  json j;
  j["nodes"] = g.ids();
  json part;
  const std::array<const char*, 4> keys{"B", "omega_plus", "boundary", "omega_minus"};
  for (std::size_t k = 0; k < 4; ++k) {
    auto r = lay.range(static_cast<Region>(k));
    std::vector<NodeId> ids(g.ids().begin() + r.begin, g.ids().begin() + r.end);
    part[keys[k]] = ids;
  }
  j["partition"] = part;
  auto cls = classify_edges(g);
  json edges = json::array();
  for (Index k = 0; k < g.num_edges(); ++k) {
    const auto& e = g.edge(k);
    json je{{"i", g.id(e.a)}, {"j", g.id(e.b)}, {"sigma", e.sigma}};
    if (cls.of_edge[static_cast<std::size_t>(k)] == EdgeClass::boundary) je["p_plus"] = problem.pou.p_plus[k];
    edges.push_back(je);
  }
  j["edges"] = edges;
  return j;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline ProblemGraph load_graph(const std::string& path, double default_fraction = kDefaultBoundaryFraction) {
  return graph_from_json(parse_json(read_text(path), path), default_fraction);
}

inline void save_graph(const std::string& path, const ProblemGraph& problem) {
  write_text(path, dump(graph_to_json(problem)));
}

// ---------------------------------------------------------------------------
// Node fields: `node_id,value` with a header row.

inline std::string field_csv(const PartitionedGraph& graph, const Eigen::VectorXd& values, IndexRange nodes) {
  if (values.size() != nodes.size()) fail(ErrorKind::DimensionMismatch, "field length does not match node range");
  std::string out = "node_id,value\n";
  for (Index k = 0; k < nodes.size(); ++k) {
    out += std::to_string(graph.id(nodes.begin + k)) + "," + format_number(values[k]) + "\n";
  }
  return out;
}

inline std::string field_csv(const PartitionedGraph& graph, const NodeField& u) {
  return field_csv(graph, u, {0, graph.num_nodes()});
}

inline std::map<NodeId, double> parse_field_csv(const std::string& text, const std::string& what = "field CSV") {
  std::map<NodeId, double> values;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("node_id", 0) == 0) continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos) fail(ErrorKind::InvalidInput, what + ": line " + std::to_string(line_no));
    NodeId id = 0;
    double v = 0.0;
    const char* a = line.data();
    auto r1 = std::from_chars(a, a + comma, id);
    auto r2 = std::from_chars(a + comma + 1, a + line.size(), v);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || r1.ptr != a + comma || r2.ptr != a + line.size()) {
      fail(ErrorKind::InvalidInput, what + ": cannot parse line " + std::to_string(line_no));
    }
    if (!values.emplace(id, v).second) fail(ErrorKind::InvalidInput, what + ": node " + std::to_string(id) + " repeated");
  }
  return values;
}

// Values for the nodes of `nodes`, in layout order. Missing entries take
// `missing` if given and are an error otherwise; ids outside the range are
// always an error.
inline Eigen::VectorXd field_on(const PartitionedGraph& graph, const std::map<NodeId, double>& values, IndexRange nodes,
                                std::optional<double> missing = std::nullopt) {
  Eigen::VectorXd out(nodes.size());
  for (Index k = 0; k < nodes.size(); ++k) {
    auto it = values.find(graph.id(nodes.begin + k));
    if (it != values.end()) {
      out[k] = it->second;
    } else if (missing) {
      out[k] = *missing;
    } else {
      fail(ErrorKind::InvalidInput, "no value for node " + std::to_string(graph.id(nodes.begin + k)));
    }
  }
  for (const auto& [id, v] : values) {
    if (!nodes.contains(graph.index_of(id))) {
      fail(ErrorKind::InvalidInput, "value given for node " + std::to_string(id) + " outside the expected set");
    }
  }
  return out;
}

inline Eigen::VectorXd load_field(const PartitionedGraph& graph, const std::string& path, IndexRange nodes,
                                  std::optional<double> missing = std::nullopt) {
  return field_on(graph, parse_field_csv(read_text(path), path), nodes, missing);
}

inline json field_json(const PartitionedGraph& graph, const Eigen::VectorXd& values, IndexRange nodes) {
  json ids = json::array();
  for (Index k = 0; k < nodes.size(); ++k) ids.push_back(graph.id(nodes.begin + k));
  return json{{"node_ids", ids}, {"values", std::vector<double>(values.begin(), values.end())}};
}

// ---------------------------------------------------------------------------
// Dense matrices: header `node_id,<column ids>`, each row led by its id.

inline std::string matrix_csv(const PartitionedGraph& graph, const Eigen::MatrixXd& m, IndexRange rows,
                              IndexRange cols) {
  if (m.rows() != rows.size() || m.cols() != cols.size()) fail(ErrorKind::DimensionMismatch, "matrix shape");
  std::string out = "node_id";
  for (Index c = 0; c < cols.size(); ++c) out += "," + std::to_string(graph.id(cols.begin + c));
  out += "\n";
  for (Index r = 0; r < rows.size(); ++r) {
    out += std::to_string(graph.id(rows.begin + r));
    for (Index c = 0; c < cols.size(); ++c) out += "," + format_number(m(r, c));
    out += "\n";
  }
  return out;
}

inline json matrix_json(const PartitionedGraph& graph, const Eigen::MatrixXd& m, IndexRange rows, IndexRange cols) {
  auto ids = [&](IndexRange r) {
    json a = json::array();
    for (Index k = 0; k < r.size(); ++k) a.push_back(graph.id(r.begin + k));
    return a;
  };
  json data = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    data.push_back(row);
  }
  return json{{"rows", ids(rows)}, {"cols", ids(cols)}, {"data", data}};
}

// ---------------------------------------------------------------------------
// Anomalies

inline Anomaly anomaly_from_json(const json& j) {
  try {
    Anomaly a;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "pinned_node") {
      a.kind = AnomalyKind::pinned_node;
    } else if (kind == "current_source") {
      a.kind = AnomalyKind::current_source;
    } else if (kind == "conductivity_change") {
      a.kind = AnomalyKind::conductivity_change;
    } else if (kind == "topology_change") {
      a.kind = AnomalyKind::topology_change;
    } else {
      fail(ErrorKind::InvalidInput, "unknown anomaly kind '" + kind + "'");
    }
    if (j.contains("nodes")) a.nodes = j.at("nodes").get<std::vector<NodeId>>();
    if (j.contains("values")) a.values = j.at("values").get<std::vector<double>>();
    auto read_edges = [](const json& arr) {
      std::vector<EdgeInput> out;
      for (const auto& e : arr) out.push_back({e.at("i").get<NodeId>(), e.at("j").get<NodeId>(), e.at("sigma").get<double>()});
      return out;
    };
    if (j.contains("edges")) a.edges = read_edges(j.at("edges"));
    if (j.contains("add")) a.edges = read_edges(j.at("add"));
    if (j.contains("remove")) {
      for (const auto& e : j.at("remove")) a.removed.emplace_back(e.at("i").get<NodeId>(), e.at("j").get<NodeId>());
    }
    return a;
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("malformed anomaly JSON: ") + e.what());
  }
}

inline json anomaly_to_json(const Anomaly& a) {
  json j{{"kind", std::string(to_string(a.kind))}};
  if (!a.nodes.empty()) {
    j["nodes"] = a.nodes;
    j["values"] = a.values;
  }
  auto edges = [](const std::vector<EdgeInput>& v) {
    json arr = json::array();
    for (const auto& e : v) arr.push_back({{"i", e.i}, {"j", e.j}, {"sigma", e.sigma}});
    return arr;
  };
  if (a.kind == AnomalyKind::conductivity_change) j["edges"] = edges(a.edges);
  if (a.kind == AnomalyKind::topology_change) {
    j["add"] = edges(a.edges);
    json rem = json::array();
    for (const auto& [i, k] : a.removed) rem.push_back({{"i", i}, {"j", k}});
    j["remove"] = rem;
  }
  return j;
}

}  // namespace graphpot::io
