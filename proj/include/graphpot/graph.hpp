#pragma once

// Partitioned weighted graphs: validation, discrete gradient, Laplacians and
// the exterior/interior Laplacian split driven by an edge partition of unity.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "graphpot/error.hpp"

namespace graphpot {

using Index = Eigen::Index;
using NodeId = std::int64_t;
using NodeSet = std::vector<Index>;

// Regions in their fixed global order. Edges may only join a region to
// itself or to the region immediately before/after it in this order.
enum class Region : std::uint8_t { B = 0, OmegaPlus = 1, Boundary = 2, OmegaMinus = 3 };

constexpr std::string_view to_string(Region r) {
  switch (r) {
    case Region::B: return "B";
    case Region::OmegaPlus: return "omega_plus";
    case Region::Boundary: return "boundary";
    case Region::OmegaMinus: return "omega_minus";
  }
  return "?";
}

// Selects the exterior (+) or interior (-) member of a paired quantity:
// L(σ±), γ₁±, 𝒟±, Λ±, and the cloak variants injecting on 𝒩(∂Ω)∖Ω∓.
enum class Side : std::uint8_t { plus, minus };

constexpr std::string_view to_string(Side s) { return s == Side::plus ? "plus" : "minus"; }

struct IndexRange {
  Index begin = 0;
  Index end = 0;

  Index size() const { return end - begin; }
  bool empty() const { return end == begin; }
  bool contains(Index i) const { return i >= begin && i < end; }
  NodeSet to_set() const {
    NodeSet out(static_cast<std::size_t>(size()));
    std::iota(out.begin(), out.end(), begin);
    return out;
  }
};

// Node layout. Because nodes are ordered B, Ω⁺, ∂Ω, Ω⁻ every region, and
// every union of consecutive regions, is a contiguous index range.
struct Layout {
  std::array<Index, 5> offsets{};

  Index num_nodes() const { return offsets[4]; }
  IndexRange range(Region r) const {
    auto k = static_cast<std::size_t>(r);
    return {offsets[k], offsets[k + 1]};
  }
  IndexRange range(Region first, Region last) const {
    return {offsets[static_cast<std::size_t>(first)], offsets[static_cast<std::size_t>(last) + 1]};
  }
  Index size(Region r) const { return range(r).size(); }
  // 𝒱° = 𝒱 ∖ B
  IndexRange interior_nodes() const { return {offsets[1], offsets[4]}; }
  IndexRange boundary() const { return range(Region::Boundary); }
  Region region_of(Index i) const {
    for (std::size_t k = 0; k < 4; ++k) {
      if (i < offsets[k + 1]) return static_cast<Region>(k);
    }
    fail(ErrorKind::InvalidInput, "node index out of range");
  }
  Eigen::VectorXd indicator(std::initializer_list<Region> regions) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(num_nodes());
    for (Region r : regions) out.segment(range(r).begin, range(r).size()).setOnes();
    return out;
  }

  bool operator==(const Layout&) const = default;
};

struct EdgeInput {
  NodeId i = 0;
  NodeId j = 0;
  double sigma = 1.0;
};

struct PartitionInput {
  std::vector<NodeId> b;
  std::vector<NodeId> omega_plus;
  std::vector<NodeId> boundary;
  std::vector<NodeId> omega_minus;
};

// An edge between internal node indices, kept in input orientation.
struct Edge {
  Index a = 0;
  Index b = 0;
  double sigma = 1.0;

  Index lower() const { return std::min(a, b); }
  Index upper() const { return std::max(a, b); }
};

class PartitionedGraph {
 public:
  struct Incidence {
    Index neighbor;
    Index edge;
  };

  const Layout& layout() const { return layout_; }
  Index num_nodes() const { return layout_.num_nodes(); }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }

  const std::vector<NodeId>& ids() const { return ids_; }
  NodeId id(Index i) const { return ids_[static_cast<std::size_t>(i)]; }
  bool contains(NodeId id) const { return index_.count(id) != 0; }
  Index index_of(NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) fail(ErrorKind::UnknownNode, "node id " + std::to_string(id));
    return it->second;
  }
  Region region(Index i) const { return layout_.region_of(i); }

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(Index e) const { return edges_[static_cast<std::size_t>(e)]; }
  Eigen::VectorXd sigma() const {
    Eigen::VectorXd s(num_edges());
    for (Index e = 0; e < num_edges(); ++e) s[e] = edge(e).sigma;
    return s;
  }

  std::span<const Incidence> neighbors(Index i) const {
    auto begin = adjacency_offsets_[static_cast<std::size_t>(i)];
    auto end = adjacency_offsets_[static_cast<std::size_t>(i) + 1];
    return {adjacency_.data() + begin, static_cast<std::size_t>(end - begin)};
  }

  // Edge index joining two internal indices, if any.
  std::optional<Index> find_edge(Index a, Index b) const {
    for (const auto& inc : neighbors(a)) {
      if (inc.neighbor == b) return inc.edge;
    }
    return std::nullopt;
  }

 private:
  friend PartitionedGraph build_graph(const std::vector<NodeId>&, const PartitionInput&,
                                      const std::vector<EdgeInput>&);

  void build_adjacency() {
    std::vector<Index> degree(static_cast<std::size_t>(num_nodes()), 0);
    for (const auto& e : edges_) {
      ++degree[static_cast<std::size_t>(e.a)];
      ++degree[static_cast<std::size_t>(e.b)];
    }
    adjacency_offsets_.assign(static_cast<std::size_t>(num_nodes()) + 1, 0);
    for (std::size_t i = 0; i < degree.size(); ++i) adjacency_offsets_[i + 1] = adjacency_offsets_[i] + degree[i];
    adjacency_.resize(static_cast<std::size_t>(adjacency_offsets_.back()));
    auto cursor = adjacency_offsets_;
    for (Index k = 0; k < num_edges(); ++k) {
      const auto& e = edges_[static_cast<std::size_t>(k)];
      adjacency_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(e.a)]++)] = {e.b, k};
      adjacency_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(e.b)]++)] = {e.a, k};
    }
  }

  Layout layout_;
  std::vector<NodeId> ids_;
  std::unordered_map<NodeId, Index> index_;
  std::vector<Edge> edges_;
  std::vector<Index> adjacency_offsets_;
  std::vector<Incidence> adjacency_;
};

namespace detail {

// Connectivity of `nodes` using only edges with positive weight whose
// endpoints both lie in the set. `weights` may be empty (all edges count).
inline bool connected_within(const PartitionedGraph& graph, std::span<const double> weights,
                             std::span<const Index> nodes) {
  if (nodes.size() <= 1) return true;
  std::vector<char> in_set(static_cast<std::size_t>(graph.num_nodes()), 0);
  for (Index i : nodes) in_set[static_cast<std::size_t>(i)] = 1;
  std::vector<char> seen(in_set.size(), 0);
  std::queue<Index> frontier;
  frontier.push(nodes.front());
  seen[static_cast<std::size_t>(nodes.front())] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    Index x = frontier.front();
    frontier.pop();
    for (const auto& inc : graph.neighbors(x)) {
      auto y = static_cast<std::size_t>(inc.neighbor);
      if (!in_set[y] || seen[y]) continue;
      if (!weights.empty() && !(weights[static_cast<std::size_t>(inc.edge)] > 0.0)) continue;
      seen[y] = 1;
      ++reached;
      frontier.push(inc.neighbor);
    }
  }
  return reached == nodes.size();
}

}  // namespace detail

inline PartitionedGraph build_graph(const std::vector<NodeId>& nodes, const PartitionInput& partition,
                                    const std::vector<EdgeInput>& edges) {
  std::unordered_set<NodeId> declared;
  for (NodeId id : nodes) {
    if (!declared.insert(id).second) fail(ErrorKind::PartitionViolation, "node " + std::to_string(id) + " listed twice");
  }

  PartitionedGraph g;
  const std::array<const std::vector<NodeId>*, 4> sets{&partition.b, &partition.omega_plus, &partition.boundary,
                                                       &partition.omega_minus};
  g.layout_.offsets[0] = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& set = *sets[k];
    if (set.empty()) {
      fail(ErrorKind::PartitionViolation, std::string("partition set ") +
                                              std::string(to_string(static_cast<Region>(k))) + " is empty");
    }
    for (NodeId id : set) {
      if (!declared.count(id)) fail(ErrorKind::UnknownNode, "partition references unknown node " + std::to_string(id));
      if (!g.index_.emplace(id, static_cast<Index>(g.ids_.size())).second) {
        fail(ErrorKind::PartitionViolation, "node " + std::to_string(id) + " appears in more than one partition set");
      }
      g.ids_.push_back(id);
    }
    g.layout_.offsets[k + 1] = static_cast<Index>(g.ids_.size());
  }
  if (g.ids_.size() != nodes.size()) fail(ErrorKind::PartitionViolation, "partition does not cover every node");

  std::unordered_set<std::uint64_t> seen_pairs;
  const auto n = static_cast<std::uint64_t>(g.ids_.size());
  g.edges_.reserve(edges.size());
  for (const auto& in : edges) {
    Index a = g.index_of(in.i);
    Index b = g.index_of(in.j);
    if (a == b) fail(ErrorKind::SelfEdge, "edge {" + std::to_string(in.i) + "," + std::to_string(in.j) + "}");
    if (!(in.sigma > 0.0) || !std::isfinite(in.sigma)) {
      fail(ErrorKind::NonPositiveConductance,
           "edge {" + std::to_string(in.i) + "," + std::to_string(in.j) + "} has sigma " + std::to_string(in.sigma));
    }
    auto key = static_cast<std::uint64_t>(std::min(a, b)) * n + static_cast<std::uint64_t>(std::max(a, b));
    if (!seen_pairs.insert(key).second) {
      fail(ErrorKind::DuplicateEdge, "edge {" + std::to_string(in.i) + "," + std::to_string(in.j) + "}");
    }
    auto ra = static_cast<int>(g.layout_.region_of(a));
    auto rb = static_cast<int>(g.layout_.region_of(b));
    if (std::abs(ra - rb) > 1) {
      fail(ErrorKind::PartitionViolation, "edge {" + std::to_string(in.i) + "," + std::to_string(in.j) + "} joins " +
                                              std::string(to_string(static_cast<Region>(ra))) + " and " +
                                              std::string(to_string(static_cast<Region>(rb))));
    }
    g.edges_.push_back({a, b, in.sigma});
  }
  g.build_adjacency();

  NodeSet all(static_cast<std::size_t>(g.num_nodes()));
  std::iota(all.begin(), all.end(), Index{0});
  if (!detail::connected_within(g, {}, all)) fail(ErrorKind::Disconnected, "graph is not connected");
  return g;
}

// ---------------------------------------------------------------------------
// Edge classification and partition of unity

enum class EdgeClass : std::uint8_t { plus, minus, boundary };

struct EdgeClassification {
  std::vector<Index> e_plus;      // at least one endpoint in B ∪ Ω⁺
  std::vector<Index> e_minus;     // at least one endpoint in Ω⁻
  std::vector<Index> e_boundary;  // both endpoints in ∂Ω
  std::vector<EdgeClass> of_edge;
};

inline EdgeClassification classify_edges(const PartitionedGraph& graph) {
  EdgeClassification c;
  c.of_edge.reserve(graph.edges().size());
  for (Index k = 0; k < graph.num_edges(); ++k) {
    const auto& e = graph.edge(k);
    Region ra = graph.region(e.a);
    Region rb = graph.region(e.b);
    auto outer = [](Region r) { return r == Region::B || r == Region::OmegaPlus; };
    EdgeClass cls;
    if (outer(ra) || outer(rb)) {
      cls = EdgeClass::plus;
      c.e_plus.push_back(k);
    } else if (ra == Region::OmegaMinus || rb == Region::OmegaMinus) {
      cls = EdgeClass::minus;
      c.e_minus.push_back(k);
    } else {
      cls = EdgeClass::boundary;
      c.e_boundary.push_back(k);
    }
    c.of_edge.push_back(cls);
  }
  return c;
}

struct EdgePartitionOfUnity {
  Eigen::VectorXd p_plus;
  Eigen::VectorXd p_minus;
};

inline constexpr double kDefaultBoundaryFraction = 0.5;

namespace detail {
inline void check_fraction(double f) {
  if (!(f >= 0.0 && f <= 1.0)) fail(ErrorKind::FractionOutOfRange, "fraction " + std::to_string(f) + " not in [0,1]");
}
}  // namespace detail

// Per-edge fractions for the edges of ℰ^∂Ω, in the order of
// classification.e_boundary.
inline EdgePartitionOfUnity make_partition_of_unity(const PartitionedGraph& graph,
                                                    const EdgeClassification& classification,
                                                    std::span<const double> boundary_fractions) {
  if (boundary_fractions.size() != classification.e_boundary.size()) {
    fail(ErrorKind::DimensionMismatch, "expected one fraction per boundary-internal edge");
  }
  EdgePartitionOfUnity pou;
  pou.p_plus.resize(graph.num_edges());
  for (Index k = 0; k < graph.num_edges(); ++k) {
    pou.p_plus[k] = classification.of_edge[static_cast<std::size_t>(k)] == EdgeClass::plus ? 1.0 : 0.0;
  }
  for (std::size_t k = 0; k < boundary_fractions.size(); ++k) {
    detail::check_fraction(boundary_fractions[k]);
    pou.p_plus[classification.e_boundary[k]] = boundary_fractions[k];
  }
  pou.p_minus = (1.0 - pou.p_plus.array()).matrix();
  return pou;
}

inline EdgePartitionOfUnity make_partition_of_unity(const PartitionedGraph& graph,
                                                    const EdgeClassification& classification,
                                                    double boundary_fraction = kDefaultBoundaryFraction) {
  detail::check_fraction(boundary_fraction);
  std::vector<double> fractions(classification.e_boundary.size(), boundary_fraction);
  return make_partition_of_unity(graph, classification, fractions);
}

// Partition of unity from optional per-edge p⁺ values (e.g. read from a
// graph file). Values given on ℰ± edges must match the forced 1/0.
inline EdgePartitionOfUnity partition_of_unity_from_edges(const PartitionedGraph& graph,
                                                          const EdgeClassification& classification,
                                                          const std::vector<std::optional<double>>& p_plus,
                                                          double default_fraction = kDefaultBoundaryFraction) {
  if (p_plus.size() != static_cast<std::size_t>(graph.num_edges())) {
    fail(ErrorKind::DimensionMismatch, "expected one optional p_plus per edge");
  }
  std::vector<double> fractions;
  fractions.reserve(classification.e_boundary.size());
  for (Index k = 0; k < graph.num_edges(); ++k) {
    const auto& given = p_plus[static_cast<std::size_t>(k)];
    auto cls = classification.of_edge[static_cast<std::size_t>(k)];
    if (cls == EdgeClass::boundary) {
      fractions.push_back(given.value_or(default_fraction));
    } else if (given) {
      double forced = cls == EdgeClass::plus ? 1.0 : 0.0;
      if (*given != forced) {
        fail(ErrorKind::FractionOutOfRange, "edge " + std::to_string(k) + " must have p_plus = " + std::to_string(forced));
      }
    }
  }
  return make_partition_of_unity(graph, classification, fractions);
}

// ---------------------------------------------------------------------------
// Gradient and Laplacians

using IncidenceOperator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Row k: +1 at the lower-indexed endpoint of edge k, -1 at the higher one.
inline IncidenceOperator discrete_gradient(const PartitionedGraph& graph) {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(2 * graph.edges().size());
  for (Index k = 0; k < graph.num_edges(); ++k) {
    const auto& e = graph.edge(k);
    entries.emplace_back(k, e.lower(), 1.0);
    entries.emplace_back(k, e.upper(), -1.0);
  }
  IncidenceOperator grad(graph.num_edges(), graph.num_nodes());
  grad.setFromTriplets(entries.begin(), entries.end());
  return grad;
}

// ∇ᵀ diag(w) ∇ assembled edge by edge.
inline Eigen::MatrixXd weighted_laplacian(const PartitionedGraph& graph, const Eigen::VectorXd& weights) {
  if (weights.size() != graph.num_edges()) fail(ErrorKind::DimensionMismatch, "one weight per edge expected");
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(graph.num_nodes(), graph.num_nodes());
  for (Index k = 0; k < graph.num_edges(); ++k) {
    const auto& e = graph.edge(k);
    double w = weights[k];
    L(e.a, e.a) += w;
    L(e.b, e.b) += w;
    L(e.a, e.b) -= w;
    L(e.b, e.a) -= w;
  }
  return L;
}

// ∑ₑ wₑ ((∇u)ₑ)²
inline double energy(const PartitionedGraph& graph, const Eigen::VectorXd& weights, const Eigen::VectorXd& u) {
  double total = 0.0;
  for (Index k = 0; k < graph.num_edges(); ++k) {
    const auto& e = graph.edge(k);
    double d = u[e.a] - u[e.b];
    total += weights[k] * d * d;
  }
  return total;
}

struct SplitLaplacian {
  Layout layout;
  Eigen::MatrixXd L;
  Eigen::MatrixXd L_plus;
  Eigen::MatrixXd L_minus;
  EdgePartitionOfUnity pou;
  Eigen::VectorXd sigma_plus;
  Eigen::VectorXd sigma_minus;

  const Eigen::MatrixXd& side(Side s) const { return s == Side::plus ? L_plus : L_minus; }
  const Eigen::VectorXd& side_weights(Side s) const { return s == Side::plus ? sigma_plus : sigma_minus; }
};

// L(σ±) = ∇ᵀ diag(p±σ) ∇. L is formed as the entrywise sum L(σ⁺) + L(σ⁻) so
// that the decomposition holds bit for bit; since p⁻σ is exactly zero on ℰ⁺
// and p⁺σ exactly zero on ℰ⁻, L agrees exactly with L(σ±) off the (∂Ω,∂Ω) block.
inline SplitLaplacian split_laplacian(const PartitionedGraph& graph, const EdgePartitionOfUnity& pou) {
  if (pou.p_plus.size() != graph.num_edges() || pou.p_minus.size() != graph.num_edges()) {
    fail(ErrorKind::DimensionMismatch, "partition of unity does not match the edge count");
  }
  SplitLaplacian split;
  split.layout = graph.layout();
  split.pou = pou;
  const Eigen::VectorXd sigma = graph.sigma();
  split.sigma_plus = pou.p_plus.cwiseProduct(sigma);
  split.sigma_minus = pou.p_minus.cwiseProduct(sigma);
  split.L_plus = weighted_laplacian(graph, split.sigma_plus);
  split.L_minus = weighted_laplacian(graph, split.sigma_minus);
  split.L = split.L_plus + split.L_minus;
  return split;
}

// True iff node_set is connected using only edges of positive weight with
// both endpoints in the set.
inline bool subgraph_connected(const PartitionedGraph& graph, const Eigen::VectorXd& weights,
                               std::span<const Index> node_set) {
  if (weights.size() != graph.num_edges()) fail(ErrorKind::DimensionMismatch, "one weight per edge expected");
  if (std::any_of(weights.begin(), weights.end(), [](double w) { return w < 0.0; })) {
    fail(ErrorKind::InvalidInput, "negative edge weight");
  }
  return detail::connected_within(graph, {weights.data(), static_cast<std::size_t>(weights.size())}, node_set);
}

// Closed neighborhood 𝒩(X). With weights, only edges of positive weight count.
inline NodeSet closed_neighborhood(const PartitionedGraph& graph, std::span<const Index> set,
                                   const Eigen::VectorXd* weights = nullptr) {
  std::vector<char> mark(static_cast<std::size_t>(graph.num_nodes()), 0);
  for (Index i : set) {
    mark[static_cast<std::size_t>(i)] = 1;
    for (const auto& inc : graph.neighbors(i)) {
      if (weights && !((*weights)[inc.edge] > 0.0)) continue;
      mark[static_cast<std::size_t>(inc.neighbor)] = 1;
    }
  }
  NodeSet out;
  for (Index i = 0; i < graph.num_nodes(); ++i) {
    if (mark[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

// Connectivity of 𝒢⁻ = (∂Ω ∪ Ω⁻, σ⁻) and 𝒢⁺ = (B ∪ Ω⁺ ∪ ∂Ω, σ⁺).
struct SideConnectivity {
  bool interior = false;
  bool exterior = false;
};

inline SideConnectivity side_connectivity(const PartitionedGraph& graph, const SplitLaplacian& split) {
  const auto& lay = graph.layout();
  SideConnectivity c;
  c.interior = subgraph_connected(graph, split.sigma_minus, lay.range(Region::Boundary, Region::OmegaMinus).to_set());
  c.exterior = subgraph_connected(graph, split.sigma_plus, lay.range(Region::B, Region::Boundary).to_set());
  return c;
}

}  // namespace graphpot
