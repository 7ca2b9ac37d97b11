#pragma once

// Graph generators: concentric-ring lattices and seeded random partitioned graphs.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "graphpot/graph.hpp"

namespace graphpot {

// A validated graph together with the partition of unity chosen for it.
struct ProblemGraph {
  PartitionedGraph graph;
  EdgePartitionOfUnity pou;
};

// Ring widths, counted from the outside of the lattice inwards. Whatever is
// left in the middle is Ω⁻.
struct RingSpec {
  Index b = 1;
  Index omega_plus = 2;
  Index boundary = 1;

  Index total() const { return b + omega_plus + boundary; }
};

inline NodeId lattice_node_id(Index cols, Index row, Index col) { return static_cast<NodeId>(row * cols + col); }

inline Index lattice_ring(Index rows, Index cols, Index row, Index col) {
  return std::min({row, col, rows - 1 - row, cols - 1 - col});
}

// Smallest side length admitting a non-empty Ω⁻ core.
inline Index lattice_min_size(const RingSpec& rings) { return 2 * rings.total() + 1; }

// 4-neighbour grid with row 0 at the bottom; node id = row * cols + col.
inline ProblemGraph build_lattice(Index rows, Index cols, const RingSpec& rings = {}, double sigma_value = 1.0,
                                  double pou_fraction = kDefaultBoundaryFraction) {
  if (rings.b < 1 || rings.omega_plus < 1 || rings.boundary < 1) {
    fail(ErrorKind::InvalidInput, "ring widths must be at least 1");
  }
  if (std::min(rows, cols) < lattice_min_size(rings)) {
    fail(ErrorKind::LatticeTooSmall, std::to_string(rows) + "x" + std::to_string(cols) +
                                         " lattice leaves no room for omega_minus (need side >= " +
                                         std::to_string(lattice_min_size(rings)) + ")");
  }
  std::vector<NodeId> nodes;
  PartitionInput part;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      NodeId id = lattice_node_id(cols, r, c);
      nodes.push_back(id);
      Index ring = lattice_ring(rows, cols, r, c);
      if (ring < rings.b) {
        part.b.push_back(id);
      } else if (ring < rings.b + rings.omega_plus) {
        part.omega_plus.push_back(id);
      } else if (ring < rings.total()) {
        part.boundary.push_back(id);
      } else {
        part.omega_minus.push_back(id);
      }
    }
  }
  std::vector<EdgeInput> edges;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.push_back({lattice_node_id(cols, r, c), lattice_node_id(cols, r, c + 1), sigma_value});
      if (r + 1 < rows) edges.push_back({lattice_node_id(cols, r, c), lattice_node_id(cols, r + 1, c), sigma_value});
    }
  }
  auto graph = build_graph(nodes, part, edges);
  auto pou = make_partition_of_unity(graph, classify_edges(graph), pou_fraction);
  return {std::move(graph), std::move(pou)};
}

inline NodeId lattice_center_id(Index rows, Index cols) { return lattice_node_id(cols, rows / 2, cols / 2); }

// Dirichlet data on B: `bottom` on row 0, `top` on the last row, `sides` on
// the remaining B nodes. Returned in B order.
inline Eigen::VectorXd lattice_top_bottom_data(const PartitionedGraph& graph, Index rows, Index cols,
                                               double bottom = 0.0, double top = 2.0, double sides = 1.0) {
  auto range = graph.layout().range(Region::B);
  Eigen::VectorXd f(range.size());
  for (Index k = 0; k < range.size(); ++k) {
    NodeId id = graph.id(range.begin + k);
    Index row = static_cast<Index>(id) / cols;
    f[k] = row == 0 ? bottom : (row == rows - 1 ? top : sides);
  }
  return f;
}

struct RandomGraphSpec {
  Index nodes = 60;
  std::uint64_t seed = 1;
  double sigma_min = 1.0;
  double sigma_max = 2.0;
  // Extra random edges per node on top of the spanning structure.
  double extra_edge_ratio = 1.0;
  // Build spanning trees of 𝒢⁺ and 𝒢⁻ out of ℰ⁺/ℰ⁻ edges so both sides
  // stay connected for any partition of unity.
  bool side_connected = true;
  // Fraction on ℰ^∂Ω; when random_pou is set each such edge draws U(0,1).
  double pou_fraction = kDefaultBoundaryFraction;
  bool random_pou = false;
};

inline ProblemGraph random_graph(const RandomGraphSpec& spec) {
  if (spec.nodes < 8) fail(ErrorKind::InvalidInput, "random graphs need at least 8 nodes");
  if (!(spec.sigma_min > 0.0) || spec.sigma_max < spec.sigma_min) {
    fail(ErrorKind::InvalidInput, "invalid conductivity range");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> conductance(spec.sigma_min, spec.sigma_max);
  auto pick = [&rng](std::size_t count) {
    return std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
  };

  const Index n = spec.nodes;
  auto frac = [&](double lo, double hi) {
    return std::max<Index>(1, static_cast<Index>(std::lround(static_cast<double>(n) * (lo + (hi - lo) * unit(rng)))));
  };
  Index n_b = frac(0.10, 0.25);
  Index n_plus = frac(0.20, 0.35);
  Index n_bdry = frac(0.10, 0.20);
  while (n_b + n_plus + n_bdry > n - 1) {
    if (n_plus > 1) --n_plus;
    else if (n_b > 1) --n_b;
    else --n_bdry;
  }

  std::vector<NodeId> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), NodeId{0});
  std::shuffle(ids.begin(), ids.end(), rng);
  std::array<std::vector<NodeId>, 4> region;
  {
    std::size_t cursor = 0;
    const std::array<Index, 3> counts{n_b, n_plus, n_bdry};
    for (std::size_t k = 0; k < 3; ++k) {
      for (Index i = 0; i < counts[k]; ++i) region[k].push_back(ids[cursor++]);
    }
    while (cursor < ids.size()) region[3].push_back(ids[cursor++]);
  }
  const auto& B = region[0];
  const auto& P = region[1];
  const auto& D = region[2];
  const auto& M = region[3];

  std::set<std::pair<NodeId, NodeId>> present;
  std::vector<EdgeInput> edges;
  auto add = [&](NodeId a, NodeId b) {
    if (a == b) return false;
    auto key = std::minmax(a, b);
    if (!present.insert(key).second) return false;
    edges.push_back({a, b, conductance(rng)});
    return true;
  };
  auto pick_from = [&](const std::vector<NodeId>& v, std::size_t limit) { return v[pick(limit)]; };

  // Spanning structure.
  for (std::size_t k = 1; k < B.size(); ++k) add(B[k], pick_from(B, k));
  for (std::size_t k = 0; k < P.size(); ++k) {
    std::size_t pool = B.size() + k;
    std::size_t r = pick(pool);
    add(P[k], r < B.size() ? B[r] : P[r - B.size()]);
  }
  if (spec.side_connected) {
    for (NodeId d : D) add(d, pick_from(P, P.size()));
    // One tree over Ω⁻ hanging off a single ∂Ω node; every ∂Ω node is then
    // tied into it below.
    add(M[0], pick_from(D, D.size()));
    for (std::size_t k = 1; k < M.size(); ++k) add(M[k], pick_from(M, k));
    for (NodeId d : D) {
      bool touches_minus = false;
      for (const auto& e : edges) {
        NodeId other = e.i == d ? e.j : (e.j == d ? e.i : -1);
        if (other >= 0 && std::find(M.begin(), M.end(), other) != M.end()) touches_minus = true;
      }
      if (!touches_minus) add(d, pick_from(M, M.size()));
    }
  } else {
    for (std::size_t k = 0; k < D.size(); ++k) {
      std::size_t r = pick(P.size() + k);
      add(D[k], r < P.size() ? P[r] : D[r - P.size()]);
    }
    for (std::size_t k = 0; k < M.size(); ++k) {
      std::size_t r = pick(D.size() + k);
      add(M[k], r < D.size() ? D[r] : M[r - D.size()]);
    }
  }
  for (std::size_t k = 0; k + 1 < D.size(); ++k) {
    if (unit(rng) < 0.5) add(D[k], D[k + 1]);
  }

  // Extra edges between allowed region pairs.
  std::vector<std::pair<NodeId, int>> all;
  for (int r = 0; r < 4; ++r) {
    for (NodeId id : region[static_cast<std::size_t>(r)]) all.emplace_back(id, r);
  }
  const auto extra = static_cast<std::size_t>(std::lround(spec.extra_edge_ratio * static_cast<double>(n)));
  for (std::size_t attempt = 0, added = 0; added < extra && attempt < 20 * extra + 20; ++attempt) {
    auto [a, ra] = all[pick(all.size())];
    int rb = std::clamp(ra + static_cast<int>(pick(3)) - 1, 0, 3);
    const auto& pool = region[static_cast<std::size_t>(rb)];
    if (add(a, pool[pick(pool.size())])) ++added;
  }

  std::vector<NodeId> nodes(static_cast<std::size_t>(n));
  std::iota(nodes.begin(), nodes.end(), NodeId{0});
  PartitionInput part{B, P, D, M};
  auto graph = build_graph(nodes, part, edges);
  auto classes = classify_edges(graph);
  std::vector<double> fractions(classes.e_boundary.size(), spec.pou_fraction);
  if (spec.random_pou) {
    for (auto& f : fractions) f = unit(rng);
  }
  auto pou = make_partition_of_unity(graph, classes, fractions);
  return {std::move(graph), std::move(pou)};
}

}  // namespace graphpot
