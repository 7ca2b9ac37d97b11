#pragma once

// Active cloaking: anomalies in Ω⁻, cloak currents on 𝒩(∂Ω)∖Ω∓ derived from
// the reproduction formulas, and the lattice experiments built on them.

#include <chrono>
#include <utility>
#include <vector>

#include "graphpot/bvp.hpp"
#include "graphpot/generators.hpp"

namespace graphpot {

enum class AnomalyKind { pinned_node, current_source, conductivity_change, topology_change };

constexpr std::string_view to_string(AnomalyKind k) {
  switch (k) {
    case AnomalyKind::pinned_node: return "pinned_node";
    case AnomalyKind::current_source: return "current_source";
    case AnomalyKind::conductivity_change: return "conductivity_change";
    case AnomalyKind::topology_change: return "topology_change";
  }
  return "?";
}

struct Anomaly {
  AnomalyKind kind = AnomalyKind::pinned_node;
  // pinned_node: voltages; current_source: injected currents.
  std::vector<NodeId> nodes;
  std::vector<double> values;
  // conductivity_change: replacement σ for existing edges; topology_change: edges to add.
  std::vector<EdgeInput> edges;
  // topology_change: edges to remove.
  std::vector<std::pair<NodeId, NodeId>> removed;

  bool empty() const { return nodes.empty() && edges.empty() && removed.empty(); }

  static Anomaly pinned(std::vector<NodeId> nodes, std::vector<double> values) {
    return {AnomalyKind::pinned_node, std::move(nodes), std::move(values), {}, {}};
  }
  static Anomaly source(std::vector<NodeId> nodes, std::vector<double> values) {
    return {AnomalyKind::current_source, std::move(nodes), std::move(values), {}, {}};
  }
};

// Ω⁻ ∖ 𝒩(∂Ω): where anomalies may live.
inline NodeSet anomaly_admissible_nodes(const PartitionedGraph& graph) {
  const auto& lay = graph.layout();
  auto near = closed_neighborhood(graph, lay.boundary().to_set());
  std::vector<char> blocked(static_cast<std::size_t>(graph.num_nodes()), 0);
  for (Index i : near) blocked[static_cast<std::size_t>(i)] = 1;
  NodeSet out;
  for (Index i : lay.range(Region::OmegaMinus).to_set()) {
    if (!blocked[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

inline void validate_anomaly(const PartitionedGraph& graph, const Anomaly& anomaly) {
  if ((anomaly.kind == AnomalyKind::pinned_node || anomaly.kind == AnomalyKind::current_source) &&
      anomaly.nodes.size() != anomaly.values.size()) {
    fail(ErrorKind::DimensionMismatch, "anomaly needs one value per node");
  }
  auto admissible = anomaly_admissible_nodes(graph);
  std::vector<char> ok(static_cast<std::size_t>(graph.num_nodes()), 0);
  for (Index i : admissible) ok[static_cast<std::size_t>(i)] = 1;
  const auto& lay = graph.layout();
  auto check_node = [&](NodeId id) {
    Index i = graph.index_of(id);
    if (ok[static_cast<std::size_t>(i)]) return;
    if (anomaly.kind == AnomalyKind::current_source && lay.region_of(i) == Region::OmegaMinus) {
      fail(ErrorKind::AnomalyTouchesCloak, "source node " + std::to_string(id) + " is adjacent to the cloak boundary");
    }
    fail(ErrorKind::AnomalyOutsideInterior,
         "node " + std::to_string(id) + " is not in omega_minus away from the boundary neighborhood");
  };
  for (NodeId id : anomaly.nodes) check_node(id);
  for (const auto& e : anomaly.edges) {
    check_node(e.i);
    check_node(e.j);
    if (e.i == e.j) fail(ErrorKind::SelfEdge, "anomaly edge {" + std::to_string(e.i) + "," + std::to_string(e.j) + "}");
    if (!(e.sigma > 0.0) || !std::isfinite(e.sigma)) {
      fail(ErrorKind::NonPositiveConductance, "anomaly edge sigma " + std::to_string(e.sigma));
    }
    bool exists = graph.find_edge(graph.index_of(e.i), graph.index_of(e.j)).has_value();
    if (anomaly.kind == AnomalyKind::conductivity_change && !exists) {
      fail(ErrorKind::InvalidInput, "conductivity change on missing edge");
    }
    if (anomaly.kind == AnomalyKind::topology_change && exists) {
      fail(ErrorKind::DuplicateEdge, "added edge already exists");
    }
  }
  for (const auto& [i, j] : anomaly.removed) {
    check_node(i);
    check_node(j);
    if (!graph.find_edge(graph.index_of(i), graph.index_of(j))) fail(ErrorKind::InvalidInput, "removed edge missing");
  }
}

namespace detail {
inline void add_edge_weight(Eigen::MatrixXd& L, Index a, Index b, double w) {
  L(a, a) += w;
  L(b, b) += w;
  L(a, b) -= w;
  L(b, a) -= w;
}
}  // namespace detail

inline constexpr double kSolveTolerance = 1e-10;

// Field of the anomalous network with Dirichlet data f on B. `injected`
// (optional) adds currents at 𝒱° nodes, e.g. cloak currents.
inline NodeField apply_anomaly(const PartitionedGraph& graph, const SplitLaplacian& split, const Anomaly& anomaly,
                               const Eigen::VectorXd& f_b, const NodeField* injected = nullptr) {
  validate_anomaly(graph, anomaly);
  const auto& lay = graph.layout();
  const Index n = lay.num_nodes();
  const auto b = lay.range(Region::B);
  if (f_b.size() != b.size()) fail(ErrorKind::DimensionMismatch, "Dirichlet data must have one value per B node");

  Eigen::MatrixXd L = split.L;
  NodeField rhs = NodeField::Zero(n);
  NodeField u = NodeField::Zero(n);
  std::vector<char> fixed(static_cast<std::size_t>(n), 0);
  for (Index i = b.begin; i < b.end; ++i) fixed[static_cast<std::size_t>(i)] = 1;
  u.segment(b.begin, b.size()) = f_b;

  switch (anomaly.kind) {
    case AnomalyKind::pinned_node:
      for (std::size_t k = 0; k < anomaly.nodes.size(); ++k) {
        Index i = graph.index_of(anomaly.nodes[k]);
        fixed[static_cast<std::size_t>(i)] = 1;
        u[i] = anomaly.values[k];
      }
      break;
    case AnomalyKind::current_source:
      for (std::size_t k = 0; k < anomaly.nodes.size(); ++k) rhs[graph.index_of(anomaly.nodes[k])] += anomaly.values[k];
      break;
    case AnomalyKind::conductivity_change:
      for (const auto& e : anomaly.edges) {
        Index a = graph.index_of(e.i);
        Index c = graph.index_of(e.j);
        double old = graph.edge(*graph.find_edge(a, c)).sigma;
        detail::add_edge_weight(L, a, c, e.sigma - old);
      }
      break;
    case AnomalyKind::topology_change:
      for (const auto& e : anomaly.edges) detail::add_edge_weight(L, graph.index_of(e.i), graph.index_of(e.j), e.sigma);
      for (const auto& [i, j] : anomaly.removed) {
        Index a = graph.index_of(i);
        Index c = graph.index_of(j);
        detail::add_edge_weight(L, a, c, -graph.edge(*graph.find_edge(a, c)).sigma);
      }
      break;
  }
  if (injected) {
    if (injected->size() != n) fail(ErrorKind::DimensionMismatch, "injected current length != |V|");
    if (!injected->segment(b.begin, b.size()).isZero(0.0)) fail(ErrorKind::SourceOnB, "injected current on B");
    rhs += *injected;
  }

  std::vector<Index> free_nodes, fixed_nodes;
  for (Index i = 0; i < n; ++i) (fixed[static_cast<std::size_t>(i)] ? fixed_nodes : free_nodes).push_back(i);
  if (free_nodes.empty()) return u;
  Eigen::LLT<Eigen::MatrixXd> llt(L(free_nodes, free_nodes));
  if (llt.info() != Eigen::Success) fail(ErrorKind::Disconnected, "anomalous network leaves floating nodes");
  Eigen::VectorXd r = rhs(free_nodes) - L(free_nodes, fixed_nodes) * u(fixed_nodes);
  Eigen::VectorXd solved = llt.solve(r);
  u(free_nodes) = solved;

  const double scale = std::max(rhs.lpNorm<Eigen::Infinity>(), detail::laplacian_scale(L, u));
  const double residual = (L(free_nodes, Eigen::all) * u - rhs(free_nodes)).lpNorm<Eigen::Infinity>();
  if (residual > kSolveTolerance * std::max(scale, 1.0)) {
    fail(ErrorKind::FactorizationFailure, "anomalous system residual " + std::to_string(residual));
  }
  return u;
}

enum class CloakMode { interior, exterior };

constexpr std::string_view to_string(CloakMode m) { return m == CloakMode::interior ? "interior" : "exterior"; }

constexpr ReproductionFormula cloak_formula(CloakMode mode, Side variant) {
  if (mode == CloakMode::interior) {
    return variant == Side::plus ? ReproductionFormula::interior_plus : ReproductionFormula::interior_minus;
  }
  return variant == Side::plus ? ReproductionFormula::exterior_plus : ReproductionFormula::exterior_minus;
}

struct CloakPlan {
  CloakMode mode = CloakMode::interior;
  Side variant = Side::plus;
  NodeSet injection_nodes;  // 𝒩(∂Ω)∖Ω⁻ (plus) or 𝒩(∂Ω)∖Ω⁺ (minus)
  NodeField currents;
  IndexRange cancelled;     // where the cloak field is −u (interior) / −u_* (exterior)
  double net_current = 0.0;
};

struct Cloak {
  CloakPlan plan;
  NodeField field;  // u_c = G φ_c
};

// Cloak built from measured values of `u` alone: currents −ψ where ψ
// reproduces u on the formula's set, so u + u_c vanishes there.
inline Cloak design_cloak(const SplitLaplacian& split, const GreenOperator& green, const NodeField& u, CloakMode mode,
                          Side variant, HypothesisCheck check = HypothesisCheck::checked,
                          double tol = kHypothesisTolerance) {
  if (u.size() != split.layout.num_nodes()) fail(ErrorKind::DimensionMismatch, "field length != |V|");
  const auto formula = cloak_formula(mode, variant);
  if (check == HypothesisCheck::checked) check_hypothesis(split, u, formula, tol);
  Cloak c;
  c.plan.mode = mode;
  c.plan.variant = variant;
  c.plan.injection_nodes = injection_nodes(split, variant);
  c.plan.currents = -reproduction_current(split, u, formula);
  c.plan.cancelled = formula_traits(formula, split.layout).reproduced;
  c.plan.net_current = c.plan.currents.sum();
  c.field = green.apply(c.plan.currents);
  return c;
}

// u solves the full Dirichlet problem; u + u_c keeps u on B ∪ Ω⁺ and is zero
// on ∂Ω ∪ Ω⁻ (plus) or Ω⁻ (minus).
inline Cloak interior_cloak(const SplitLaplacian& split, const GreenOperator& green, const NodeField& u, Side variant,
                            HypothesisCheck check = HypothesisCheck::checked) {
  return design_cloak(split, green, u, CloakMode::interior, variant, check);
}

// u_star is the field of an interior anomaly with u_star|_B = 0; u_star + u_c
// vanishes on B ∪ Ω⁺ (and on ∂Ω for the minus variant).
inline Cloak exterior_cloak(const SplitLaplacian& split, const GreenOperator& green, const NodeField& u_star,
                            Side variant, HypothesisCheck check = HypothesisCheck::checked) {
  return design_cloak(split, green, u_star, CloakMode::exterior, variant, check);
}

// True iff currents are exactly zero off the injection set.
inline bool currents_supported_on(const NodeField& currents, const NodeSet& nodes) {
  std::vector<char> allowed(static_cast<std::size_t>(currents.size()), 0);
  for (Index i : nodes) allowed[static_cast<std::size_t>(i)] = 1;
  for (Index i = 0; i < currents.size(); ++i) {
    if (!allowed[static_cast<std::size_t>(i)] && currents[i] != 0.0) return false;
  }
  return true;
}

struct CloakMetrics {
  double reference_scale = 0.0;  // ‖u‖∞ (interior) or ‖u_*‖∞ (exterior)
  double outside_error = 0.0;    // max over B∪Ω⁺ of |u_tot − u| (interior) or |u_tot| (exterior), relative
  double cancel_error = 0.0;     // max |u_c + field·1_X|, relative
  bool support_exact = false;
  double net_current = 0.0;
  double seconds = 0.0;
};

struct CloakExperiment {
  CloakMode mode = CloakMode::interior;
  Side variant = Side::plus;
  NodeField u;       // reference (no anomaly, no cloak)
  NodeField u_star;  // anomaly, no cloak
  NodeField u_tot;   // anomaly with cloak currents injected
  Cloak cloak;
  CloakMetrics metrics;
};

inline CloakExperiment run_cloak_experiment(const ProblemGraph& problem, const Eigen::VectorXd& f_b, CloakMode mode,
                                            Side variant, const Anomaly& anomaly) {
  const auto start = std::chrono::steady_clock::now();
  const auto& graph = problem.graph;
  auto split = split_laplacian(graph, problem.pou);
  auto green = assemble_green(split);
  CloakExperiment ex;
  ex.mode = mode;
  ex.variant = variant;
  ex.u = solve_full_dirichlet(split, f_b);
  ex.u_star = apply_anomaly(graph, split, anomaly, f_b);
  const NodeField& measured = mode == CloakMode::interior ? ex.u : ex.u_star;
  ex.cloak = design_cloak(split, green, measured, mode, variant);
  ex.u_tot = apply_anomaly(graph, split, anomaly, f_b, &ex.cloak.plan.currents);

  auto& m = ex.metrics;
  m.reference_scale = measured.lpNorm<Eigen::Infinity>();
  const double denom = m.reference_scale > 0.0 ? m.reference_scale : 1.0;
  const auto outside = graph.layout().range(Region::B, Region::OmegaPlus);
  NodeField target_outside = mode == CloakMode::interior ? ex.u : NodeField::Zero(ex.u.size());
  m.outside_error =
      (ex.u_tot - target_outside).segment(outside.begin, outside.size()).lpNorm<Eigen::Infinity>() / denom;
  NodeField expected_cloak = NodeField::Zero(measured.size());
  const auto x = ex.cloak.plan.cancelled;
  expected_cloak.segment(x.begin, x.size()) = -measured.segment(x.begin, x.size());
  m.cancel_error = (ex.cloak.field - expected_cloak).lpNorm<Eigen::Infinity>() / denom;
  m.support_exact = currents_supported_on(ex.cloak.plan.currents, ex.cloak.plan.injection_nodes);
  m.net_current = ex.cloak.plan.net_current;
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return ex;
}

struct LatticeExperimentConfig {
  Index rows = 20;
  Index cols = 20;
  RingSpec rings;
  double sigma = 1.0;
  double pou_fraction = kDefaultBoundaryFraction;
  CloakMode mode = CloakMode::interior;
  Side variant = Side::plus;
  // Unset: pinned center node at 0 (interior) / unit source at the center (exterior).
  std::optional<Anomaly> anomaly;
  // B data; the exterior experiments ground B.
  double bottom = 0.0;
  double top = 2.0;
  double sides = 1.0;
};

struct LatticeExperiment {
  ProblemGraph problem;
  Eigen::VectorXd f_b;
  Anomaly anomaly;
  CloakExperiment result;
};

inline LatticeExperiment run_lattice_experiment(const LatticeExperimentConfig& cfg) {
  LatticeExperiment out{build_lattice(cfg.rows, cfg.cols, cfg.rings, cfg.sigma, cfg.pou_fraction), {}, {}, {}};
  const NodeId center = lattice_center_id(cfg.rows, cfg.cols);
  if (cfg.anomaly) {
    out.anomaly = *cfg.anomaly;
  } else {
    out.anomaly = cfg.mode == CloakMode::interior ? Anomaly::pinned({center}, {0.0}) : Anomaly::source({center}, {1.0});
  }
  if (cfg.mode == CloakMode::interior) {
    out.f_b = lattice_top_bottom_data(out.problem.graph, cfg.rows, cfg.cols, cfg.bottom, cfg.top, cfg.sides);
  } else {
    out.f_b = Eigen::VectorXd::Zero(out.problem.graph.layout().size(Region::B));
  }
  out.result = run_cloak_experiment(out.problem, out.f_b, cfg.mode, cfg.variant, out.anomaly);
  return out;
}

}  // namespace graphpot
