#include "support.hpp"

using namespace gptest;

namespace {

LatticeExperimentConfig lattice(CloakMode mode, Side variant, Index size = 20) {
  LatticeExperimentConfig cfg;
  cfg.rows = cfg.cols = size;
  cfg.mode = mode;
  cfg.variant = variant;
  return cfg;
}

}  // namespace

TEST(Cloak, PathInteriorAgainstOracleGreen) {
  auto p = path_problem();
  auto split = split_laplacian(p.graph, p.pou);
  auto green = assemble_green(split);
  NodeField u = solve_full_dirichlet(split, vec({1}));
  EXPECT_LE(max_abs_diff(u, vec({1, 1, 1, 1})), 1e-12);
  auto c = interior_cloak(split, green, u, Side::plus);
  // Oracle: u_c = G φ with G from Gauss-Jordan.
  Eigen::VectorXd uc = from_dense(oracle_green(p.graph)) * c.plan.currents;
  EXPECT_LE(max_abs_diff(uc, vec({0, 0, -1, -1})), 1e-12);
  EXPECT_LE(max_abs_diff(c.field, uc), 1e-12);
  EXPECT_TRUE(currents_supported_on(c.plan.currents, {1, 2}));
  auto m = interior_cloak(split, green, u, Side::minus);
  EXPECT_LE(max_abs_diff(u + m.field, vec({1, 1, 1, 0})), 1e-12);
}

TEST(Cloak, LatticeAllModesAndVariants) {
  for (CloakMode mode : {CloakMode::interior, CloakMode::exterior}) {
    for (Side variant : {Side::plus, Side::minus}) {
      SCOPED_TRACE(std::string(to_string(mode)) + " " + std::string(to_string(variant)));
      auto ex = run_lattice_experiment(lattice(mode, variant));
      const auto& r = ex.result;
      EXPECT_LE(r.metrics.outside_error, 1e-10);
      EXPECT_LE(r.metrics.cancel_error, 1e-10);
      EXPECT_TRUE(r.metrics.support_exact);
      EXPECT_GT(r.metrics.reference_scale, 0.0);
      const auto& lay = ex.problem.graph.layout();
      if (mode == CloakMode::exterior) {
        // Silent outside: u_tot vanishes on B ∪ Ω⁺, and on ∂Ω for minus.
        auto quiet = lay.range(Region::B, variant == Side::minus ? Region::Boundary : Region::OmegaPlus);
        EXPECT_LE(r.u_tot.segment(quiet.begin, quiet.size()).cwiseAbs().maxCoeff(), 1e-10);
        // The uncloaked source is visible outside.
        auto outer = lay.range(Region::B, Region::OmegaPlus);
        EXPECT_GT(r.u_star.segment(outer.begin, outer.size()).cwiseAbs().maxCoeff(), 1e-3);
      } else {
        auto outer = lay.range(Region::B, Region::OmegaPlus);
        EXPECT_GT((r.u_star - r.u).segment(outer.begin, outer.size()).cwiseAbs().maxCoeff(), 1e-3);
      }
    }
  }
}

TEST(Cloak, InteriorCloakMatchesDirectSolve) {
  // Oracle: remove the pinned center from the network, inject the cloak
  // currents and solve with Gauss-Jordan.
  auto ex = run_lattice_experiment(lattice(CloakMode::interior, Side::plus, 11));
  const auto& g = ex.problem.graph;
  const Index n = g.num_nodes();
  const Index pinned = g.index_of(ex.anomaly.nodes[0]);
  auto L = oracle_laplacian(g, g.sigma());
  const auto b = g.layout().range(Region::B);
  std::vector<Index> free_nodes;
  for (Index i = b.end; i < n; ++i)
    if (i != pinned) free_nodes.push_back(i);
  const auto k = free_nodes.size();
  Dense A(k, std::vector<double>(k));
  Dense rhs(k, std::vector<double>(1));
  for (std::size_t r = 0; r < k; ++r) {
    const Index i = free_nodes[r];
    rhs[r][0] = ex.result.cloak.plan.currents[i];
    for (Index j = b.begin; j < b.end; ++j) rhs[r][0] -= L[i][j] * ex.f_b[j - b.begin];
    for (std::size_t c = 0; c < k; ++c) A[r][c] = L[i][free_nodes[c]];
  }
  auto x = multiply(gauss_jordan_inverse(A), rhs);
  double worst = 0.0;
  for (std::size_t r = 0; r < k; ++r) worst = std::max(worst, std::abs(x[r][0] - ex.result.u_tot[free_nodes[r]]));
  EXPECT_LE(worst, 1e-10);
  EXPECT_EQ(ex.result.u_tot[pinned], 0.0);
}

TEST(Cloak, ConductivityAndTopologyAnomalies) {
  const Index size = 15;
  const NodeId c = lattice_center_id(size, size);
  const NodeId right = c + 1, up = c + static_cast<NodeId>(size), diag = c + static_cast<NodeId>(size) + 1;
  std::vector<Anomaly> anomalies;
  Anomaly sigma;
  sigma.kind = AnomalyKind::conductivity_change;
  sigma.edges = {{c, right, 10.0}, {c, up, 0.01}};
  anomalies.push_back(sigma);
  Anomaly topo;
  topo.kind = AnomalyKind::topology_change;
  topo.edges = {{c, diag, 3.0}};
  topo.removed = {{c, right}};
  anomalies.push_back(topo);
  for (const auto& a : anomalies) {
    for (Side variant : {Side::plus, Side::minus}) {
      auto cfg = lattice(CloakMode::interior, variant, size);
      cfg.anomaly = a;
      auto ex = run_lattice_experiment(cfg);
      EXPECT_LE(ex.result.metrics.outside_error, 1e-10) << to_string(a.kind);
      auto outer = ex.problem.graph.layout().range(Region::B, Region::OmegaPlus);
      EXPECT_GT((ex.result.u_star - ex.result.u).segment(outer.begin, outer.size()).cwiseAbs().maxCoeff(), 1e-4);
    }
  }
}

TEST(Cloak, NonzeroPinnedValueIsNotHidden) {
  // The cloak only cancels u; a node pinned away from 0 still radiates.
  auto cfg = lattice(CloakMode::interior, Side::plus, 15);
  cfg.anomaly = Anomaly::pinned({lattice_center_id(15, 15)}, {5.0});
  auto ex = run_lattice_experiment(cfg);
  EXPECT_GT(ex.result.metrics.outside_error, 1e-3);
}

TEST(Cloak, CurrentsAreLinearInTheField) {
  auto p = small_random(8, 50);
  auto split = split_laplacian(p.graph, p.pou);
  auto green = assemble_green(split);
  const auto b = split.layout.range(Region::B);
  Eigen::VectorXd f1 = Eigen::VectorXd::LinSpaced(b.size(), 0.0, 1.0);
  Eigen::VectorXd f2 = Eigen::VectorXd::LinSpaced(b.size(), 2.0, -1.0);
  NodeField u1 = solve_full_dirichlet(split, f1), u2 = solve_full_dirichlet(split, f2);
  for (Side v : {Side::plus, Side::minus}) {
    auto a = interior_cloak(split, green, u1, v).plan.currents;
    auto c = interior_cloak(split, green, u2, v).plan.currents;
    auto s = interior_cloak(split, green, 2.0 * u1 - u2, v).plan.currents;
    EXPECT_LE(relative_residual(s, Eigen::VectorXd(2.0 * a - c)), 1e-12);
  }
}

TEST(Cloak, RandomGraphInteriorCloak) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto p = small_random(seed, 80);
    auto admissible = anomaly_admissible_nodes(p.graph);
    if (admissible.empty()) continue;
    const auto b = p.graph.layout().range(Region::B);
    Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(b.size(), -1.0, 3.0);
    for (Side v : {Side::plus, Side::minus}) {
      auto ex = run_cloak_experiment(p, f, CloakMode::interior, v, Anomaly::pinned({p.graph.id(admissible[0])}, {0.0}));
      EXPECT_LE(ex.metrics.outside_error, 1e-10) << "seed " << seed;
      EXPECT_TRUE(ex.metrics.support_exact);
    }
  }
}

TEST(Cloak, AnomalyValidation) {
  auto p = build_lattice(15, 15);
  auto split = split_laplacian(p.graph, p.pou);
  const auto& lay = p.graph.layout();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(lay.size(Region::B));
  auto run = [&](const Anomaly& a) { apply_anomaly(p.graph, split, a, f); };
  const NodeId on_boundary = p.graph.id(lay.boundary().begin);
  expect_error(ErrorKind::AnomalyOutsideInterior, [&] { run(Anomaly::pinned({on_boundary}, {0.0})); });
  // An Ω⁻ node next to ∂Ω.
  auto near = closed_neighborhood(p.graph, lay.boundary().to_set());
  NodeId touching = -1;
  for (Index i : near)
    if (lay.region_of(i) == Region::OmegaMinus) touching = p.graph.id(i);
  ASSERT_GE(touching, 0);
  expect_error(ErrorKind::AnomalyTouchesCloak, [&] { run(Anomaly::source({touching}, {1.0})); });
  expect_error(ErrorKind::AnomalyOutsideInterior, [&] { run(Anomaly::pinned({touching}, {1.0})); });
  const NodeId c = lattice_center_id(15, 15);
  expect_error(ErrorKind::DimensionMismatch, [&] { run(Anomaly::pinned({c}, {})); });
  expect_error(ErrorKind::UnknownNode, [&] { run(Anomaly::pinned({99999}, {0.0})); });
  Anomaly a;
  a.kind = AnomalyKind::conductivity_change;
  a.edges = {{c, c + 16, 2.0}};
  expect_error(ErrorKind::InvalidInput, [&] { run(a); });
  a.edges = {{c, c + 1, -1.0}};
  expect_error(ErrorKind::NonPositiveConductance, [&] { run(a); });
  a.kind = AnomalyKind::topology_change;
  a.edges = {{c, c + 1, 1.0}};
  expect_error(ErrorKind::DuplicateEdge, [&] { run(a); });
  NodeField injected = NodeField::Zero(lay.num_nodes());
  injected[0] = 1.0;
  expect_error(ErrorKind::SourceOnB,
               [&] { apply_anomaly(p.graph, split, Anomaly::pinned({c}, {0.0}), f, &injected); });
}

TEST(Cloak, ExteriorNeedsGroundedField) {
  auto p = build_lattice(15, 15);
  auto split = split_laplacian(p.graph, p.pou);
  auto green = assemble_green(split);
  NodeField u = NodeField::Ones(split.layout.num_nodes());
  expect_error(ErrorKind::HypothesisViolated, [&] { exterior_cloak(split, green, u, Side::plus); });
}
