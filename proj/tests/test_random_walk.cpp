#include "support.hpp"

using namespace gptest;

namespace {

// q = q̂ + Σ_y p(y,·) q(y) on 𝒱°, q = q̂ on B, solved with Gauss-Jordan.
Eigen::VectorXd oracle_charges(const PartitionedGraph& g, const Eigen::VectorXd& q_hat) {
  const auto n = static_cast<std::size_t>(g.num_nodes());
  std::vector<double> c(n, 0.0);
  for (const auto& e : g.edges()) {
    c[e.a] += e.sigma;
    c[e.b] += e.sigma;
  }
  Dense M(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) M[i][i] = 1.0;
  const auto b = g.layout().range(Region::B);
  for (const auto& e : g.edges()) {
    // Flow y → x enters row x unless x absorbs.
    if (!b.contains(e.b)) M[e.b][e.a] -= e.sigma / c[e.a];
    if (!b.contains(e.a)) M[e.a][e.b] -= e.sigma / c[e.b];
  }
  Dense rhs(n, std::vector<double>(1));
  for (std::size_t i = 0; i < n; ++i) rhs[i][0] = q_hat[static_cast<Index>(i)];
  return from_dense(multiply(gauss_jordan_inverse(M), rhs));
}

WalkModel path_model() {
  auto p = path_problem();
  return walk_model(p.graph, {3}, vec({0, 0, 0, 1}));
}

}  // namespace

TEST(Walks, PathTransitionModel) {
  auto m = path_model();
  EXPECT_EQ(m.c, vec({1, 2, 2, 1}));
  Eigen::MatrixXd p(4, 4);
  p << 0, 1, 0, 0, 0.5, 0, 0.5, 0, 0, 0.5, 0, 0.5, 0, 0, 1, 0;
  EXPECT_LE(max_abs_diff(m.transition(), p), 1e-15);
  EXPECT_TRUE(m.absorbing[0]);
  EXPECT_FALSE(m.absorbing[3]);
}

TEST(Walks, PathExpectedCharges) {
  auto p = path_problem();
  auto m = path_model();
  NodeField q = expected_charge_exact(p.graph, m);
  EXPECT_LE(max_abs_diff(q, vec({0, 2, 4, 3})), 1e-12);
  EXPECT_LE(max_abs_diff(oracle_charges(p.graph, m.q_hat), q), 1e-12);
  EXPECT_LE(recursion_residual(m, q), 1e-12);
}

TEST(Walks, ExactChargesMatchRecursionOracle) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto p = small_random(seed, 40);
    const auto& g = p.graph;
    // Charges on B and a few interior nodes.
    Eigen::VectorXd q_hat = Eigen::VectorXd::Zero(g.num_nodes());
    const auto b = g.layout().range(Region::B);
    q_hat.segment(b.begin, b.size()).setLinSpaced(b.size(), 0.5, 2.0);
    q_hat[g.num_nodes() - 1] = -1.5;
    q_hat[b.end] = 0.75;
    auto m = walk_model(g, charge_support(q_hat), q_hat);
    NodeField q = expected_charge_exact(g, m);
    EXPECT_LE(relative_residual(q, oracle_charges(g, q_hat)), 1e-10);
    EXPECT_LE(recursion_residual(m, q), 1e-10 * q.cwiseAbs().maxCoeff());
  }
}

TEST(Walks, BoundaryChargesReproduceDirichletSolution) {
  auto p = small_random(4, 50);
  auto split = split_laplacian(p.graph, p.pou);
  const auto b = split.layout.range(Region::B);
  Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(b.size(), 1.0, 2.0);
  Eigen::VectorXd q_hat = boundary_charges(p.graph, f);
  auto m = walk_model(p.graph, charge_support(q_hat), q_hat);
  NodeField u = expected_charge_exact(p.graph, m).cwiseQuotient(m.c);
  EXPECT_LE(relative_residual(u, solve_full_dirichlet(split, f)), 1e-10);
}

TEST(Walks, MonteCarloConvergesOnPath) {
  auto p = path_problem();
  auto m = path_model();
  WalkOptions opt;
  opt.walks = 200000;
  auto est = simulate_walks(m, opt);
  Eigen::VectorXd q = vec({0, 2, 4, 3});
  EXPECT_LE(relative_error(q, est.q_tilde), 0.02);
  // B is never charged: walks stop on arrival.
  EXPECT_EQ(est.q_tilde[0], 0.0);
  // Every walk starts at node 3 and deposits there first.
  EXPECT_GE(est.q_tilde[3], 1.0);
}

TEST(Walks, DeterministicAcrossWorkerCounts) {
  auto p = small_random(6, 60);
  Eigen::VectorXd q_hat = boundary_charges(p.graph, Eigen::VectorXd::Ones(p.graph.layout().size(Region::B)));
  auto m = walk_model(p.graph, charge_support(q_hat), q_hat);
  WalkOptions opt;
  opt.walks = 5000;
  opt.seed = 7;
  auto one = simulate_walks(m, opt);
  opt.workers = 4;
  auto four = simulate_walks(m, opt);
  EXPECT_TRUE(one.q_tilde == four.q_tilde);
  EXPECT_TRUE(simulate_walks(m, opt).q_tilde == four.q_tilde);
  opt.seed = 8;
  EXPECT_FALSE(simulate_walks(m, opt).q_tilde == four.q_tilde);
}

TEST(Walks, FramesAccumulateToTheFullRun) {
  auto m = path_model();
  WalkOptions opt;
  opt.walks = 10000;
  opt.workers = 2;
  auto frames = simulate_walk_frames(m, opt, 7);
  ASSERT_EQ(frames.size(), 7u);
  for (std::size_t k = 1; k < frames.size(); ++k) EXPECT_GT(frames[k].walks, frames[k - 1].walks);
  EXPECT_EQ(frames.back().walks, opt.walks);
  auto full = simulate_walks(m, opt);
  EXPECT_LE(relative_residual(frames.back().q_tilde, full.q_tilde), 1e-13);
  expect_error(ErrorKind::InvalidInput, [&] { simulate_walk_frames(m, opt, 0); });
}

TEST(Walks, InputErrors) {
  auto p = path_problem();
  expect_error(ErrorKind::InvalidInput, [&] { walk_model(p.graph, {}, vec({0, 0, 0, 1})); });
  expect_error(ErrorKind::InvalidInput, [&] { walk_model(p.graph, {2}, vec({0, 0, 0, 1})); });
  expect_error(ErrorKind::DimensionMismatch, [&] { walk_model(p.graph, {3}, vec({0, 1})); });
  auto m = path_model();
  WalkOptions opt;
  opt.walks = 0;
  expect_error(ErrorKind::InvalidInput, [&] { simulate_walks(m, opt); });
  opt.walks = 1000;
  opt.max_steps = 1;
  expect_error(ErrorKind::NoAbsorption, [&] { simulate_walks(m, opt); });
  expect_error(ErrorKind::ZeroReference, [&] { relative_error(vec({0, 0}), vec({1, 1})); });
}

TEST(Walks, CloakRunsAreConsistent) {
  auto p = build_lattice(11, 11);
  const auto& lay = p.graph.layout();
  Eigen::VectorXd f = lattice_top_bottom_data(p.graph, 11, 11);
  WalkCloakOptions opt;
  opt.walks.walks = 20000;
  opt.frames = 3;
  auto r = cloak_via_walks(p, f, Side::plus, opt);
  // Exact fields add up, and the exact total vanishes on ∂Ω ∪ Ω⁻.
  EXPECT_LE(relative_residual(r.total.u, Eigen::VectorXd(r.background.u + r.cloak.u)), 1e-10);
  auto inside = lay.range(Region::Boundary, Region::OmegaMinus);
  EXPECT_LE(r.total.u.segment(inside.begin, inside.size()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(r.background.error, 0.2);
  EXPECT_EQ(r.cloak_frames.size(), 3u);
  // Same options, same numbers.
  auto again = cloak_via_walks(p, f, Side::plus, opt);
  EXPECT_TRUE(again.total.estimate.q_tilde == r.total.estimate.q_tilde);
}

TEST(Walks, ZeroDataGivesZeroFields) {
  auto p = build_lattice(11, 11);
  WalkCloakOptions opt;
  opt.walks.walks = 100;
  auto r = cloak_via_walks(p, Eigen::VectorXd::Zero(p.graph.layout().size(Region::B)), Side::minus, opt);
  EXPECT_TRUE(r.total.u.isZero(0.0));
  EXPECT_TRUE(r.total.estimate.u_tilde.isZero(0.0));
  EXPECT_EQ(r.total.error, 0.0);
}

TEST(Walks, ExteriorCloakByWalks) {
  auto p = build_lattice(11, 11);
  NodeField src = NodeField::Zero(p.graph.num_nodes());
  src[p.graph.index_of(lattice_center_id(11, 11))] = 1.0;
  WalkCloakOptions opt;
  opt.walks.walks = 20000;
  auto r = exterior_cloak_via_walks(p, src, Side::plus, opt);
  auto outside = p.graph.layout().range(Region::B, Region::OmegaPlus);
  EXPECT_LE(r.total.u.segment(outside.begin, outside.size()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_GT(r.background.u.segment(outside.begin, outside.size()).cwiseAbs().maxCoeff(), 1e-3);
}
