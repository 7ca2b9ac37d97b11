#include "support.hpp"

using namespace gptest;

namespace {

// Interior ∂Ω nodes {2, 4} reach Ω⁻ only through separate edges, so 𝒢⁻ has
// two components.
ProblemGraph split_interior() {
  auto g = build_graph({0, 1, 2, 3, 4, 5}, {{0}, {1}, {2, 4}, {3, 5}},
                       {{0, 1, 1}, {1, 2, 1}, {1, 4, 1}, {2, 3, 1}, {4, 5, 1}});
  auto pou = make_partition_of_unity(g, classify_edges(g), 0.5);
  return {std::move(g), std::move(pou)};
}

// ∂Ω node 3 touches the exterior only through a ∂Ω-∂Ω edge with p⁺ = 0.
ProblemGraph split_exterior() {
  auto g = build_graph({0, 1, 2, 3, 4}, {{0}, {1}, {2, 3}, {4}},
                       {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}, {2, 4, 1}});
  auto pou = make_partition_of_unity(g, classify_edges(g), 0.0);
  return {std::move(g), std::move(pou)};
}

Eigen::VectorXd random_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = unit(rng);
  return v;
}

}  // namespace

TEST(Dirichlet, PathExample) {
  auto t = PotentialTheory::build(path_problem());
  NodeField u = solve_dirichlet(t.ops, t.potentials, vec({1}));
  EXPECT_LE(max_abs_diff(u, vec({0, 0.5, 1, 1})), 1e-12);
  EXPECT_LE(dirichlet_residual(t.split, u, vec({1}), ProblemSide::interior), 1e-12);
  EXPECT_LE(dirichlet_residual(t.split, u, vec({1}), ProblemSide::exterior), 1e-12);
}

TEST(Dirichlet, MatchesDirectSolvesOnBothSides) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto t = PotentialTheory::build(small_random(seed, 30 + 3 * static_cast<Index>(seed)));
    const auto& lay = t.split.layout;
    const auto bd = lay.boundary();
    Eigen::VectorXd f = random_vector(bd.size(), seed);
    NodeField u = solve_dirichlet(t.ops, t.potentials, f);
    EXPECT_LE(dirichlet_residual(t.split, u, f, ProblemSide::interior), 1e-10);
    EXPECT_LE(dirichlet_residual(t.split, u, f, ProblemSide::exterior), 1e-10);

    NodeField direct = NodeField::Zero(lay.num_nodes());
    direct.segment(bd.begin, bd.size()) = f;
    NodeField inner = harmonic_extension(t.split.L_minus, lay.range(Region::OmegaMinus), direct);
    NodeField outer = harmonic_extension(t.split.L_plus, lay.range(Region::OmegaPlus), direct);
    auto om = lay.range(Region::OmegaMinus);
    auto op = lay.range(Region::OmegaPlus);
    EXPECT_LE((u - inner).segment(om.begin, om.size()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((u - outer).segment(op.begin, op.size()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Dirichlet, FullProblem) {
  auto p = small_random(5, 40);
  auto split = split_laplacian(p.graph, p.pou);
  auto b = split.layout.range(Region::B);
  Eigen::VectorXd f = random_vector(b.size(), 1);
  NodeField u = solve_full_dirichlet(split, f);
  EXPECT_EQ(u.segment(b.begin, b.size()), f);
  EXPECT_LE(harmonic_residual(split, u, split.layout.interior_nodes()), 1e-12);
  expect_error(ErrorKind::DimensionMismatch, [&] { solve_full_dirichlet(split, Eigen::VectorXd::Zero(b.size() + 1)); });
}

TEST(Neumann, PathExteriorExample) {
  auto t = PotentialTheory::build(path_problem());
  NodeField u = solve_neumann_exterior(t.ops, t.potentials, vec({1}), t.connectivity);
  EXPECT_LE(max_abs_diff(u, vec({0, -1, -2, -2})), 1e-12);
  EXPECT_LE(neumann_residual(t.traces, u, vec({1}), ProblemSide::exterior), 1e-12);
}

TEST(Neumann, RoundTripsOnRandomGraphs) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto t = PotentialTheory::build(small_random(seed, 30 + 3 * static_cast<Index>(seed)));
    const auto& lay = t.split.layout;
    const Index n = lay.num_nodes();

    // Interior: v harmonic in Ω⁻, data γ₁⁻v, compared up to a constant.
    NodeField v = harmonic_extension(t.split.L_minus, lay.range(Region::OmegaMinus), random_vector(n, seed));
    Eigen::VectorXd g = t.traces.gamma1_minus * v;
    NodeField u = solve_neumann_interior(t.ops, t.potentials, lay, g, t.connectivity);
    auto keep = lay.range(Region::Boundary, Region::OmegaMinus);
    Eigen::VectorXd a = u.segment(keep.begin, keep.size());
    Eigen::VectorXd b = v.segment(keep.begin, keep.size());
    a.array() -= a.mean();
    b.array() -= b.mean();
    EXPECT_LE((a - b).norm() / b.norm(), 1e-8) << "seed " << seed;
    EXPECT_LE(std::abs(a.mean()), 1e-12);
    EXPECT_LE(neumann_residual(t.traces, u, g, ProblemSide::interior), 1e-8);

    // Exterior: w harmonic in Ω⁺ with w|_B = 0, data γ₁⁺w.
    NodeField w = random_vector(n, seed + 100);
    auto bset = lay.range(Region::B);
    w.segment(bset.begin, bset.size()).setZero();
    w = harmonic_extension(t.split.L, lay.range(Region::OmegaPlus), w);
    Eigen::VectorXd h = t.traces.gamma1_plus * w;
    NodeField x = solve_neumann_exterior(t.ops, t.potentials, h, t.connectivity);
    auto outer = lay.range(Region::B, Region::Boundary);
    EXPECT_LE((x - w).segment(outer.begin, outer.size()).norm() / w.segment(outer.begin, outer.size()).norm(), 1e-8);
    EXPECT_LE(neumann_residual(t.traces, x, h, ProblemSide::exterior), 1e-8);
  }
}

TEST(Neumann, IncompatibleInteriorDataRejected) {
  auto t = PotentialTheory::build(small_random(3, 40));
  Eigen::VectorXd g = Eigen::VectorXd::Ones(t.ops.size());
  expect_error(ErrorKind::IncompatibleData,
               [&] { solve_neumann_interior(t.ops, t.potentials, t.split.layout, g, t.connectivity); });
}

TEST(Neumann, DisconnectedSidesRejected) {
  auto a = PotentialTheory::build(split_interior());
  EXPECT_FALSE(a.connectivity.interior);
  EXPECT_TRUE(a.connectivity.exterior);
  expect_error(ErrorKind::InteriorDisconnected, [&] {
    solve_neumann_interior(a.ops, a.potentials, a.split.layout, vec({1, -1}), a.connectivity);
  });
  auto b = PotentialTheory::build(split_exterior());
  EXPECT_TRUE(b.connectivity.interior);
  EXPECT_FALSE(b.connectivity.exterior);
  expect_error(ErrorKind::ExteriorDisconnected,
               [&] { solve_neumann_exterior(b.ops, b.potentials, vec({1, 0}), b.connectivity); });
}

TEST(DtN, PathValues) {
  auto t = PotentialTheory::build(path_problem());
  auto maps = dtn_maps(t.ops);
  EXPECT_NEAR(maps.lambda_minus(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(maps.lambda_plus(0, 0), -0.5, 1e-12);
  EXPECT_NEAR(dtn_schur(t.split, Side::minus)(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(dtn_schur(t.split, Side::plus)(0, 0), -0.5, 1e-12);
}

TEST(DtN, RepresentationsAndSchurAgree) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto t = PotentialTheory::build(small_random(seed, 25 + 5 * static_cast<Index>(seed)));
    auto maps = dtn_maps(t.ops);
    EXPECT_LE(maps.max_disagreement, 1e-10);
    for (Side s : {Side::minus, Side::plus}) {
      EXPECT_LE(relative_residual(maps.lambda(s), dtn_schur(t.split, s)), 1e-10);
      EXPECT_LE(relative_residual(maps.lambda(s), maps.lambda(s).transpose()), 1e-10);
    }
    // Λ⁻ annihilates constants and is positive semidefinite; Λ⁺ is
    // negative definite with B grounded.
    const Index m = t.ops.size();
    EXPECT_LE((maps.lambda_minus * Eigen::VectorXd::Ones(m)).norm(), 1e-10 * maps.lambda_minus.norm() + 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(maps.lambda_minus), ep(maps.lambda_plus);
    EXPECT_GE(em.eigenvalues().minCoeff(), -1e-10 * maps.lambda_minus.norm());
    EXPECT_LT(ep.eigenvalues().maxCoeff(), 0.0);
    // Λ⁻ f is the interior Neumann trace of the Dirichlet solution.
    Eigen::VectorXd f = random_vector(m, seed);
    NodeField u = solve_dirichlet(t.ops, t.potentials, f);
    EXPECT_LE(relative_residual(Eigen::VectorXd(maps.lambda_minus * f), Eigen::VectorXd(t.traces.gamma1_minus * u)),
              1e-10);
    EXPECT_LE(relative_residual(Eigen::VectorXd(maps.lambda_plus * f), Eigen::VectorXd(t.traces.gamma1_plus * u)), 1e-10);
  }
}
