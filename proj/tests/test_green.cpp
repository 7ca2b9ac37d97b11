#include "support.hpp"

using namespace gptest;

TEST(Green, PathMatchesHandInverse) {
  auto p = path_problem();
  auto split = split_laplacian(p.graph, p.pou);
  auto G = assemble_green(split);
  Eigen::MatrixXd want(4, 4);
  want << 0, 0, 0, 0, 0, 1, 1, 1, 0, 1, 2, 2, 0, 1, 2, 3;
  EXPECT_LE(max_abs_diff(G.matrix(), want), 1e-12);
  // The oracle agrees with the hand values too.
  EXPECT_LE(max_abs_diff(from_dense(oracle_green(p.graph)), want), 1e-14);
}

TEST(Green, AgreesWithGaussJordanOracle) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto p = small_random(seed, 20 + 10 * static_cast<Index>(seed));
    auto split = split_laplacian(p.graph, p.pou);
    auto G = assemble_green(split);
    Eigen::MatrixXd oracle = from_dense(oracle_green(p.graph));
    EXPECT_LE(max_abs_diff(G.matrix(), oracle), 1e-10 * oracle.cwiseAbs().maxCoeff()) << "seed " << seed;
    EXPECT_EQ(G.matrix(), G.matrix().transpose());
    // Inverse of an irreducible-or-not M-matrix block: entrywise nonnegative.
    EXPECT_GE(G.matrix().minCoeff(), -1e-12);
  }
}

TEST(Green, FactorOnlyApplyMatchesDense) {
  auto p = small_random(3, 50);
  auto split = split_laplacian(p.graph, p.pou);
  auto dense = GreenOperator::assemble(split, GreenOperator::Storage::dense);
  auto lazy = GreenOperator::assemble(split, GreenOperator::Storage::factor_only);
  EXPECT_FALSE(lazy.has_dense());
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  Eigen::VectorXd phi(split.layout.num_nodes());
  for (Index i = 0; i < phi.size(); ++i) phi[i] = normal(rng);
  EXPECT_LE((dense.apply(phi) - lazy.apply(phi)).cwiseAbs().maxCoeff(), 1e-12);
  // B entries of φ are ignored and B entries of Gφ are zero.
  auto b = split.layout.range(Region::B);
  EXPECT_TRUE(lazy.apply(phi).segment(b.begin, b.size()).isZero(0.0));
  expect_error(ErrorKind::InvalidInput, [&] { lazy.matrix(); });
}

TEST(Green, SourceProblemSolvesHomogeneousDirichlet) {
  auto p = small_random(11, 45);
  auto split = split_laplacian(p.graph, p.pou);
  auto G = assemble_green(split);
  const auto vo = split.layout.interior_nodes();
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(split.layout.num_nodes());
  phi.segment(vo.begin, vo.size()).setLinSpaced(vo.size(), -1.0, 2.0);
  Eigen::VectorXd u = solve_source_problem(G, phi);
  Eigen::VectorXd r = split.L * u - phi;
  EXPECT_LE(r.segment(vo.begin, vo.size()).cwiseAbs().maxCoeff(), 1e-11);
  phi[0] = 1.0;
  expect_error(ErrorKind::SourceOnB, [&] { solve_source_problem(G, phi); });
}

TEST(Green, PseudoinverseInvertsGOnInterior) {
  auto p = small_random(4, 30);
  auto split = split_laplacian(p.graph, p.pou);
  auto G = assemble_green(split);
  Eigen::MatrixXd P = green_pseudoinverse(split);
  const auto& g = G.matrix();
  EXPECT_LE(max_abs_diff(g * P * g, g), 1e-10 * g.cwiseAbs().maxCoeff());
  EXPECT_LE(max_abs_diff(P * g * P, P), 1e-10 * P.cwiseAbs().maxCoeff());
  const auto vo = split.layout.interior_nodes();
  Eigen::MatrixXd pg = P * g;
  EXPECT_LE(max_abs_diff(pg.block(vo.begin, vo.begin, vo.size(), vo.size()), Eigen::MatrixXd::Identity(vo.size(), vo.size())), 1e-10);
}
