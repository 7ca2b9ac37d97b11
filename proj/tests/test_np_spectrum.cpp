#include "support.hpp"

using namespace gptest;

TEST(NPSpectrum, PathHasSingleEigenvalueMinusHalf) {
  auto t = PotentialTheory::build(path_problem());
  auto spec = np_spectrum(t.ops, t.connectivity);
  ASSERT_EQ(spec.eigenvalues.size(), 1);
  EXPECT_NEAR(spec.eigenvalues[0], -0.5, 1e-12);
  EXPECT_NEAR(np_kernel_vector(t.ops)[0], 0.5, 1e-12);
  EXPECT_TRUE(verify_spectrum_bounds(spec, t.ops).passed());
}

TEST(NPSpectrum, BoundsHoldOnRandomGraphs) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    auto t = PotentialTheory::build(small_random(seed, 15 + 4 * static_cast<Index>(seed)));
    ASSERT_TRUE(t.connectivity.interior && t.connectivity.exterior);
    auto spec = np_spectrum(t.ops, t.connectivity);
    auto report = verify_spectrum_bounds(spec, t.ops);
    for (const auto& c : report.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.residual << " seed " << seed;
    // Eigenvectors really are eigenvectors of D′.
    for (Index k = 0; k < spec.eigenvalues.size(); ++k) {
      Eigen::VectorXd v = spec.eigenvectors.col(k);
      EXPECT_LE((t.ops.D_adj * v - spec.eigenvalues[k] * v).norm(), 1e-9 * v.norm());
    }
  }
}

TEST(NPSpectrum, MinusHalfMultiplicityCountsInteriorComponents) {
  auto g = build_graph({0, 1, 2, 3, 4, 5}, {{0}, {1}, {2, 4}, {3, 5}},
                       {{0, 1, 1}, {1, 2, 1}, {1, 4, 1}, {2, 3, 1}, {4, 5, 1}});
  ProblemGraph p{g, make_partition_of_unity(g, classify_edges(g), 0.5)};
  auto t = PotentialTheory::build(p);
  ASSERT_FALSE(t.connectivity.interior);
  auto spec = np_spectrum(t.ops, t.connectivity);
  Index at = 0;
  for (double v : spec.eigenvalues) at += std::abs(v + 0.5) <= kEigenvalueThreshold ? 1 : 0;
  EXPECT_EQ(at, 2);
  auto report = verify_spectrum_bounds(spec, t.ops);
  EXPECT_EQ(report.find("np: exactly one eigenvalue at -1/2"), nullptr);
  EXPECT_TRUE(report.passed());
}

TEST(NPSpectrum, VectorAngle) {
  Eigen::VectorXd a = vec({1, 0});
  EXPECT_DOUBLE_EQ(vector_angle(a, vec({2, 0})), 0.0);
  EXPECT_DOUBLE_EQ(vector_angle(a, vec({-3, 0})), 0.0);
  EXPECT_NEAR(vector_angle(a, vec({0, 1})), std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(vector_angle(a, vec({1, 1e-12})), 1e-12, 1e-20);
}
