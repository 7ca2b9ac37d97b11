#pragma once

// Shared fixtures and assertions for the unit tests.

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace gptest {

// 0 - 1 - 2 - 3 with B={0}, Ω⁺={1}, ∂Ω={2}, Ω⁻={3}, unit conductances.
inline ProblemGraph path_problem(double fraction = 0.5) {
  auto g = build_graph({0, 1, 2, 3}, {{0}, {1}, {2}, {3}}, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
  auto pou = make_partition_of_unity(g, classify_edges(g), fraction);
  return {std::move(g), std::move(pou)};
}

inline ProblemGraph small_random(std::uint64_t seed, Index nodes = 40, bool random_pou = true) {
  RandomGraphSpec spec;
  spec.nodes = nodes;
  spec.seed = seed;
  spec.random_pou = random_pou;
  return random_graph(spec);
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  EXPECT_EQ(a.rows(), b.rows());
  EXPECT_EQ(a.cols(), b.cols());
  return (a - b).cwiseAbs().maxCoeff();
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

template <class F>
void expect_error(ErrorKind kind, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(kind) << ", nothing thrown";
  } catch (const Error& e) {
    EXPECT_EQ(to_string(e.kind()), to_string(kind)) << e.what();
  }
}

}  // namespace gptest
