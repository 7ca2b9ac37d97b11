// The boundary operators of the smallest interesting graph, the path
// 0 - 1 - 2 - 3 with B = {0}, omega_plus = {1}, boundary = {2},
// omega_minus = {3} and unit conductances.

#include <iostream>

#include "graphpot/graphpot.hpp"

using namespace graphpot;

int main() {
  auto graph = build_graph({0, 1, 2, 3}, {{0}, {1}, {2}, {3}}, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
  ProblemGraph problem{graph, make_partition_of_unity(graph, classify_edges(graph), 0.5)};
  auto t = PotentialTheory::build(problem);
  Eigen::IOFormat fmt(Eigen::StreamPrecision, 0, " ", "\n", "  [", "]");
  std::cout << "G =\n" << t.green.matrix().format(fmt) << "\n";
  std::cout << "S = " << t.ops.S(0, 0) << ", D = " << t.ops.D(0, 0) << ", D' = " << t.ops.D_adj(0, 0)
            << ", H = " << t.ops.H(0, 0) << "\n";
  std::cout << "C =\n" << t.ops.C.format(fmt) << "\n";
  std::cout << "P_minus =\n" << t.ops.P_minus.format(fmt) << "\n";
  auto maps = dtn_maps(t.ops);
  std::cout << "lambda_minus = " << maps.lambda_minus(0, 0) << ", lambda_plus = " << maps.lambda_plus(0, 0) << "\n";
  auto report = verify_identities(t);
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "ok   " : "FAIL ") << c.name << "  " << c.residual << "\n";
  }
  return report.passed() ? 0 : 1;
}
