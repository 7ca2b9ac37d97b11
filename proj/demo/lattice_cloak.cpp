// Interior cloak on a 20x20 lattice: a grounded node in the middle, hidden
// from the outside by currents injected around the cloak boundary.

#include <cstdio>

#include "graphpot/graphpot.hpp"

using namespace graphpot;

namespace {

void print_map(const char* title, const ProblemGraph& p, const NodeField& u, Index rows, Index cols) {
  std::printf("%s\n", title);
  for (Index r = rows - 1; r >= 0; --r) {
    for (Index c = 0; c < cols; ++c) std::printf("%5.2f", u[p.graph.index_of(lattice_node_id(cols, r, c))]);
    std::printf("\n");
  }
}

}  // namespace

int main() {
  LatticeExperimentConfig cfg;
  for (Side variant : {Side::plus, Side::minus}) {
    cfg.variant = variant;
    auto ex = run_lattice_experiment(cfg);
    const auto& m = ex.result.metrics;
    std::printf("variant %-5s  outside error %.2e  cancellation %.2e  support %s  %.3f s\n",
                std::string(to_string(variant)).c_str(), m.outside_error, m.cancel_error,
                m.support_exact ? "exact" : "leaks", m.seconds);
    if (variant == Side::plus) {
      print_map("background u", ex.problem, ex.result.u, cfg.rows, cfg.cols);
      print_map("anomalous u*", ex.problem, ex.result.u_star, cfg.rows, cfg.cols);
      print_map("cloaked u_tot", ex.problem, ex.result.u_tot, cfg.rows, cfg.cols);
    }
  }
}
