#pragma once

// Everything derived from one problem graph, and the full identity suite run
// against it.

#include <random>

#include "graphpot/np_spectrum.hpp"

namespace graphpot {

struct PotentialTheory {
  PartitionedGraph graph;
  SplitLaplacian split;
  GreenOperator green;
  TraceOperators traces;
  LayerPotentials potentials;
  BoundaryOperatorSet ops;
  SideConnectivity connectivity;

  static PotentialTheory build(const ProblemGraph& problem, double h_tolerance = kHTolerance) {
    PotentialTheory t{problem.graph, split_laplacian(problem.graph, problem.pou), {}, {}, {}, {}, {}};
    t.green = assemble_green(t.split);
    t.traces = trace_operators(t.split);
    t.potentials = layer_potentials(t.green, t.traces);
    t.ops = boundary_operators(t.traces, t.potentials, h_tolerance);
    t.connectivity = side_connectivity(t.graph, t.split);
    return t;
  }
};

// A field satisfying the hypothesis of `formula`: random where the formula
// leaves u free, harmonic extension on its harmonic set.
inline NodeField field_for_formula(const SplitLaplacian& split, ReproductionFormula formula, std::mt19937_64& rng) {
  const auto t = formula_traits(formula, split.layout);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  NodeField u(split.layout.num_nodes());
  for (Index i = 0; i < u.size(); ++i) u[i] = unit(rng);
  if (t.zero_on_b) {
    auto b = split.layout.range(Region::B);
    u.segment(b.begin, b.size()).setZero();
  }
  return harmonic_extension(split.L, t.harmonic, std::move(u));
}

struct SuiteOptions {
  double tolerance = kIdentityTolerance;
  std::uint64_t seed = 1;
  bool spectrum = true;
};

inline IdentityReport verify_identities(const PotentialTheory& t, const SuiteOptions& opt = {}) {
  IdentityReport r;
  const auto& split = t.split;
  const auto& lay = split.layout;
  const double tol = opt.tolerance;

  // Decomposition: exact by construction, and consistent with ∇ᵀdiag(σ)∇.
  const double decomposition_gap = (split.L - (split.L_plus + split.L_minus)).cwiseAbs().maxCoeff();
  r.add_value("L = L_plus + L_minus (exact)", decomposition_gap, 0.0, false);
  r.add("L = grad^T diag(sigma) grad", split.L, weighted_laplacian(t.graph, t.graph.sigma()), tol);

  // Flux: γ₁⁺ − γ₁⁻ = −R_∂Ω L.
  const auto bd = lay.boundary();
  const Eigen::MatrixXd flux = t.traces.gamma1_plus - t.traces.gamma1_minus + split.L.middleRows(bd.begin, bd.size());
  r.add_value("flux: gamma1_plus - gamma1_minus = -R L", flux.cwiseAbs().maxCoeff(), 1e-14, false);

  // Green operator: (L G)[𝒱°,𝒱°] = I.
  const auto vo = lay.interior_nodes();
  if (t.green.has_dense()) {
    const Eigen::MatrixXd lg = split.L.block(vo.begin, 0, vo.size(), lay.num_nodes()) *
                               t.green.matrix().middleCols(vo.begin, vo.size());
    r.add("green: (L G)[V°,V°] = I", lg, Eigen::MatrixXd::Identity(vo.size(), vo.size()), tol);
  }

  std::mt19937_64 rng(opt.seed);
  for (auto f : {ReproductionFormula::interior_plus, ReproductionFormula::interior_minus,
                 ReproductionFormula::exterior_plus, ReproductionFormula::exterior_minus}) {
    NodeField u = field_for_formula(split, f, rng);
    NodeField got = reproduce(split, t.potentials, t.traces, u, f);
    NodeField want = NodeField::Zero(u.size());
    auto x = formula_traits(f, lay).reproduced;
    want.segment(x.begin, x.size()) = u.segment(x.begin, x.size());
    r.add("reproduction: " + std::string(to_string(f)), got, want, tol);
  }

  r.append(verify_jump_relations(t.traces, t.potentials, t.ops, tol));
  r.append(verify_operator_identities(t.ops, tol));

  for (Side side : {Side::minus, Side::plus}) {
    auto rep = dtn_representations(t.ops, side);
    const std::string tag = side == Side::plus ? "lambda_plus" : "lambda_minus";
    r.add("dtn: " + tag + " (I/2+D')S^-1 = S^-1(I/2+D)", rep.left, rep.right, tol);
    r.add("dtn: " + tag + " (I/2+D')S^-1 = H form", rep.left, rep.hypersingular, tol);
    r.add("dtn: " + tag + " BIE = Schur complement", rep.left, dtn_schur(split, side), tol);
  }

  if (opt.spectrum) {
    auto spec = np_spectrum(t.ops, t.connectivity);
    r.append(verify_spectrum_bounds(spec, t.ops));
  }
  return r;
}

// Largest residual per identity name over many reports.
inline std::vector<IdentityCheck> worst_per_identity(const std::vector<IdentityReport>& reports) {
  std::vector<IdentityCheck> out;
  for (const auto& rep : reports) {
    for (const auto& c : rep.checks) {
      auto it = std::find_if(out.begin(), out.end(), [&](const IdentityCheck& o) { return o.name == c.name; });
      if (it == out.end()) {
        out.push_back(c);
      } else {
        if (c.residual > it->residual) {
          it->residual = c.residual;
          it->relative = c.relative;
          it->tolerance = c.tolerance;
        }
        it->passed = it->passed && c.passed;
      }
    }
  }
  return out;
}

}  // namespace graphpot
