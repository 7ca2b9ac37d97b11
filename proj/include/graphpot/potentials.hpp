#pragma once

// Trace operators, single/double layer potentials and the reproduction formulas.

#include <cmath>
#include <span>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "graphpot/graph.hpp"
#include "graphpot/green.hpp"

namespace graphpot {

using NodeField = Eigen::VectorXd;        // indexed by all nodes, fixed order
using BoundaryDensity = Eigen::VectorXd;  // indexed by ∂Ω nodes, fixed order

struct TraceOperators {
  Eigen::MatrixXd gamma0;        // R_∂Ω
  Eigen::MatrixXd gamma1_plus;   // -R_∂Ω L(σ⁺)
  Eigen::MatrixXd gamma1_minus;  // +R_∂Ω L(σ⁻)

  const Eigen::MatrixXd& gamma1(Side s) const { return s == Side::plus ? gamma1_plus : gamma1_minus; }
};

inline TraceOperators trace_operators(const SplitLaplacian& split) {
  const auto bd = split.layout.boundary();
  TraceOperators t;
  t.gamma0 = Eigen::MatrixXd::Zero(bd.size(), split.layout.num_nodes());
  t.gamma0.middleCols(bd.begin, bd.size()).setIdentity();
  t.gamma1_plus = -split.L_plus.middleRows(bd.begin, bd.size());
  t.gamma1_minus = split.L_minus.middleRows(bd.begin, bd.size());
  return t;
}

// ‖(L(σ)u)|_X‖∞
inline double harmonic_residual(const SplitLaplacian& split, const NodeField& u, std::span<const Index> nodes) {
  double worst = 0.0;
  for (Index x : nodes) worst = std::max(worst, std::abs(split.L.row(x).dot(u)));
  return worst;
}

inline double harmonic_residual(const SplitLaplacian& split, const NodeField& u, IndexRange nodes) {
  if (nodes.empty()) return 0.0;
  return (split.L.middleRows(nodes.begin, nodes.size()) * u).lpNorm<Eigen::Infinity>();
}

struct LayerPotentials {
  Eigen::MatrixXd single;        // 𝒮 = G γ₀ᵀ
  Eigen::MatrixXd double_plus;   // 𝒟⁺ = G (γ₁⁺)ᵀ
  Eigen::MatrixXd double_minus;  // 𝒟⁻ = G (γ₁⁻)ᵀ

  const Eigen::MatrixXd& double_layer(Side s) const { return s == Side::plus ? double_plus : double_minus; }
};

inline LayerPotentials layer_potentials(const GreenOperator& green, const TraceOperators& traces) {
  LayerPotentials p;
  p.single = green.apply(Eigen::MatrixXd(traces.gamma0.transpose()));
  p.double_plus = green.apply(Eigen::MatrixXd(traces.gamma1_plus.transpose()));
  p.double_minus = green.apply(Eigen::MatrixXd(traces.gamma1_minus.transpose()));
  return p;
}

enum class ReproductionFormula { interior_plus, interior_minus, exterior_plus, exterior_minus };

constexpr std::string_view to_string(ReproductionFormula f) {
  switch (f) {
    case ReproductionFormula::interior_plus: return "interior_plus";
    case ReproductionFormula::interior_minus: return "interior_minus";
    case ReproductionFormula::exterior_plus: return "exterior_plus";
    case ReproductionFormula::exterior_minus: return "exterior_minus";
  }
  return "?";
}

// Which Neumann trace a formula uses, its overall sign, the node set it
// reproduces, and its hypothesis (harmonic set, and u|_B = 0 or not).
struct FormulaTraits {
  Side side;
  double sign;
  IndexRange reproduced;
  IndexRange harmonic;
  bool zero_on_b;
};

inline FormulaTraits formula_traits(ReproductionFormula f, const Layout& lay) {
  using R = Region;
  switch (f) {
    case ReproductionFormula::interior_plus:
      return {Side::plus, 1.0, lay.range(R::Boundary, R::OmegaMinus), lay.range(R::Boundary, R::OmegaMinus), false};
    case ReproductionFormula::interior_minus:
      return {Side::minus, 1.0, lay.range(R::OmegaMinus), lay.range(R::OmegaMinus), false};
    case ReproductionFormula::exterior_plus:
      return {Side::plus, -1.0, lay.range(R::B, R::OmegaPlus), lay.range(R::OmegaPlus), true};
    case ReproductionFormula::exterior_minus:
      return {Side::minus, -1.0, lay.range(R::B, R::Boundary), lay.range(R::OmegaPlus, R::Boundary), true};
  }
  fail(ErrorKind::InvalidInput, "unknown reproduction formula");
}

enum class HypothesisCheck { checked, unchecked };

inline constexpr double kHypothesisTolerance = 1e-8;

namespace detail {
// Scale for residuals of L u: max row sum of |L| times ‖u‖∞.
inline double laplacian_scale(const Eigen::MatrixXd& L, const Eigen::VectorXd& u) {
  return L.cwiseAbs().rowwise().sum().maxCoeff() * u.lpNorm<Eigen::Infinity>();
}
}  // namespace detail

// Throws HypothesisViolated unless u satisfies the formula's hypothesis to
// `tol` relative.
inline void check_hypothesis(const SplitLaplacian& split, const NodeField& u, ReproductionFormula f,
                             double tol = kHypothesisTolerance) {
  auto t = formula_traits(f, split.layout);
  const double scale = detail::laplacian_scale(split.L, u);
  const double res = harmonic_residual(split, u, t.harmonic);
  if (res > tol * scale) {
    fail(ErrorKind::HypothesisViolated, std::string(to_string(f)) + ": L u is not zero on the required set (residual " +
                                            std::to_string(res) + ")");
  }
  if (t.zero_on_b) {
    auto b = split.layout.range(Region::B);
    double ub = u.segment(b.begin, b.size()).lpNorm<Eigen::Infinity>();
    if (ub > tol * u.lpNorm<Eigen::Infinity>()) {
      fail(ErrorKind::HypothesisViolated, std::string(to_string(f)) + ": u is not zero on B");
    }
  }
}

// ±(𝒮 γ₁^s u − 𝒟^s γ₀ u); equals u on the formula's reproduced set and zero
// elsewhere when the hypothesis holds.
inline NodeField reproduce(const SplitLaplacian& split, const LayerPotentials& potentials,
                           const TraceOperators& traces, const NodeField& u, ReproductionFormula formula,
                           HypothesisCheck check = HypothesisCheck::checked, double tol = kHypothesisTolerance) {
  if (u.size() != split.layout.num_nodes()) fail(ErrorKind::DimensionMismatch, "field length != |V|");
  if (check == HypothesisCheck::checked) check_hypothesis(split, u, formula, tol);
  auto t = formula_traits(formula, split.layout);
  NodeField out = potentials.single * (traces.gamma1(t.side) * u) - potentials.double_layer(t.side) * (traces.gamma0 * u);
  return t.sign * out;
}

// [R_∂ΩᵀR_∂Ω, L(σ^side)] u. Supported on 𝒩(∂Ω)∖Ω∓ (edges of zero σ^side
// do not count) with exact zeros elsewhere.
inline NodeField commutator_current(const SplitLaplacian& split, const NodeField& u, Side side) {
  const auto bd = split.layout.boundary();
  const auto& Ls = split.side(side);
  NodeField out = NodeField::Zero(u.size());
  out.segment(bd.begin, bd.size()) = Ls.middleRows(bd.begin, bd.size()) * u;
  // L R_∂ΩᵀR_∂Ω u only involves the ∂Ω columns.
  out -= Ls.middleCols(bd.begin, bd.size()) * u.segment(bd.begin, bd.size());
  return out;
}

// ψ with Gψ equal to the formula's left-hand side, i.e. the currents that
// generate the reproduced field.
inline NodeField reproduction_current(const SplitLaplacian& split, const NodeField& u, ReproductionFormula formula) {
  auto t = formula_traits(formula, split.layout);
  NodeField c = commutator_current(split, u, t.side);
  return t.side == Side::plus ? NodeField(-t.sign * c) : NodeField(t.sign * c);
}

// 𝒩(∂Ω)∖Ω∓ with adjacency read off the nonzero pattern of L(σ^side).
inline NodeSet injection_nodes(const SplitLaplacian& split, Side side) {
  const auto bd = split.layout.boundary();
  const auto& Ls = split.side(side);
  NodeSet out;
  for (Index x = 0; x < split.layout.num_nodes(); ++x) {
    if (bd.contains(x)) {
      out.push_back(x);
      continue;
    }
    for (Index y = bd.begin; y < bd.end; ++y) {
      if (Ls(x, y) != 0.0) {
        out.push_back(x);
        break;
      }
    }
  }
  return out;
}

// Solve L[F,F] u_F = −L[F,F̄] u_F̄ for the free set F, keeping the other
// entries of `u` fixed. Makes u harmonic (w.r.t. `L`) on F.
inline NodeField harmonic_extension(const Eigen::MatrixXd& L, std::span<const Index> free_nodes, NodeField u) {
  const Index n = L.rows();
  std::vector<char> is_free(static_cast<std::size_t>(n), 0);
  for (Index i : free_nodes) is_free[static_cast<std::size_t>(i)] = 1;
  std::vector<Index> fixed;
  for (Index i = 0; i < n; ++i) {
    if (!is_free[static_cast<std::size_t>(i)]) fixed.push_back(i);
  }
  std::vector<Index> f(free_nodes.begin(), free_nodes.end());
  if (f.empty()) return u;
  Eigen::MatrixXd Lff = L(f, f);
  Eigen::VectorXd rhs = -(L(f, fixed) * u(fixed));
  Eigen::LLT<Eigen::MatrixXd> llt(Lff);
  if (llt.info() != Eigen::Success) fail(ErrorKind::FactorizationFailure, "free block is not positive definite");
  Eigen::VectorXd solved = llt.solve(rhs);
  u(f) = solved;
  return u;
}

inline NodeField harmonic_extension(const Eigen::MatrixXd& L, IndexRange free_nodes, NodeField u) {
  auto set = free_nodes.to_set();
  return harmonic_extension(L, set, std::move(u));
}

}  // namespace graphpot
