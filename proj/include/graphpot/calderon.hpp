#pragma once

// Boundary layer operators S, D, D′, H, the Calderón block C and projectors P±,
// plus residual reports for the jump relations and the operator identities.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "graphpot/potentials.hpp"

namespace graphpot {

inline constexpr double kIdentityTolerance = 1e-10;
inline constexpr double kHTolerance = 1e-10;

// Below this reference norm a residual is judged in absolute terms against
// kAbsoluteFloor instead of relative to the norm.
inline constexpr double kSmallReference = 1e-8;
inline constexpr double kAbsoluteFloor = 1e-12;

struct IdentityCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool relative = true;
  bool passed = false;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.passed; });
  }

  const IdentityCheck* find(std::string_view name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  void append(const IdentityReport& other) { checks.insert(checks.end(), other.checks.begin(), other.checks.end()); }

  // Record a scalar value that must not exceed `tolerance`.
  void add_value(std::string name, double value, double tolerance, bool relative = true) {
    checks.push_back({std::move(name), value, tolerance, relative, value <= tolerance});
  }

  // ‖A−B‖_F / max(‖A‖_F, ‖B‖_F), absolute when both norms are tiny.
  template <class A, class B>
  void add(std::string name, const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b,
           double tolerance = kIdentityTolerance) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) fail(ErrorKind::DimensionMismatch, name + ": shape mismatch");
    const double ref = std::max(a.norm(), b.norm());
    const double diff = (a - b).norm();
    if (ref < kSmallReference) {
      checks.push_back({std::move(name), diff, kAbsoluteFloor, false, diff <= kAbsoluteFloor});
    } else {
      double r = diff / ref;
      checks.push_back({std::move(name), r, tolerance, true, r <= tolerance});
    }
  }
};

template <class A, class B>
double relative_residual(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  const double ref = std::max(a.norm(), b.norm());
  const double diff = (a - b).norm();
  return ref < kSmallReference ? diff : diff / ref;
}

struct BoundaryOperatorSet {
  Eigen::MatrixXd S;
  Eigen::MatrixXd D;
  Eigen::MatrixXd D_adj;  // D′, the Neumann-Poincaré operator
  Eigen::MatrixXd H;
  Eigen::MatrixXd C;        // [[−D, S], [H, D′]]
  Eigen::MatrixXd P_plus;   // I/2 − C
  Eigen::MatrixXd P_minus;  // I/2 + C
  double h_disagreement = 0.0;

  Index size() const { return S.rows(); }
};

inline BoundaryOperatorSet boundary_operators(const TraceOperators& traces, const LayerPotentials& potentials,
                                              double h_tolerance = kHTolerance) {
  BoundaryOperatorSet ops;
  const auto& g0 = traces.gamma0;
  ops.S = g0 * potentials.single;
  // S is symmetric in exact arithmetic (a block of G).
  ops.S = 0.5 * (ops.S + ops.S.transpose()).eval();
  ops.D = 0.5 * g0 * (potentials.double_plus + potentials.double_minus);
  ops.D_adj = 0.5 * (traces.gamma1_plus + traces.gamma1_minus) * potentials.single;
  ops.H = -traces.gamma1_plus * potentials.double_minus;
  Eigen::MatrixXd h_other = -traces.gamma1_minus * potentials.double_plus;
  ops.h_disagreement = relative_residual(ops.H, h_other);
  const double allowed = ops.H.norm() < kSmallReference && h_other.norm() < kSmallReference ? kAbsoluteFloor : h_tolerance;
  if (ops.h_disagreement > allowed) {
    fail(ErrorKind::HDisagreement, "-γ₁⁺𝒟⁻ and -γ₁⁻𝒟⁺ differ by " + std::to_string(ops.h_disagreement));
  }

  const Index m = ops.S.rows();
  ops.C.resize(2 * m, 2 * m);
  ops.C << -ops.D, ops.S, ops.H, ops.D_adj;
  const Eigen::MatrixXd half = 0.5 * Eigen::MatrixXd::Identity(2 * m, 2 * m);
  ops.P_minus = half + ops.C;
  ops.P_plus = half - ops.C;
  return ops;
}

struct CalderonProjectors {
  Eigen::MatrixXd P_minus;
  Eigen::MatrixXd P_plus;
};

inline CalderonProjectors calderon_projectors(const BoundaryOperatorSet& ops) { return {ops.P_minus, ops.P_plus}; }

inline IdentityReport verify_jump_relations(const TraceOperators& traces, const LayerPotentials& potentials,
                                            const BoundaryOperatorSet& ops, double tol = kIdentityTolerance) {
  const Index m = ops.size();
  const Eigen::MatrixXd half = 0.5 * Eigen::MatrixXd::Identity(m, m);
  IdentityReport r;
  r.add("jump: gamma1_plus S = -I/2 + D'", traces.gamma1_plus * potentials.single, -half + ops.D_adj, tol);
  r.add("jump: gamma1_minus S = I/2 + D'", traces.gamma1_minus * potentials.single, half + ops.D_adj, tol);
  r.add("jump: gamma0 D_plus = -I/2 + D", traces.gamma0 * potentials.double_plus, -half + ops.D, tol);
  r.add("jump: gamma0 D_minus = I/2 + D", traces.gamma0 * potentials.double_minus, half + ops.D, tol);
  r.add("jump: gamma1_plus D_minus = gamma1_minus D_plus", traces.gamma1_plus * potentials.double_minus,
        traces.gamma1_minus * potentials.double_plus, tol);
  return r;
}

inline IdentityReport verify_operator_identities(const BoundaryOperatorSet& ops, double tol = kIdentityTolerance) {
  const Index m = ops.size();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2 * m, 2 * m);
  IdentityReport r;
  r.add("D' = D^T", ops.D_adj, ops.D.transpose(), tol);
  r.add("C^2 = I/4", ops.C * ops.C, 0.25 * I2, tol);
  r.add("P_minus^2 = P_minus", ops.P_minus * ops.P_minus, ops.P_minus, tol);
  r.add("P_plus^2 = P_plus", ops.P_plus * ops.P_plus, ops.P_plus, tol);
  r.add("P_plus + P_minus = I", ops.P_plus + ops.P_minus, I2, tol);
  r.add("SH = -D^2 + I/4", ops.S * ops.H, -ops.D * ops.D + 0.25 * I, tol);
  r.add("HS = -D'^2 + I/4", ops.H * ops.S, -ops.D_adj * ops.D_adj + 0.25 * I, tol);
  r.add("SD' = DS", ops.S * ops.D_adj, ops.D * ops.S, tol);
  r.add("D'H = HD", ops.D_adj * ops.H, ops.H * ops.D, tol);
  const Eigen::MatrixXd sd = ops.S * ops.D_adj;
  r.add("SD' symmetric", sd, sd.transpose(), tol);
  return r;
}

}  // namespace graphpot
