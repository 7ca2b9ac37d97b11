#pragma once

// Spectrum of the Neumann-Poincaré operator D′ through the symmetric
// generalized problem (SD′)v = λSv.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "graphpot/calderon.hpp"

namespace graphpot {

inline constexpr double kEigenvalueThreshold = 1e-9;

struct NPSpectrum {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // S-orthonormal columns
  SideConnectivity connectivity;
};

inline NPSpectrum np_spectrum(const BoundaryOperatorSet& ops, const SideConnectivity& connectivity) {
  Eigen::MatrixXd sd = ops.S * ops.D_adj;
  sd = 0.5 * (sd + sd.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(sd, ops.S, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) fail(ErrorKind::FactorizationFailure, "generalized eigensolve failed");
  return {solver.eigenvalues(), solver.eigenvectors(), connectivity};
}

// S⁻¹1, spanning the −1/2 eigenspace of D′ when 𝒢⁻ is connected.
inline BoundaryDensity np_kernel_vector(const BoundaryOperatorSet& ops) {
  Eigen::LLT<Eigen::MatrixXd> llt(ops.S);
  if (llt.info() != Eigen::Success) fail(ErrorKind::FactorizationFailure, "single layer operator is not SPD");
  return llt.solve(Eigen::VectorXd::Ones(ops.size()));
}

// Angle in radians between the lines spanned by v and w, taken from its sine
// so nearly parallel inputs stay accurate.
inline double vector_angle(const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
  const double vv = v.norm();
  const double ww = w.norm();
  if (vv == 0.0 || ww == 0.0) return std::numbers::pi / 2;
  Eigen::VectorXd a = v / vv;
  Eigen::VectorXd b = w / ww;
  if (a.dot(b) < 0.0) b = -b;
  double s = (a - b * a.dot(b)).norm();
  return std::asin(std::min(1.0, s));
}

struct SpectrumCheckOptions {
  double threshold = kEigenvalueThreshold;  // "equals ±1/2"
  double imag_tolerance = 1e-10;
  double agreement_tolerance = 1e-8;
  double angle_tolerance = 1e-8;
};

inline IdentityReport verify_spectrum_bounds(const NPSpectrum& spec, const BoundaryOperatorSet& ops,
                                             const SpectrumCheckOptions& opt = {}) {
  IdentityReport r;
  const auto& ev = spec.eigenvalues;
  const Index m = ev.size();

  Eigen::EigenSolver<Eigen::MatrixXd> direct(ops.D_adj, false);
  const Eigen::VectorXcd raw = direct.eigenvalues();
  double max_imag = raw.imag().cwiseAbs().maxCoeff();
  r.add_value("np: imaginary parts of direct eigensolve", max_imag, opt.imag_tolerance, false);
  std::vector<double> re(raw.real().begin(), raw.real().end());
  std::sort(re.begin(), re.end());
  double agree = 0.0;
  for (Index k = 0; k < m; ++k) agree = std::max(agree, std::abs(re[static_cast<std::size_t>(k)] - ev[k]));
  r.add_value("np: symmetric vs direct eigenvalues", agree, opt.agreement_tolerance, false);

  double outside = 0.0;
  for (Index k = 0; k < m; ++k) outside = std::max(outside, std::abs(ev[k]) - 0.5);
  r.add_value("np: eigenvalues within [-1/2, 1/2]", std::max(outside, 0.0), opt.threshold, false);

  auto count_near = [&](double target) {
    Index c = 0;
    for (Index k = 0; k < m; ++k) c += std::abs(ev[k] - target) <= opt.threshold ? 1 : 0;
    return c;
  };
  if (spec.connectivity.interior) {
    Index at_minus_half = count_near(-0.5);
    r.add_value("np: exactly one eigenvalue at -1/2", at_minus_half == 1 ? 0.0 : 1.0, 0.0, false);
    if (at_minus_half >= 1) {
      r.add_value("np: -1/2 eigenvector parallel to S^-1 1", vector_angle(spec.eigenvectors.col(0), np_kernel_vector(ops)),
                  opt.angle_tolerance, false);
    }
    // Everything else strictly inside (−1/2, 1/2).
    double gap = m > 1 ? ev[1] + 0.5 : 1.0;
    r.add_value("np: other eigenvalues above -1/2", gap > opt.threshold ? 0.0 : 1.0, 0.0, false);
  }
  if (spec.connectivity.exterior) {
    r.add_value("np: no eigenvalue at +1/2", static_cast<double>(count_near(0.5)), 0.0, false);
  }
  return r;
}

}  // namespace graphpot
