#pragma once

// Boundary-integral solvers for Dirichlet and Neumann problems on either side
// of ∂Ω, and Dirichlet-to-Neumann maps (three BIE forms and Schur complements).

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>

#include "graphpot/calderon.hpp"

namespace graphpot {

enum class ProblemSide { interior, exterior };

constexpr std::string_view to_string(ProblemSide s) { return s == ProblemSide::interior ? "interior" : "exterior"; }

// Interior problems live on 𝒢⁻ and use the − traces; exterior on 𝒢⁺.
constexpr Side trace_side(ProblemSide s) { return s == ProblemSide::interior ? Side::minus : Side::plus; }

inline constexpr double kCompatibilityTolerance = 1e-10;
inline constexpr double kRepresentationTolerance = 1e-10;

// Full Dirichlet problem: (L u)|_{𝒱°} = 0, u|_B = f.
inline NodeField solve_full_dirichlet(const SplitLaplacian& split, const Eigen::VectorXd& f_b) {
  const auto b = split.layout.range(Region::B);
  if (f_b.size() != b.size()) fail(ErrorKind::DimensionMismatch, "Dirichlet data must have one value per B node");
  NodeField u = NodeField::Zero(split.layout.num_nodes());
  u.segment(b.begin, b.size()) = f_b;
  return harmonic_extension(split.L, split.layout.interior_nodes(), std::move(u));
}

namespace detail {
inline Eigen::LLT<Eigen::MatrixXd> factor_single_layer(const BoundaryOperatorSet& ops) {
  Eigen::LLT<Eigen::MatrixXd> llt(ops.S);
  if (llt.info() != Eigen::Success) fail(ErrorKind::FactorizationFailure, "single layer operator is not SPD");
  return llt;
}
}  // namespace detail

// u = 𝒮 S⁻¹ f. The representation is the same for both sides; `side` only
// selects which residual is meaningful.
inline NodeField solve_dirichlet(const BoundaryOperatorSet& ops, const LayerPotentials& potentials,
                                 const BoundaryDensity& f) {
  if (f.size() != ops.size()) fail(ErrorKind::DimensionMismatch, "boundary data length != |∂Ω|");
  return potentials.single * detail::factor_single_layer(ops).solve(f);
}

// max of ‖(L(σ^side)u)|_{Ω^side}‖∞, ‖u|_∂Ω − f‖∞ and (exterior) ‖u|_B‖∞,
// relative to ‖f‖∞ (absolute if f = 0).
inline double dirichlet_residual(const SplitLaplacian& split, const NodeField& u, const BoundaryDensity& f,
                                 ProblemSide side) {
  const auto& lay = split.layout;
  const auto bd = lay.boundary();
  const auto region = lay.range(side == ProblemSide::interior ? Region::OmegaMinus : Region::OmegaPlus);
  const auto& Ls = split.side(trace_side(side));
  double res = (Ls.middleRows(region.begin, region.size()) * u).lpNorm<Eigen::Infinity>();
  res = std::max(res, (u.segment(bd.begin, bd.size()) - f).lpNorm<Eigen::Infinity>());
  if (side == ProblemSide::exterior) {
    const auto b = lay.range(Region::B);
    res = std::max(res, u.segment(b.begin, b.size()).lpNorm<Eigen::Infinity>());
  }
  const double scale = f.lpNorm<Eigen::Infinity>();
  return scale > 0.0 ? res / scale : res;
}

// ‖γ₁^∓u − g‖₂ / ‖g‖₂ (absolute when g = 0).
inline double neumann_residual(const TraceOperators& traces, const NodeField& u, const BoundaryDensity& g,
                               ProblemSide side) {
  double diff = (traces.gamma1(trace_side(side)) * u - g).norm();
  double scale = g.norm();
  return scale > 0.0 ? diff / scale : diff;
}

// Interior Neumann problem via (I/2 + D′)φ = g, minimum-norm solution, then
// shifted to zero mean over ∂Ω ∪ Ω⁻.
inline NodeField solve_neumann_interior(const BoundaryOperatorSet& ops, const LayerPotentials& potentials,
                                        const Layout& layout, const BoundaryDensity& g,
                                        const SideConnectivity& connectivity) {
  if (g.size() != ops.size()) fail(ErrorKind::DimensionMismatch, "Neumann data length != |∂Ω|");
  if (!connectivity.interior) fail(ErrorKind::InteriorDisconnected, "interior graph is not connected under σ⁻");
  const double allowed = std::max(kCompatibilityTolerance * g.norm(), kAbsoluteFloor);
  if (std::abs(g.sum()) > allowed) {
    fail(ErrorKind::IncompatibleData, "interior Neumann data must sum to zero (sum = " + std::to_string(g.sum()) + ")");
  }
  const Index m = ops.size();
  Eigen::MatrixXd A = 0.5 * Eigen::MatrixXd::Identity(m, m) + ops.D_adj;
  // Rank is m - 1 when 𝒢⁻ is connected; pin it rather than trusting the
  // default threshold. The threshold must be set before compute().
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m, m);
  cod.setThreshold(1e-10);
  cod.compute(A);
  Eigen::VectorXd phi = cod.solve(g);
  NodeField u = potentials.single * phi;
  const auto keep = layout.range(Region::Boundary, Region::OmegaMinus);
  u.array() -= u.segment(keep.begin, keep.size()).mean();
  return u;
}

// Exterior Neumann problem: u = 𝒮(−I/2 + D′)⁻¹ g.
inline NodeField solve_neumann_exterior(const BoundaryOperatorSet& ops, const LayerPotentials& potentials,
                                        const BoundaryDensity& g, const SideConnectivity& connectivity) {
  if (g.size() != ops.size()) fail(ErrorKind::DimensionMismatch, "Neumann data length != |∂Ω|");
  if (!connectivity.exterior) fail(ErrorKind::ExteriorDisconnected, "exterior graph is not connected under σ⁺");
  const Index m = ops.size();
  Eigen::MatrixXd A = -0.5 * Eigen::MatrixXd::Identity(m, m) + ops.D_adj;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  return potentials.single * lu.solve(g);
}

struct DtNMaps {
  Eigen::MatrixXd lambda_minus;
  Eigen::MatrixXd lambda_plus;
  // Largest pairwise relative disagreement among the three representations.
  double max_disagreement = 0.0;

  const Eigen::MatrixXd& lambda(Side s) const { return s == Side::plus ? lambda_plus : lambda_minus; }
};

// The three representations of Λ^± (sign s = ∓1 for ±):
//   (sI/2 + D′)S⁻¹,  S⁻¹(sI/2 + D),  sH + s(sI/2 + D′)S⁻¹(sI/2 + D).
struct DtNRepresentations {
  Eigen::MatrixXd left, right, hypersingular;
};

inline DtNRepresentations dtn_representations(const BoundaryOperatorSet& ops, Side side) {
  const Index m = ops.size();
  const double s = side == Side::plus ? -1.0 : 1.0;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
  auto llt = detail::factor_single_layer(ops);
  const Eigen::MatrixXd S_inv = llt.solve(I);
  const Eigen::MatrixXd a = s * 0.5 * I + ops.D_adj;
  const Eigen::MatrixXd b = s * 0.5 * I + ops.D;
  DtNRepresentations r;
  r.left = a * S_inv;
  r.right = llt.solve(b);
  r.hypersingular = s * ops.H + s * (a * llt.solve(b));
  return r;
}

inline DtNMaps dtn_maps(const BoundaryOperatorSet& ops, double tol = kRepresentationTolerance) {
  DtNMaps maps;
  for (Side side : {Side::minus, Side::plus}) {
    auto r = dtn_representations(ops, side);
    double worst = std::max({relative_residual(r.left, r.right), relative_residual(r.left, r.hypersingular),
                             relative_residual(r.right, r.hypersingular)});
    maps.max_disagreement = std::max(maps.max_disagreement, worst);
    if (worst > tol) {
      fail(ErrorKind::RepresentationMismatch,
           std::string("DtN representations disagree on side ") + std::string(to_string(side)) + " by " +
               std::to_string(worst));
    }
    (side == Side::plus ? maps.lambda_plus : maps.lambda_minus) = std::move(r.left);
  }
  return maps;
}

// ∓(L±[∂Ω,∂Ω] − L±[∂Ω,Ω±] L±[Ω±,Ω±]⁻¹ L±[Ω±,∂Ω]); B is grounded on the
// exterior side, so the exterior block is Ω⁺ alone.
inline Eigen::MatrixXd dtn_schur(const SplitLaplacian& split, Side side) {
  const auto& lay = split.layout;
  const auto& Ls = split.side(side);
  const auto bd = lay.boundary();
  const auto region = lay.range(side == Side::plus ? Region::OmegaPlus : Region::OmegaMinus);
  Eigen::MatrixXd schur = Ls.block(bd.begin, bd.begin, bd.size(), bd.size());
  if (!region.empty()) {
    Eigen::LLT<Eigen::MatrixXd> llt(Ls.block(region.begin, region.begin, region.size(), region.size()));
    if (llt.info() != Eigen::Success) {
      fail(ErrorKind::SingularInteriorBlock, std::string("L") + std::string(to_string(side)) + " block is singular");
    }
    const Eigen::MatrixXd coupling = Ls.block(region.begin, bd.begin, region.size(), bd.size());
    schur -= coupling.transpose() * llt.solve(coupling);
  }
  return side == Side::plus ? Eigen::MatrixXd(-schur) : schur;
}

}  // namespace graphpot
