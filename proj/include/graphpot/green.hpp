#pragma once

// Graph Green operator: G = R_{𝒱°}ᵀ L[𝒱°,𝒱°]⁻¹ R_{𝒱°}, zero on B rows/columns.

#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "graphpot/graph.hpp"

namespace graphpot {

class GreenOperator {
 public:
  enum class Storage { dense, factor_only };

  // Factor L[𝒱°,𝒱°] and, for Storage::dense, materialize G.
  static GreenOperator assemble(const SplitLaplacian& split, Storage storage = Storage::dense) {
    GreenOperator g;
    g.layout_ = split.layout;
    const auto vo = split.layout.interior_nodes();
    g.factor_.compute(split.L.block(vo.begin, vo.begin, vo.size(), vo.size()));
    if (g.factor_.info() != Eigen::Success) {
      fail(ErrorKind::FactorizationFailure, "L[V°,V°] is not positive definite (disconnected graph?)");
    }
    if (storage == Storage::dense) {
      const Index n = split.layout.num_nodes();
      Eigen::MatrixXd inv = g.factor_.solve(Eigen::MatrixXd::Identity(vo.size(), vo.size()));
      Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
      // Symmetrize: the triangular solves break symmetry at round-off level.
      G.block(vo.begin, vo.begin, vo.size(), vo.size()) = 0.5 * (inv + inv.transpose());
      g.dense_ = std::move(G);
    }
    return g;
  }

  const Layout& layout() const { return layout_; }
  bool has_dense() const { return dense_.has_value(); }

  const Eigen::MatrixXd& matrix() const {
    if (!dense_) fail(ErrorKind::InvalidInput, "Green operator was assembled without dense storage");
    return *dense_;
  }

  // Gφ for any φ; entries of φ on B are ignored (G has zero B columns).
  Eigen::VectorXd apply(const Eigen::VectorXd& phi) const {
    if (phi.size() != layout_.num_nodes()) fail(ErrorKind::DimensionMismatch, "field length != |V|");
    if (dense_) return *dense_ * phi;
    const auto vo = layout_.interior_nodes();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(layout_.num_nodes());
    u.segment(vo.begin, vo.size()) = factor_.solve(phi.segment(vo.begin, vo.size()));
    return u;
  }

  // G·M for a |V|×k block (used for layer potentials).
  Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const {
    if (m.rows() != layout_.num_nodes()) fail(ErrorKind::DimensionMismatch, "block row count != |V|");
    if (dense_) return *dense_ * m;
    const auto vo = layout_.interior_nodes();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(layout_.num_nodes(), m.cols());
    out.middleRows(vo.begin, vo.size()) = factor_.solve(m.middleRows(vo.begin, vo.size()));
    return out;
  }

  // Selected columns of G without materializing the rest.
  Eigen::MatrixXd columns(std::span<const Index> cols) const {
    Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(layout_.num_nodes(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) unit(cols[k], static_cast<Index>(k)) = 1.0;
    if (dense_) {
      Eigen::MatrixXd out(layout_.num_nodes(), static_cast<Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = dense_->col(cols[k]);
      return out;
    }
    return apply(unit);
  }

 private:
  Layout layout_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  std::optional<Eigen::MatrixXd> dense_;
};

inline GreenOperator assemble_green(const SplitLaplacian& split,
                                    GreenOperator::Storage storage = GreenOperator::Storage::dense) {
  return GreenOperator::assemble(split, storage);
}

// G† = R_{𝒱°}ᵀ L[𝒱°,𝒱°] R_{𝒱°}
inline Eigen::MatrixXd green_pseudoinverse(const SplitLaplacian& split) {
  const auto vo = split.layout.interior_nodes();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(split.L.rows(), split.L.cols());
  out.block(vo.begin, vo.begin, vo.size(), vo.size()) = split.L.block(vo.begin, vo.begin, vo.size(), vo.size());
  return out;
}

// u = Gφ, solving (Lu)|_{𝒱°} = φ|_{𝒱°}, u|_B = 0. φ must vanish on B.
inline Eigen::VectorXd solve_source_problem(const GreenOperator& green, const Eigen::VectorXd& phi) {
  const auto b = green.layout().range(Region::B);
  if (phi.size() != green.layout().num_nodes()) fail(ErrorKind::DimensionMismatch, "source length != |V|");
  if (!phi.segment(b.begin, b.size()).isZero(0.0)) fail(ErrorKind::SourceOnB, "source is non-zero on B");
  return green.apply(phi);
}

}  // namespace graphpot
