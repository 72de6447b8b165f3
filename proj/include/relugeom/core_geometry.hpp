#pragma once

#include <optional>

#include <Eigen/Dense>

#include "relugeom/error.hpp"

namespace relugeom {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Reciprocal condition estimates below this are treated as singular.
inline constexpr double kMinRcond = 1e-12;
/// Absolute floor applied to every relative tolerance.
inline constexpr double kAbsFloor = 1e-12;

/// Tolerance relative to a magnitude, never smaller than kAbsFloor.
inline double scaled_tol(double rel, double magnitude, double floor = kAbsFloor) {
  const double t = rel * magnitude;
  return t > floor ? t : floor;
}

/**
 * The affine map x -> Ax + b.
 *
 * Rows of the matrix are the hyperplane normals a_i; each row functional
 * a_i.x + b_i vanishes on one supporting hyperplane of the layer's cone.
 */
class AffineMap {
 public:
  AffineMap(Matrix matrix, Vector offset);

  static AffineMap identity(Eigen::Index d);

  Eigen::Index in_dim() const { return matrix_.cols(); }
  Eigen::Index out_dim() const { return matrix_.rows(); }
  const Matrix& matrix() const { return matrix_; }
  const Vector& offset() const { return offset_; }

  Vector evaluate(const Vector& x) const;
  /// Value of the i-th row functional a_i.x + b_i (0-based).
  double row_value(Eigen::Index i, const Vector& x) const;

  /// Returns `next` applied after `*this`.
  AffineMap then(const AffineMap& next) const;

 private:
  Matrix matrix_;
  Vector offset_;
};

/**
 * Dual basis of a layer: vectors a_i* with a_j . a_i* = delta_ij, anchored
 * at the apex x_0 where every row functional vanishes.
 *
 * For a contracting layer (fewer outputs than inputs) the duals and the
 * apex live in the row span V; the orthonormal complement basis spans
 * V-perp, the kernel of the matrix.
 */
class DualFrame {
 public:
  const Vector& apex() const { return apex_; }
  /// Dual vectors as columns (in_dim x out_dim).
  const Matrix& duals() const { return duals_; }
  Vector dual(Eigen::Index i) const { return duals_.col(i); }
  Eigen::Index in_dim() const { return duals_.rows(); }
  Eigen::Index out_dim() const { return duals_.cols(); }

  bool contracting() const { return row_span_basis_.has_value(); }
  /// Orthonormal basis of V as columns; contracting frames only.
  const std::optional<Matrix>& row_span_basis() const { return row_span_basis_; }
  /// Orthonormal basis of V-perp as columns; contracting frames only.
  const std::optional<Matrix>& complement_basis() const { return complement_basis_; }

  /// Reciprocal condition estimate of the system solved for the duals.
  double rcond() const { return rcond_; }
  /// max_ij |a_j . a_i* - delta_ij| measured at construction.
  double duality_residual() const { return duality_residual_; }

  /// Coefficients lambda with P_V(x) = x_0 + sum lambda_i a_i*.
  /// Solved against the dual basis, independent of the affine map.
  Vector coordinates(const Vector& x) const;
  /// x_0 + sum lambda_i a_i*.
  Vector reconstruct(const Vector& lambdas) const;

 private:
  friend DualFrame build_dual_frame(const AffineMap& layer, double min_rcond);
  DualFrame() = default;

  Vector apex_;
  Matrix duals_;
  std::optional<Matrix> row_span_basis_;
  std::optional<Matrix> complement_basis_;
  double rcond_ = 0.0;
  double duality_residual_ = 0.0;
  Eigen::ColPivHouseholderQR<Matrix> coordinate_solver_;
};

/// Builds the dual frame of a square or contracting layer.
/// Throws RankDeficient when the rows are dependent beyond `min_rcond`,
/// DimensionMismatch when the layer expands (out_dim > in_dim).
DualFrame build_dual_frame(const AffineMap& layer, double min_rcond = kMinRcond);

inline Vector evaluate_affine(const AffineMap& layer, const Vector& x) {
  return layer.evaluate(x);
}

/// Orthogonal projection onto the row span V. Throws NotContracting for
/// square frames, where V is the whole space.
Vector project_to_row_span(const DualFrame& frame, const Vector& x);

/// Reciprocal 1-norm condition estimate of a square matrix (0 if singular).
double reciprocal_condition(const Matrix& m);

}  // namespace relugeom
