#include "relugeom/core_geometry.hpp"

#include <cmath>
#include <cstdio>
#include <string>

namespace relugeom {

namespace {

std::string dims(Eigen::Index rows, Eigen::Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

AffineMap::AffineMap(Matrix matrix, Vector offset)
    : matrix_(std::move(matrix)), offset_(std::move(offset)) {
  if (matrix_.rows() != offset_.size()) {
    throw GeometryError(ErrorCode::DimensionMismatch,
                        "affine map: matrix is " + dims(matrix_.rows(), matrix_.cols()) +
                            " but offset has length " + std::to_string(offset_.size()));
  }
  if (matrix_.rows() == 0 || matrix_.cols() == 0) {
    throw GeometryError(ErrorCode::DimensionMismatch, "affine map: empty matrix");
  }
}

AffineMap AffineMap::identity(Eigen::Index d) {
  return AffineMap(Matrix::Identity(d, d), Vector::Zero(d));
}

Vector AffineMap::evaluate(const Vector& x) const {
  if (x.size() != in_dim()) {
    throw GeometryError(ErrorCode::DimensionMismatch,
                        "affine map expects input of length " + std::to_string(in_dim()) +
                            ", got " + std::to_string(x.size()));
  }
  return matrix_ * x + offset_;
}

double AffineMap::row_value(Eigen::Index i, const Vector& x) const {
  return matrix_.row(i).dot(x) + offset_(i);
}

AffineMap AffineMap::then(const AffineMap& next) const {
  if (next.in_dim() != out_dim()) {
    throw GeometryError(ErrorCode::DimensionMismatch,
                        "cannot compose " + dims(out_dim(), in_dim()) + " with " +
                            dims(next.out_dim(), next.in_dim()));
  }
  return AffineMap(next.matrix() * matrix_, next.matrix() * offset_ + next.offset());
}

double reciprocal_condition(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return 0.0;
  Eigen::PartialPivLU<Matrix> lu(m);
  const double r = lu.rcond();
  return std::isfinite(r) ? r : 0.0;
}

DualFrame build_dual_frame(const AffineMap& layer, double min_rcond) {
  const Matrix& a = layer.matrix();
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  if (rows > cols) {
    throw GeometryError(ErrorCode::DimensionMismatch,
                        "expanding layer (" + dims(rows, cols) + ") has no dual basis");
  }

  DualFrame frame;
  if (rows == cols) {
    // Column-wise solve of A X = I; the columns of X are the duals.
    Eigen::PartialPivLU<Matrix> lu(a);
    frame.rcond_ = lu.rcond();
    if (!(frame.rcond_ >= min_rcond)) {
      throw GeometryError(ErrorCode::RankDeficient,
                          "layer matrix is singular to working precision (rcond=" +
                              short_double(frame.rcond_) + ")");
    }
    frame.duals_ = lu.solve(Matrix::Identity(rows, rows));
  } else {
    // A^T = Q R. The first `rows` columns of Q span V, the rest span V-perp,
    // and the duals A^T (A A^T)^{-1} reduce to Q_V R^{-T}.
    Eigen::HouseholderQR<Matrix> qr(a.transpose());
    const Matrix q = qr.householderQ() * Matrix::Identity(cols, cols);
    const Matrix r = qr.matrixQR().topLeftCorner(rows, rows).triangularView<Eigen::Upper>();
    frame.rcond_ = reciprocal_condition(r);
    if (!(frame.rcond_ >= min_rcond)) {
      throw GeometryError(ErrorCode::RankDeficient,
                          "contracting layer rows are dependent (rcond=" +
                              short_double(frame.rcond_) + ")");
    }
    const Matrix r_inv_t = r.transpose().triangularView<Eigen::Lower>().solve(
        Matrix::Identity(rows, rows));
    frame.row_span_basis_ = q.leftCols(rows);
    frame.complement_basis_ = q.rightCols(cols - rows);
    frame.duals_ = q.leftCols(rows) * r_inv_t;
  }
  if (!frame.duals_.allFinite()) {
    throw GeometryError(ErrorCode::RankDeficient, "dual basis is not finite");
  }
  frame.apex_ = -frame.duals_ * layer.offset();
  frame.duality_residual_ =
      (a * frame.duals_ - Matrix::Identity(rows, rows)).cwiseAbs().maxCoeff();
  frame.coordinate_solver_.compute(frame.duals_);
  return frame;
}

Vector DualFrame::coordinates(const Vector& x) const {
  if (x.size() != in_dim()) {
    throw GeometryError(ErrorCode::DimensionMismatch,
                        "point has length " + std::to_string(x.size()) + ", frame expects " +
                            std::to_string(in_dim()));
  }
  return coordinate_solver_.solve(x - apex_);
}

Vector DualFrame::reconstruct(const Vector& lambdas) const {
  if (lambdas.size() != out_dim()) {
    throw GeometryError(ErrorCode::DimensionMismatch, "coefficient vector has wrong length");
  }
  return apex_ + duals_ * lambdas;
}

Vector project_to_row_span(const DualFrame& frame, const Vector& x) {
  if (!frame.contracting()) {
    throw GeometryError(ErrorCode::NotContracting,
                        "row-span projection requested on a square frame");
  }
  if (x.size() != frame.in_dim()) {
    throw GeometryError(ErrorCode::DimensionMismatch, "point has wrong length");
  }
  const Matrix& v = *frame.row_span_basis();
  return v * (v.transpose() * x);
}

}  // namespace relugeom
