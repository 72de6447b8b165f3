#include "relugeom/relu_layer.hpp"

#include <algorithm>
#include <string>

namespace relugeom {

ReluLayer::ReluLayer(AffineMap affine, double min_rcond)
    : affine_(std::move(affine)), frame_(build_dual_frame(affine_, min_rcond)) {}

Vector ReluLayer::evaluate(const Vector& x) const {
  return affine_.evaluate(x).cwiseMax(0.0);
}

Vector ReluLayer::project_to_cone(const Vector& x) const {
  const Vector lambdas = frame_.coordinates(x);
  return frame_.reconstruct(lambdas.cwiseMax(0.0));
}

double ReluLayer::decompose_residual(const Vector& x) const {
  return (evaluate(x) - affine_.evaluate(project_to_cone(x))).cwiseAbs().maxCoeff();
}

SectorIndex image_of_sector(const SectorIndex& s) { return SectorIndex(s.plus(), 0); }

std::optional<PreimageSet> preimage_of_point(const ReluLayer& layer, const Vector& y,
                                             double zero_tol) {
  if (y.size() != layer.out_dim()) {
    throw GeometryError(ErrorCode::DimensionMismatch,
                        "codomain point has length " + std::to_string(y.size()) +
                            ", layer outputs " + std::to_string(layer.out_dim()));
  }
  if ((y.array() < -zero_tol).any()) return std::nullopt;

  const DualFrame& frame = layer.frame();
  PreimageSet pre;
  pre.target = y;
  Vector coeffs = y;
  IndexMask plus = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) > zero_tol) {
      plus |= IndexMask{1} << i;
    } else {
      coeffs(i) = 0.0;
      pre.free_indices.push_back(static_cast<int>(i));
    }
  }
  // A_b^{-1}(y) restricted to V: x_0 + sum y_i a_i*.
  pre.base = frame.reconstruct(coeffs);
  pre.generators.resize(layer.in_dim(), static_cast<Eigen::Index>(pre.free_indices.size()));
  for (std::size_t k = 0; k < pre.free_indices.size(); ++k) {
    pre.generators.col(static_cast<Eigen::Index>(k)) = -frame.dual(pre.free_indices[k]);
  }
  pre.kernel = frame.complement_basis().value_or(Matrix(layer.in_dim(), 0));
  pre.source_sector = SectorIndex(plus, 0);
  return pre;
}

std::vector<SectorIndex> preimage_of_sector(int d, IndexMask j) {
  if (d < 1) throw GeometryError(ErrorCode::DimensionMismatch, "dimension must be positive");
  if (d > kMaxEnumerationDim) {
    throw GeometryError(ErrorCode::Overflow, "refusing to enumerate preimage sectors");
  }
  const IndexMask all = full_mask(d);
  if ((j & ~all) != 0) {
    throw GeometryError(ErrorCode::DimensionMismatch, "index set exceeds dimension");
  }
  const IndexMask rest = all & ~j;
  std::vector<SectorIndex> out;
  IndexMask k = rest;
  while (true) {
    out.emplace_back(j, k);
    if (k == 0) break;
    k = (k - 1) & rest;
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool membership_oracle(const ReluLayer& layer, const PreimageSet& pre, const Vector& x,
                       double tol) {
  if (x.size() != layer.in_dim()) return false;
  const Vector lambdas = layer.frame().coordinates(x);
  const double scale = 1.0 + pre.target.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    const bool is_free = (pre.source_sector.plus() >> i & 1) == 0;
    if (is_free) {
      if (lambdas(i) > tol * scale) return false;
    } else if (std::abs(lambdas(i) - pre.target(i)) > tol * scale) {
      return false;
    }
  }
  return true;
}

std::vector<Vector> sample_preimage(const PreimageSet& pre, int n, double radius,
                                    std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    Vector x = pre.base;
    for (Eigen::Index k = 0; k < pre.generators.cols(); ++k) {
      x += radius * expo(rng) * pre.generators.col(k);
    }
    for (Eigen::Index k = 0; k < pre.kernel.cols(); ++k) {
      x += radius * gauss(rng) * pre.kernel.col(k);
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace relugeom
