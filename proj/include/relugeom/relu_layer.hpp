#pragma once

#include <optional>
#include <random>
#include <vector>

#include "relugeom/core_geometry.hpp"
#include "relugeom/partition.hpp"

namespace relugeom {

/// Codomain entries at or below this magnitude are treated as exact zeros.
inline constexpr double kCodomainZeroTol = 1e-9;

/// T(x) = ReLU(Ax + b) together with the dual frame of its affine part.
class ReluLayer {
 public:
  explicit ReluLayer(AffineMap affine, double min_rcond = kMinRcond);

  const AffineMap& affine() const { return affine_; }
  const DualFrame& frame() const { return frame_; }
  Eigen::Index in_dim() const { return affine_.in_dim(); }
  Eigen::Index out_dim() const { return affine_.out_dim(); }

  Vector evaluate(const Vector& x) const;

  /// Cone projection pi: expand in the duals, drop the negative
  /// coefficients, re-sum. Lands in the closed cone over (I, {}).
  Vector project_to_cone(const Vector& x) const;

  /// |T(x) - A_b(pi(x))|_inf.
  double decompose_residual(const Vector& x) const;

 private:
  AffineMap affine_;
  DualFrame frame_;
};

/// T maps sector (I+, I-) onto the codomain sector (I+, {}).
SectorIndex image_of_sector(const SectorIndex& s);

/**
 * The preimage of a codomain point y >= 0:
 *   { base - sum_{i in free} mu_i a_i* + w : mu_i >= 0, w in V-perp }.
 * The V-perp part is present only for contracting layers.
 */
struct PreimageSet {
  Vector target;
  Vector base;
  /// 0-based indices i with y_i = 0; the generators are -a_i*.
  std::vector<int> free_indices;
  /// Columns -a_i* for i in free_indices.
  Matrix generators;
  /// Orthonormal V-perp basis (zero columns for square layers).
  Matrix kernel;
  /// Codomain sector (plus(y), {}).
  SectorIndex source_sector;

  /// Affine dimension of the set.
  Eigen::Index dimension() const { return generators.cols() + kernel.cols(); }
};

/// std::nullopt when y has a strictly negative component.
std::optional<PreimageSet> preimage_of_point(const ReluLayer& layer, const Vector& y,
                                             double zero_tol = kCodomainZeroTol);

/// Sectors (J, K), K within I \ J, whose union is the preimage of (J, {}).
std::vector<SectorIndex> preimage_of_sector(int d, IndexMask j);

/// True iff x admits the parametric form of `pre`: its dual coefficients
/// match y on plus(y) and are non-positive elsewhere.
bool membership_oracle(const ReluLayer& layer, const PreimageSet& pre, const Vector& x,
                       double tol = 1e-6);

/// Samples with generator coefficients radius * Exp(1) and, for contracting
/// layers, kernel coefficients radius * N(0, 1).
std::vector<Vector> sample_preimage(const PreimageSet& pre, int n, double radius,
                                    std::mt19937_64& rng);

}  // namespace relugeom
