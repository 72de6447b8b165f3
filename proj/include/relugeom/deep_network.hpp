#pragma once

#include <optional>
#include <random>
#include <vector>

#include "relugeom/core_geometry.hpp"
#include "relugeom/decision_boundary.hpp"
#include "relugeom/relu_layer.hpp"

namespace relugeom {

/// F(x) = L(T_N(...T_1(x)...)). Widths must be non-increasing.
class ReluNetwork {
 public:
  ReluNetwork(std::vector<ReluLayer> layers, OutputLayer output);

  int depth() const { return static_cast<int>(layers_.size()); }
  Eigen::Index in_dim() const { return layers_.front().in_dim(); }
  const std::vector<ReluLayer>& layers() const { return layers_; }
  /// Layer k, 1-based.
  const ReluLayer& layer(int k) const { return layers_.at(static_cast<std::size_t>(k - 1)); }
  const OutputLayer& output() const { return output_; }

  double evaluate(const Vector& x) const;
  /// L(T_N(...T_k(x)...)), 1-based k; x lives in the input space of layer k.
  double evaluate_from(int k, const Vector& x) const;
  /// T_n(...T_1(x)...) for the first n layers.
  Vector forward(const Vector& x, int n) const;

 private:
  std::vector<ReluLayer> layers_;
  OutputLayer output_;
};

/**
 * The rewrite F = L~ o pi~_N o ... o pi~_1, where pi~_k is the cone
 * projection of the composed affine map A_b^(k) o ... o A_b^(1) and
 * L~ = L o A~_b^(N).
 */
struct ComposedAffine {
  std::vector<AffineMap> per_layer;
  std::vector<DualFrame> frames;
  /// L~ as a 1 x d_in affine map.
  AffineMap final_affine = AffineMap::identity(1);

  double evaluate(const Vector& x) const;
};

/// Throws RankDeficient carrying the failing depth when a composed map
/// loses row rank.
ComposedAffine canonical_structure(const ReluNetwork& net);

struct FiberProvenance {
  /// Index of the parent sample at level k + 1.
  int parent = -1;
  /// Position inside the parent's fiber.
  int fiber_id = 0;
  /// Coefficients of the free generators -a_i* used for this point.
  std::vector<double> coefficients;
};

/// Verified samples of the level-k boundary {x : L o T_N o ... o T_k (x) = 0}.
/// Level N + 1 samples live in the codomain of the last layer.
struct BoundarySampleSet {
  int level = 0;
  std::vector<Vector> points;
  std::vector<FiberProvenance> provenance;
  std::vector<double> residuals;
};

/// Points of ker(L) on the faces (J, {}) of the closed orthant, n per
/// non-empty face: the level N + 1 seed of the recursion.
BoundarySampleSet seed_output_samples(const ReluNetwork& net, int per_face,
                                      std::mt19937_64& rng);

/// Coordinates at or above -kOrthantTol count as inside the closed orthant.
inline constexpr double kOrthantTol = 1e-9;

/// Pulls level k + 1 samples back through layer k: drops points outside the
/// closed orthant, then emits min(16, 4^zeros) fiber samples per point with
/// Exp(1) coefficients. Throws EmptyIntersection when nothing survives.
BoundarySampleSet pull_back_boundary(const ReluNetwork& net, int k,
                                     const BoundarySampleSet& samples, std::mt19937_64& rng);

struct RecursionResult {
  /// levels[0] is the seed (level N + 1), levels.back() the lowest level reached.
  std::vector<BoundarySampleSet> levels;
  /// First level whose orthant intersection came out empty, if any.
  std::optional<int> empty_level;
};

/// Runs the recursion from the output hyperplane down to level 1, stopping
/// at the first empty level.
RecursionResult pull_back_all(const ReluNetwork& net, int per_face, std::mt19937_64& rng);

struct MixingReport {
  double min_distance = 0.0;
  bool mixed = false;
  /// The distance is a finite-sample surrogate for disjointness.
  double threshold = 0.0;
};

/// Pushes both sets through `prefix`, applies the next layer's cone
/// projection, and compares the minimum pairwise distance with `tol`.
MixingReport mixing_check(const std::vector<ReluLayer>& prefix, const std::vector<Vector>& x1,
                          const std::vector<Vector>& x2, const ReluLayer& next,
                          double tol = 1e-9);

}  // namespace relugeom
