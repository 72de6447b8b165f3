#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "relugeom/core_geometry.hpp"
#include "relugeom/partition.hpp"
#include "relugeom/relu_layer.hpp"

namespace relugeom {

/// The scalar output map L(y) = w.y + c of a binary classifier.
struct OutputLayer {
  Vector weights;
  double bias = 0.0;

  double evaluate(const Vector& y) const;
};

/// Negates L when its bias is positive so that bias < 0. The zero set is
/// unchanged. Throws DegenerateBias when bias == 0 (the origin lies on ker L).
OutputLayer normalize_output_layer(const OutputLayer& output);

/// The domain hyperplane {x : n.x + c = 0} with n = A^T w, c = w.b + bias.
struct PulledBackHyperplane {
  Vector normal;
  double offset = 0.0;

  double evaluate(const Vector& x) const { return normal.dot(x) + offset; }
};

PulledBackHyperplane pull_back_hyperplane(const AffineMap& affine, const OutputLayer& output);

/// Where the hyperplane meets the lines x_0 + t a_i*.
struct IntersectionValues {
  Vector t;
  /// Number of negative entries among the non-degenerate ones.
  int m = 0;
  /// Weight i is negligible: the hyperplane is parallel to line i.
  std::vector<bool> degenerate;

  bool any_degenerate() const;
};

/// Relative threshold for |w_i| below which direction i is degenerate.
inline constexpr double kDegenerateWeightTol = 1e-10;

/// t_i = -bias / w_i of a normalized output layer. Throws AllNegative when no
/// t_i is positive (the boundary would be empty) and DegenerateBias for a
/// zero bias. Degenerate entries are flagged and set to +inf.
IntersectionValues intersection_values(const OutputLayer& normalized);

/// max_i |n.(x_0 + t_i a_i*) + c| / (1 + |c|) over non-degenerate i.
double intersection_residual(const ReluLayer& layer, const OutputLayer& normalized,
                             const IntersectionValues& values);

enum class Curvature { Convex, Saddle };
const char* to_string(Curvature c);

/// Data shared by every piece of one boundary.
struct BoundaryContext {
  Vector apex;
  Matrix duals;
  Vector t;
};

/**
 * One linear piece: the preimage of ker(L) intersected with codomain sector
 * (J, {}). Points have the form
 *   x_0 + sum_{j in J} alpha_j a_j* - sum_{i not in J} lambda_i a_i*
 * with alpha_j > 0, sum alpha_j / t_j = 1 and lambda_i >= 0.
 */
struct BoundaryPiece {
  IndexMask j = 0;
  /// Members of J with negative intersection value.
  IndexMask j_negative = 0;
  /// The intersection with the hyperplane is bounded (no negative t in J).
  bool bounded = false;
  std::shared_ptr<const BoundaryContext> context;

  bool empty() const { return j == j_negative; }
  int dim() const { return static_cast<int>(context->apex.size()); }
  /// Indices (0-based) of the recession generators -a_i*.
  IndexMask recession() const { return full_mask(dim()) & ~j; }
};

/// The affine map M(x) = x_0 + A^{-1} D Q_sigma x carrying the canonical
/// boundary with the same m onto a given boundary.
struct CanonicalReduction {
  int m = 0;
  /// sigma[i] = original (0-based) index placed at sorted position i.
  std::vector<int> sigma;
  /// D_ii = |t_i|, indexed by original index.
  Vector scaling;
  AffineMap map = AffineMap::identity(1);
  double rcond = 0.0;

  /// sigma(J) for a canonical piece index set J.
  IndexMask map_piece(IndexMask canonical_j) const;
};

struct DecisionBoundary {
  int d = 0;
  std::vector<BoundaryPiece> pieces;
  int m = 0;
  std::uint64_t piece_count = 0;
  Curvature curvature = Curvature::Convex;
  OutputLayer output;
  IntersectionValues values;
  PulledBackHyperplane hyperplane;
  CanonicalReduction canonical;
};

/// L(T(x)).
double shallow_output(const ReluLayer& layer, const OutputLayer& output, const Vector& x);

/// Enumerates every non-empty piece in graded-lex order of J. Requires a
/// square layer; throws DegenerateDirection, AllNegative, DegenerateBias,
/// RankDeficient (canonical map) and Overflow for d > 20.
DecisionBoundary enumerate_pieces(const ReluLayer& layer, const OutputLayer& output);

/// Counts pieces by building a witness point for each J from geometrically
/// computed intersection values and checking it with the network itself.
std::uint64_t piece_count_oracle(const ReluLayer& layer, const OutputLayer& output);

/// Sign-change sampling of the boundary along random segments.
struct SampledPieceCount {
  /// Distinct active sets J seen at located boundary points.
  std::vector<IndexMask> labels;
  /// Number of distinct local gradients at located boundary points.
  int gradient_clusters = 0;
  std::vector<Vector> points;
};

SampledPieceCount sampled_piece_count(const ReluLayer& layer, const OutputLayer& output,
                                      int segments, std::mt19937_64& rng);

/// Points of a piece. Negative-t coefficients are |t| Exp(1); the positive-t
/// coefficients split the remaining budget by normalized Exp(1) weights;
/// recession coefficients are uniform on [0, radius]. Throws EmptyPiece.
std::vector<Vector> sample_piece(const BoundaryPiece& piece, int n, double radius,
                                 std::mt19937_64& rng);

/// True iff x lies on the piece up to `tol` in dual coordinates.
bool piece_contains(const BoundaryPiece& piece, const Vector& x, double tol = 1e-7);

/// Recession generators shared by two pieces (0-based mask).
inline IndexMask shared_generators(const BoundaryPiece& a, const BoundaryPiece& b) {
  return a.recession() & b.recession();
}

/// A = I, b = 0 and L with intersection values -1 (i <= m), +1 (i > m).
/// Throws InvalidM unless 0 <= m < d.
std::pair<ReluLayer, OutputLayer> canonical_network(int d, int m);
DecisionBoundary canonical_boundary(int d, int m);

CanonicalReduction canonical_reduction(const ReluLayer& layer, const OutputLayer& output);

/// Two shallow boundaries of the same dimension are affinely equivalent iff
/// they share m. Throws DimensionMismatch for different dimensions.
bool equivalence_check(const DecisionBoundary& a, const DecisionBoundary& b);

}  // namespace relugeom
