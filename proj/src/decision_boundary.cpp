#include "relugeom/decision_boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace relugeom {

double OutputLayer::evaluate(const Vector& y) const {
  if (y.size() != weights.size()) {
    throw GeometryError(ErrorCode::DimensionMismatch, "output layer input has wrong length");
  }
  return weights.dot(y) + bias;
}

OutputLayer normalize_output_layer(const OutputLayer& output) {
  if (output.bias == 0.0) {
    throw GeometryError(ErrorCode::DegenerateBias,
                        "output bias is zero: the origin lies on the output hyperplane");
  }
  if (output.bias > 0.0) return OutputLayer{-output.weights, -output.bias};
  return output;
}

PulledBackHyperplane pull_back_hyperplane(const AffineMap& affine, const OutputLayer& output) {
  if (output.weights.size() != affine.out_dim()) {
    throw GeometryError(ErrorCode::DimensionMismatch, "output weights do not match layer width");
  }
  return {affine.matrix().transpose() * output.weights,
          output.weights.dot(affine.offset()) + output.bias};
}

bool IntersectionValues::any_degenerate() const {
  return std::any_of(degenerate.begin(), degenerate.end(), [](bool b) { return b; });
}

IntersectionValues intersection_values(const OutputLayer& normalized) {
  if (normalized.bias == 0.0) {
    throw GeometryError(ErrorCode::DegenerateBias, "output bias is zero");
  }
  const Eigen::Index d = normalized.weights.size();
  const double threshold = kDegenerateWeightTol * normalized.weights.norm();
  IntersectionValues v;
  v.t.resize(d);
  v.degenerate.assign(static_cast<std::size_t>(d), false);
  bool any_positive = false;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double w = normalized.weights(i);
    if (std::abs(w) <= threshold) {
      v.degenerate[static_cast<std::size_t>(i)] = true;
      v.t(i) = std::numeric_limits<double>::infinity();
      continue;
    }
    v.t(i) = -normalized.bias / w;
    if (v.t(i) < 0.0) {
      ++v.m;
    } else {
      any_positive = true;
    }
  }
  if (!any_positive) {
    throw GeometryError(ErrorCode::AllNegative,
                        "every intersection value is negative: the boundary is empty");
  }
  return v;
}

double intersection_residual(const ReluLayer& layer, const OutputLayer& normalized,
                             const IntersectionValues& values) {
  const PulledBackHyperplane p = pull_back_hyperplane(layer.affine(), normalized);
  const DualFrame& frame = layer.frame();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < values.t.size(); ++i) {
    if (values.degenerate[static_cast<std::size_t>(i)]) continue;
    const Vector x = frame.apex() + values.t(i) * frame.dual(i);
    worst = std::max(worst, std::abs(p.evaluate(x)) / (1.0 + std::abs(p.offset)));
  }
  return worst;
}

const char* to_string(Curvature c) { return c == Curvature::Convex ? "convex" : "saddle"; }

double shallow_output(const ReluLayer& layer, const OutputLayer& output, const Vector& x) {
  return output.evaluate(layer.evaluate(x));
}

IndexMask CanonicalReduction::map_piece(IndexMask canonical_j) const {
  IndexMask out = 0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (canonical_j >> i & 1) out |= IndexMask{1} << sigma[i];
  }
  return out;
}

namespace {

void require_shallow(const ReluLayer& layer, const OutputLayer& output) {
  if (layer.in_dim() != layer.out_dim()) {
    throw GeometryError(ErrorCode::DimensionMismatch,
                        "shallow boundary analysis needs a square layer");
  }
  if (output.weights.size() != layer.out_dim()) {
    throw GeometryError(ErrorCode::DimensionMismatch, "output weights do not match layer width");
  }
  if (layer.out_dim() > kMaxEnumerationDim) {
    throw GeometryError(ErrorCode::Overflow, "refusing to enumerate 2^d boundary pieces");
  }
}

IntersectionValues checked_values(const OutputLayer& normalized) {
  IntersectionValues v = intersection_values(normalized);
  if (v.any_degenerate()) {
    throw GeometryError(ErrorCode::DegenerateDirection,
                        "output hyperplane is parallel to a dual line (zero output weight)");
  }
  return v;
}

IndexMask negative_mask(const Vector& t) {
  IndexMask m = 0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (t(i) < 0.0) m |= IndexMask{1} << i;
  }
  return m;
}

CanonicalReduction reduce(const DualFrame& frame, const IntersectionValues& v) {
  const Eigen::Index d = v.t.size();
  CanonicalReduction r;
  r.m = v.m;
  r.sigma.resize(static_cast<std::size_t>(d));
  std::iota(r.sigma.begin(), r.sigma.end(), 0);
  std::stable_sort(r.sigma.begin(), r.sigma.end(),
                   [&](int a, int b) { return v.t(a) < v.t(b); });
  r.scaling = v.t.cwiseAbs();
  Matrix linear(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const int s = r.sigma[static_cast<std::size_t>(i)];
    linear.col(i) = r.scaling(s) * frame.dual(s);
  }
  r.rcond = reciprocal_condition(linear);
  if (!(r.rcond >= kMinRcond)) {
    throw GeometryError(ErrorCode::RankDeficient, "canonical reduction map is singular");
  }
  r.map = AffineMap(std::move(linear), frame.apex());
  return r;
}

}  // namespace

CanonicalReduction canonical_reduction(const ReluLayer& layer, const OutputLayer& output) {
  require_shallow(layer, output);
  const OutputLayer normalized = normalize_output_layer(output);
  return reduce(layer.frame(), checked_values(normalized));
}

DecisionBoundary enumerate_pieces(const ReluLayer& layer, const OutputLayer& output) {
  require_shallow(layer, output);
  DecisionBoundary b;
  b.d = static_cast<int>(layer.out_dim());
  b.output = normalize_output_layer(output);
  b.values = checked_values(b.output);
  b.m = b.values.m;
  b.hyperplane = pull_back_hyperplane(layer.affine(), b.output);
  b.curvature = b.m == 0 ? Curvature::Convex : Curvature::Saddle;
  b.canonical = reduce(layer.frame(), b.values);

  auto context = std::make_shared<BoundaryContext>(
      BoundaryContext{layer.frame().apex(), layer.frame().duals(), b.values.t});
  const IndexMask negative = negative_mask(b.values.t);
  std::vector<IndexMask> subsets;
  for (IndexMask j = 1; j <= full_mask(b.d); ++j) {
    if ((j & ~negative) != 0) subsets.push_back(j);
  }
  std::stable_sort(subsets.begin(), subsets.end(), [](IndexMask a, IndexMask c) {
    return popcount(a) != popcount(c) ? popcount(a) < popcount(c) : a < c;
  });
  b.pieces.reserve(subsets.size());
  for (IndexMask j : subsets) {
    const IndexMask jn = j & negative;
    b.pieces.push_back(BoundaryPiece{j, jn, jn == 0, context});
  }
  b.piece_count = (std::uint64_t{1} << b.d) - (std::uint64_t{1} << b.m);
  return b;
}

std::uint64_t piece_count_oracle(const ReluLayer& layer, const OutputLayer& output) {
  require_shallow(layer, output);
  const DualFrame& frame = layer.frame();
  const int d = static_cast<int>(layer.out_dim());
  // Intersection values from the hyperplane geometry, not from the weights.
  const PulledBackHyperplane p = pull_back_hyperplane(layer.affine(), output);
  const double at_apex = p.evaluate(frame.apex());
  Vector t(d);
  for (int i = 0; i < d; ++i) t(i) = -at_apex / p.normal.dot(frame.dual(i));

  std::uint64_t count = 0;
  for (IndexMask j = 1; j <= full_mask(d); ++j) {
    std::vector<int> positive, negative;
    for (int i = 0; i < d; ++i) {
      if (!(j >> i & 1)) continue;
      (t(i) > 0.0 ? positive : negative).push_back(i);
    }
    // sum alpha/t = 1 with alpha > 0 needs a positive t in J.
    if (positive.empty()) continue;
    Vector alpha = Vector::Zero(d);
    for (int i : negative) alpha(i) = std::abs(t(i));
    const double budget = 1.0 + static_cast<double>(negative.size());
    for (int i : positive) alpha(i) = t(i) * budget / static_cast<double>(positive.size());
    const Vector witness = frame.reconstruct(alpha);

    const double f = shallow_output(layer, output, witness);
    const Vector hidden = layer.evaluate(witness);
    const double scale =
        1.0 + std::abs(output.bias) + output.weights.cwiseProduct(hidden).cwiseAbs().sum();
    const SectorIndex where = classify(frame, witness);
    if (std::abs(f) <= 1e-8 * scale && where == SectorIndex(j, 0)) ++count;
  }
  return count;
}

SampledPieceCount sampled_piece_count(const ReluLayer& layer, const OutputLayer& output,
                                      int segments, std::mt19937_64& rng) {
  require_shallow(layer, output);
  const DualFrame& frame = layer.frame();
  const Eigen::Index d = layer.out_dim();
  const OutputLayer normalized = normalize_output_layer(output);
  const IntersectionValues v = intersection_values(normalized);
  double reach = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!v.degenerate[static_cast<std::size_t>(i)]) reach = std::max(reach, std::abs(v.t(i)));
  }
  std::uniform_real_distribution<double> coord(-2.0 * reach, 2.0 * reach);
  auto f = [&](const Vector& x) { return shallow_output(layer, output, x); };

  SampledPieceCount result;
  std::vector<Vector> gradients;
  constexpr int kSubdivisions = 8;
  for (int s = 0; s < segments; ++s) {
    Vector c0(d), c1(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      c0(i) = coord(rng);
      c1(i) = coord(rng);
    }
    const Vector p0 = frame.reconstruct(c0);
    const Vector p1 = frame.reconstruct(c1);
    for (int k = 0; k < kSubdivisions; ++k) {
      Vector lo = p0 + (p1 - p0) * (static_cast<double>(k) / kSubdivisions);
      Vector hi = p0 + (p1 - p0) * (static_cast<double>(k + 1) / kSubdivisions);
      double flo = f(lo);
      if ((flo < 0.0) == (f(hi) < 0.0)) continue;
      for (int it = 0; it < 100; ++it) {
        const Vector mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      const Vector x = 0.5 * (lo + hi);
      const Vector lambdas = frame.coordinates(x);
      const double band = 1e-6 * (1.0 + lambdas.cwiseAbs().maxCoeff());
      if ((lambdas.array().abs() < band).any()) continue;  // too close to a sector wall

      const IndexMask label = classify_coefficients(lambdas, band).plus();
      if (std::find(result.labels.begin(), result.labels.end(), label) == result.labels.end()) {
        result.labels.push_back(label);
      }
      // Central differences stay inside the open sector at this step size.
      const double h = 1e-7 * (1.0 + x.norm());
      Vector g(d);
      for (Eigen::Index i = 0; i < d; ++i) {
        Vector e = Vector::Zero(d);
        e(i) = h;
        g(i) = (f(x + e) - f(x - e)) / (2.0 * h);
      }
      const bool known = std::any_of(gradients.begin(), gradients.end(), [&](const Vector& r) {
        return (r - g).norm() <= 1e-4 * (1.0 + r.norm());
      });
      if (!known) gradients.push_back(g);
      result.points.push_back(x);
    }
  }
  std::sort(result.labels.begin(), result.labels.end());
  result.gradient_clusters = static_cast<int>(gradients.size());
  return result;
}

std::vector<Vector> sample_piece(const BoundaryPiece& piece, int n, double radius,
                                 std::mt19937_64& rng) {
  if (!piece.context || piece.empty()) {
    throw GeometryError(ErrorCode::EmptyPiece, "cannot sample an empty piece");
  }
  const BoundaryContext& ctx = *piece.context;
  const int d = piece.dim();
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    Vector coeffs = Vector::Zero(d);
    double budget = 1.0;
    for (int i = 0; i < d; ++i) {
      if (piece.j_negative >> i & 1) {
        coeffs(i) = std::abs(ctx.t(i)) * expo(rng);
        budget += coeffs(i) / std::abs(ctx.t(i));
      }
    }
    double weight_sum = 0.0;
    Vector weights = Vector::Zero(d);
    for (int i = 0; i < d; ++i) {
      if ((piece.j >> i & 1) && !(piece.j_negative >> i & 1)) {
        weights(i) = expo(rng);
        weight_sum += weights(i);
      }
    }
    for (int i = 0; i < d; ++i) {
      if (weights(i) > 0.0) coeffs(i) = ctx.t(i) * budget * weights(i) / weight_sum;
      if (!(piece.j >> i & 1)) coeffs(i) = -radius * unit(rng);
    }
    out.push_back(ctx.apex + ctx.duals * coeffs);
  }
  return out;
}

bool piece_contains(const BoundaryPiece& piece, const Vector& x, double tol) {
  const BoundaryContext& ctx = *piece.context;
  if (x.size() != ctx.apex.size()) return false;
  const Vector lambdas = ctx.duals.colPivHouseholderQr().solve(x - ctx.apex);
  const double scale = 1.0 + lambdas.cwiseAbs().maxCoeff();
  double constraint = 0.0;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    if (piece.j >> i & 1) {
      if (lambdas(i) < -tol * scale) return false;
      constraint += lambdas(i) / ctx.t(i);
    } else if (lambdas(i) > tol * scale) {
      return false;
    }
  }
  return std::abs(constraint - 1.0) <= tol * scale;
}

std::pair<ReluLayer, OutputLayer> canonical_network(int d, int m) {
  if (d < 1) throw GeometryError(ErrorCode::DimensionMismatch, "dimension must be positive");
  if (m < 0 || m >= d) {
    throw GeometryError(ErrorCode::InvalidM,
                        "m must lie in 0.." + std::to_string(d - 1) + ", got " +
                            std::to_string(m));
  }
  // t_i = -bias / w_i with bias = -1 gives w_i = t_i for t_i in {-1, 1}.
  Vector w(d);
  for (int i = 0; i < d; ++i) w(i) = i < m ? -1.0 : 1.0;
  return {ReluLayer(AffineMap::identity(d)), OutputLayer{w, -1.0}};
}

DecisionBoundary canonical_boundary(int d, int m) {
  const auto [layer, output] = canonical_network(d, m);
  return enumerate_pieces(layer, output);
}

bool equivalence_check(const DecisionBoundary& a, const DecisionBoundary& b) {
  if (a.d != b.d) {
    throw GeometryError(ErrorCode::DimensionMismatch,
                        "equivalence needs boundaries of the same dimension");
  }
  return a.m == b.m;
}

}  // namespace relugeom
