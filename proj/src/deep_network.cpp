#include "relugeom/deep_network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace relugeom {

ReluNetwork::ReluNetwork(std::vector<ReluLayer> layers, OutputLayer output)
    : layers_(std::move(layers)), output_(std::move(output)) {
  if (layers_.empty()) {
    throw GeometryError(ErrorCode::DimensionMismatch, "network needs at least one layer");
  }
  for (std::size_t k = 1; k < layers_.size(); ++k) {
    if (layers_[k].in_dim() != layers_[k - 1].out_dim()) {
      throw GeometryError(ErrorCode::DimensionMismatch,
                          "layer " + std::to_string(k + 1) + " expects input of length " +
                              std::to_string(layers_[k].in_dim()) + " but layer " +
                              std::to_string(k) + " outputs " +
                              std::to_string(layers_[k - 1].out_dim()),
                          static_cast<int>(k + 1));
    }
  }
  if (output_.weights.size() != layers_.back().out_dim()) {
    throw GeometryError(ErrorCode::DimensionMismatch,
                        "output weights do not match the last layer's width");
  }
}

Vector ReluNetwork::forward(const Vector& x, int n) const {
  Vector z = x;
  for (int k = 0; k < n; ++k) z = layers_[static_cast<std::size_t>(k)].evaluate(z);
  return z;
}

double ReluNetwork::evaluate(const Vector& x) const { return evaluate_from(1, x); }

double ReluNetwork::evaluate_from(int k, const Vector& x) const {
  Vector z = x;
  for (int i = k; i <= depth(); ++i) z = layer(i).evaluate(z);
  return output_.evaluate(z);
}

double ComposedAffine::evaluate(const Vector& x) const {
  Vector z = x;
  for (const DualFrame& frame : frames) {
    z = frame.reconstruct(frame.coordinates(z).cwiseMax(0.0));
  }
  return final_affine.evaluate(z)(0);
}

ComposedAffine canonical_structure(const ReluNetwork& net) {
  ComposedAffine out;
  AffineMap composed = net.layer(1).affine();
  for (int k = 1; k <= net.depth(); ++k) {
    if (k > 1) composed = composed.then(net.layer(k).affine());
    try {
      out.frames.push_back(build_dual_frame(composed));
    } catch (const GeometryError& e) {
      throw GeometryError(e.code(),
                          "composed map at depth " + std::to_string(k) + ": " + e.what(), k);
    }
    out.per_layer.push_back(composed);
  }
  const OutputLayer& l = net.output();
  Matrix row = l.weights.transpose() * composed.matrix();
  Vector offset(1);
  offset(0) = l.weights.dot(composed.offset()) + l.bias;
  out.final_affine = AffineMap(std::move(row), std::move(offset));
  return out;
}

BoundarySampleSet seed_output_samples(const ReluNetwork& net, int per_face,
                                      std::mt19937_64& rng) {
  const int d = static_cast<int>(net.layers().back().out_dim());
  if (d > kMaxEnumerationDim) {
    throw GeometryError(ErrorCode::Overflow, "refusing to enumerate output faces");
  }
  const OutputLayer normalized = normalize_output_layer(net.output());
  const IntersectionValues values = intersection_values(normalized);
  if (values.any_degenerate()) {
    throw GeometryError(ErrorCode::DegenerateDirection, "output weight is zero");
  }
  // Faces of the orthant cut by ker(L): the canonical-frame pieces.
  auto context = std::make_shared<BoundaryContext>(
      BoundaryContext{Vector::Zero(d), Matrix::Identity(d, d), values.t});
  IndexMask negative = 0;
  for (int i = 0; i < d; ++i) {
    if (values.t(i) < 0.0) negative |= IndexMask{1} << i;
  }
  BoundarySampleSet seed;
  seed.level = net.depth() + 1;
  for (IndexMask j = 1; j <= full_mask(d); ++j) {
    BoundaryPiece face{j, j & negative, (j & negative) == 0, context};
    if (face.empty()) continue;
    for (Vector& y : sample_piece(face, per_face, 0.0, rng)) {
      seed.residuals.push_back(std::abs(net.output().evaluate(y)));
      seed.provenance.push_back(FiberProvenance{-1, 0, {}});
      seed.points.push_back(std::move(y));
    }
  }
  return seed;
}

BoundarySampleSet pull_back_boundary(const ReluNetwork& net, int k,
                                     const BoundarySampleSet& samples, std::mt19937_64& rng) {
  if (k < 1 || k > net.depth()) {
    throw GeometryError(ErrorCode::DimensionMismatch, "level out of range");
  }
  const ReluLayer& layer = net.layer(k);
  std::exponential_distribution<double> expo(1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  BoundarySampleSet out;
  out.level = k;
  for (std::size_t p = 0; p < samples.points.size(); ++p) {
    const Vector& y = samples.points[p];
    if (y.size() != layer.out_dim()) {
      throw GeometryError(ErrorCode::DimensionMismatch, "sample does not match layer width");
    }
    if ((y.array() < -kOrthantTol).any()) continue;
    const auto pre = preimage_of_point(layer, y.cwiseMax(0.0));
    const auto zeros = static_cast<int>(pre->free_indices.size());
    const int budget = zeros == 0 ? 1 : std::min(16, 1 << std::min(2 * zeros, 8));
    for (int f = 0; f < budget; ++f) {
      Vector x = pre->base;
      FiberProvenance prov{static_cast<int>(p), f, {}};
      if (zeros > 0) {
        for (Eigen::Index g = 0; g < pre->generators.cols(); ++g) {
          const double mu = expo(rng);
          prov.coefficients.push_back(mu);
          x += mu * pre->generators.col(g);
        }
      }
      for (Eigen::Index g = 0; g < pre->kernel.cols(); ++g) {
        const double c = gauss(rng);
        prov.coefficients.push_back(c);
        x += c * pre->kernel.col(g);
      }
      out.residuals.push_back(std::abs(net.evaluate_from(k, x)));
      out.provenance.push_back(std::move(prov));
      out.points.push_back(std::move(x));
    }
  }
  if (out.points.empty()) {
    throw GeometryError(ErrorCode::EmptyIntersection,
                        "no level " + std::to_string(k + 1) +
                            " sample lies in the closed orthant of layer " + std::to_string(k),
                        k);
  }
  return out;
}

RecursionResult pull_back_all(const ReluNetwork& net, int per_face, std::mt19937_64& rng) {
  RecursionResult result;
  result.levels.push_back(seed_output_samples(net, per_face, rng));
  for (int k = net.depth(); k >= 1; --k) {
    try {
      result.levels.push_back(pull_back_boundary(net, k, result.levels.back(), rng));
    } catch (const GeometryError& e) {
      if (e.code() != ErrorCode::EmptyIntersection) throw;
      result.empty_level = k;
      break;
    }
  }
  return result;
}

MixingReport mixing_check(const std::vector<ReluLayer>& prefix, const std::vector<Vector>& x1,
                          const std::vector<Vector>& x2, const ReluLayer& next, double tol) {
  auto project = [&](const std::vector<Vector>& xs) {
    std::vector<Vector> out;
    out.reserve(xs.size());
    for (Vector z : xs) {
      for (const ReluLayer& layer : prefix) z = layer.evaluate(z);
      out.push_back(next.project_to_cone(z));
    }
    return out;
  };
  const auto p1 = project(x1);
  const auto p2 = project(x2);
  MixingReport report;
  report.threshold = tol;
  report.min_distance = std::numeric_limits<double>::infinity();
  for (const Vector& a : p1) {
    for (const Vector& b : p2) report.min_distance = std::min(report.min_distance, (a - b).norm());
  }
  report.mixed = report.min_distance <= tol;
  return report;
}

}  // namespace relugeom
