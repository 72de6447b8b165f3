#include "relugeom/random.hpp"

#include <cmath>

namespace relugeom {

Vector random_gaussian(Eigen::Index n, std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> gauss(0.0, sigma);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = gauss(rng);
  return v;
}

ReluLayer random_layer(int out_dim, int in_dim, std::mt19937_64& rng, double min_rcond) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (true) {
    Matrix a(out_dim, in_dim);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = gauss(rng);
    Vector b = random_gaussian(out_dim, rng);
    try {
      ReluLayer layer(AffineMap(std::move(a), std::move(b)), min_rcond);
      return layer;
    } catch (const GeometryError& e) {
      if (e.code() != ErrorCode::RankDeficient) throw;
    }
  }
}

OutputLayer random_output(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (true) {
    OutputLayer out{random_gaussian(d, rng), gauss(rng)};
    if (std::abs(out.bias) < 0.05) continue;
    if ((out.weights.cwiseAbs().array() < 0.05 * std::abs(out.bias)).any()) continue;
    const OutputLayer n = normalize_output_layer(out);
    if ((-n.bias / n.weights.array() > 0.0).any()) return out;
  }
}

ReluNetwork random_network(int depth, int d, std::mt19937_64& rng) {
  std::vector<ReluLayer> layers;
  for (int k = 0; k < depth; ++k) layers.push_back(random_layer(d, d, rng));
  return ReluNetwork(std::move(layers), random_output(d, rng));
}

Vector random_sector_point(const DualFrame& frame, const SectorIndex& s, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  Vector coeffs = Vector::Zero(frame.out_dim());
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    if (s.plus() >> i & 1) coeffs(i) = 0.01 + expo(rng);
    if (s.minus() >> i & 1) coeffs(i) = -(0.01 + expo(rng));
  }
  return frame.reconstruct(coeffs);
}

}  // namespace relugeom
