#pragma once

#include <random>

#include "relugeom/decision_boundary.hpp"
#include "relugeom/deep_network.hpp"
#include "relugeom/relu_layer.hpp"

namespace relugeom {

/// Gaussian layer redrawn until its dual system has rcond >= min_rcond.
ReluLayer random_layer(int out_dim, int in_dim, std::mt19937_64& rng, double min_rcond = 1e-3);

/// Gaussian output layer with at least one positive intersection value and
/// every |weight| >= 0.05 |bias| (comfortably in general position).
OutputLayer random_output(int d, std::mt19937_64& rng);

/// Square layers of width d.
ReluNetwork random_network(int depth, int d, std::mt19937_64& rng);

/// Interior point of sector s: coefficients (0.01 + Exp(1)) with the
/// sector's signs, zero off its support.
Vector random_sector_point(const DualFrame& frame, const SectorIndex& s, std::mt19937_64& rng);

Vector random_gaussian(Eigen::Index n, std::mt19937_64& rng, double sigma = 1.0);

}  // namespace relugeom
