#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "relugeom/decision_boundary.hpp"
#include "relugeom/deep_network.hpp"
#include "relugeom/partition.hpp"
#include "relugeom/relu_layer.hpp"

namespace relugeom::io {

using nlohmann::json;

struct LayerSpec {
  Matrix matrix;
  Vector offset;
  std::string name;

  AffineMap affine() const { return AffineMap(matrix, offset); }
};

struct NetworkSpec {
  std::vector<LayerSpec> layers;
  OutputLayer output;
  std::optional<std::uint64_t> seed;

  ReluNetwork network() const;
};

/// Both parsers throw GeometryError(Schema) on malformed input.
LayerSpec parse_layer_spec(const json& j);
NetworkSpec parse_network_spec(const json& j);
/// Reads and parses a JSON file; Schema error when unreadable or malformed.
json read_json_file(const std::string& path);

json to_json(const LayerSpec& spec);
json to_json(const NetworkSpec& spec);
json to_json(const Vector& v);
json to_json(const Matrix& m);
json to_json(const SectorIndex& s);
SectorIndex sector_from_json(const json& j);
json to_json(const DualFrame& frame);
json to_json(const PreimageSet& pre);
json to_json(const CanonicalReduction& r);
json to_json(const DecisionBoundary& b);

/// Serializes with sorted keys, no whitespace, and every floating-point
/// value printed with 17 significant digits; non-finite values become null.
std::string dump_json(const json& j);

/// One row per point: piece label (1-based indices joined by ';'),
/// coordinates, |F(x)|.
struct LabeledPoint {
  IndexMask piece = 0;
  Vector point;
  double residual = 0.0;
};
void write_boundary_csv(std::ostream& os, const std::vector<LabeledPoint>& rows);
/// Columns: level, coordinates, |F(x)| residual, fiber id (parent sample).
void write_deep_csv(std::ostream& os, const std::vector<BoundarySampleSet>& levels);

/// Polygon of a 3-D piece clipped to the box [lo, hi]^3; empty if the piece
/// misses the box.
std::vector<std::array<double, 3>> clip_piece_to_box(const ReluLayer& layer,
                                                     const BoundaryPiece& piece, double lo,
                                                     double hi);
/// Wavefront OBJ of every piece clipped to the box, fan-triangulated.
/// Returns the number of faces written. Throws DimensionMismatch unless d = 3.
int write_obj(std::ostream& os, const ReluLayer& layer, const DecisionBoundary& boundary,
              double lo, double hi);

std::string format_double(double v);
std::string sha256_hex(const std::string& bytes);

}  // namespace relugeom::io
