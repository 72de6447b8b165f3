#include "relugeom/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

namespace relugeom::io {

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw GeometryError(ErrorCode::Schema, what);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(where + ": non-finite number");
  return v;
}

Vector vector_field(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) schema_error(where + ": expected a non-empty array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(j[i], where + "[" + std::to_string(i) + "]");
  }
  return v;
}

json columns(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(to_json(Vector(m.col(c))));
  return out;
}

json one_based(IndexMask mask) { return indices_from_mask(mask); }

void dump_into(const json& j, std::string& out) {
  switch (j.type()) {
    case json::value_t::null:
      out += "null";
      break;
    case json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      break;
    case json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      break;
    case json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      break;
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      break;
    }
    case json::value_t::string:
      out += j.dump();
      break;
    case json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ',';
        first = false;
        dump_into(e, out);
      }
      out += ']';
      break;
    }
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += json(key).dump();
        out += ':';
        dump_into(value, out);
      }
      out += '}';
      break;
    }
    default:
      out += "null";
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string dump_json(const json& j) {
  std::string out;
  dump_into(j, out);
  return out;
}

LayerSpec parse_layer_spec(const json& j) {
  if (!j.is_object()) schema_error("layer: expected an object");
  if (!j.contains("matrix")) schema_error("layer: missing 'matrix'");
  if (!j.contains("offset")) schema_error("layer: missing 'offset'");
  const json& rows = j.at("matrix");
  if (!rows.is_array() || rows.empty()) schema_error("layer.matrix: expected a non-empty array");
  LayerSpec spec;
  const Vector first = vector_field(rows[0], "layer.matrix[0]");
  spec.matrix.resize(static_cast<Eigen::Index>(rows.size()), first.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Vector row = vector_field(rows[r], "layer.matrix[" + std::to_string(r) + "]");
    if (row.size() != first.size()) schema_error("layer.matrix: rows differ in length");
    spec.matrix.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  spec.offset = vector_field(j.at("offset"), "layer.offset");
  if (spec.offset.size() != spec.matrix.rows()) {
    schema_error("layer.offset: length " + std::to_string(spec.offset.size()) +
                 " does not match " + std::to_string(spec.matrix.rows()) + " rows");
  }
  if (j.contains("name")) {
    if (!j.at("name").is_string()) schema_error("layer.name: expected a string");
    spec.name = j.at("name").get<std::string>();
  }
  return spec;
}

NetworkSpec parse_network_spec(const json& j) {
  if (!j.is_object()) schema_error("network: expected an object");
  if (!j.contains("layers") || !j.at("layers").is_array() || j.at("layers").empty()) {
    schema_error("network: 'layers' must be a non-empty array");
  }
  NetworkSpec spec;
  for (const json& l : j.at("layers")) spec.layers.push_back(parse_layer_spec(l));
  for (std::size_t k = 1; k < spec.layers.size(); ++k) {
    if (spec.layers[k].matrix.cols() != spec.layers[k - 1].matrix.rows()) {
      schema_error("network: layer " + std::to_string(k + 1) + " does not chain");
    }
  }
  if (!j.contains("output") || !j.at("output").is_object()) {
    schema_error("network: missing 'output' object");
  }
  const json& out = j.at("output");
  if (!out.contains("weights") || !out.contains("bias")) {
    schema_error("network.output: needs 'weights' and 'bias'");
  }
  spec.output.weights = vector_field(out.at("weights"), "output.weights");
  spec.output.bias = number(out.at("bias"), "output.bias");
  if (spec.output.weights.size() != spec.layers.back().matrix.rows()) {
    schema_error("network.output: weights do not match the last layer's width");
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) {
      schema_error("network.seed: expected a non-negative integer");
    }
    const auto s = j.at("seed").get<std::int64_t>();
    if (s < 0) schema_error("network.seed: expected a non-negative integer");
    spec.seed = static_cast<std::uint64_t>(s);
  }
  return spec;
}

ReluNetwork NetworkSpec::network() const {
  std::vector<ReluLayer> built;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    try {
      built.emplace_back(layers[k].affine());
    } catch (const GeometryError& e) {
      throw GeometryError(e.code(), "layer " + std::to_string(k + 1) + ": " + e.what(),
                          static_cast<int>(k + 1));
    }
  }
  return ReluNetwork(std::move(built), output);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) schema_error("cannot read '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    schema_error(std::string("invalid JSON: ") + e.what());
  }
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(to_json(Vector(m.row(r).transpose())));
  return out;
}

json to_json(const LayerSpec& spec) {
  json out{{"matrix", to_json(spec.matrix)}, {"offset", to_json(spec.offset)}};
  if (!spec.name.empty()) out["name"] = spec.name;
  return out;
}

json to_json(const NetworkSpec& spec) {
  json layers = json::array();
  for (const auto& l : spec.layers) layers.push_back(to_json(l));
  json out{{"layers", layers},
           {"output", {{"weights", to_json(spec.output.weights)}, {"bias", spec.output.bias}}}};
  if (spec.seed) out["seed"] = *spec.seed;
  return out;
}

json to_json(const SectorIndex& s) {
  return json{{"plus", one_based(s.plus())}, {"minus", one_based(s.minus())}};
}

SectorIndex sector_from_json(const json& j) {
  if (!j.is_object() || !j.contains("plus") || !j.contains("minus")) {
    schema_error("sector: expected {\"plus\":[...],\"minus\":[...]}");
  }
  try {
    return SectorIndex::from_indices(j.at("plus").get<std::vector<int>>(),
                                     j.at("minus").get<std::vector<int>>());
  } catch (const json::exception& e) {
    schema_error(std::string("sector: ") + e.what());
  }
}

json to_json(const DualFrame& frame) {
  json out{{"apex", to_json(frame.apex())},
           {"duals", columns(frame.duals())},
           {"rcond", frame.rcond()},
           {"duality_residual", frame.duality_residual()},
           {"contracting", frame.contracting()}};
  if (frame.contracting()) {
    out["row_span_basis"] = columns(*frame.row_span_basis());
    out["complement_basis"] = columns(*frame.complement_basis());
  }
  return out;
}

json to_json(const PreimageSet& pre) {
  std::vector<int> free;
  for (int i : pre.free_indices) free.push_back(i + 1);
  return json{{"target", to_json(pre.target)},
              {"base", to_json(pre.base)},
              {"free_indices", free},
              {"generators", columns(pre.generators)},
              {"kernel", columns(pre.kernel)},
              {"source_sector", to_json(pre.source_sector)},
              {"dimension", pre.dimension()}};
}

json to_json(const CanonicalReduction& r) {
  std::vector<int> sigma;
  for (int s : r.sigma) sigma.push_back(s + 1);
  return json{{"m", r.m},
              {"sigma", sigma},
              {"scaling", to_json(r.scaling)},
              {"map", {{"matrix", to_json(r.map.matrix())}, {"offset", to_json(r.map.offset())}}},
              {"rcond", r.rcond}};
}

json to_json(const DecisionBoundary& b) {
  json pieces = json::array();
  for (const auto& p : b.pieces) {
    pieces.push_back(json{{"J", one_based(p.j)},
                          {"J_negative", one_based(p.j_negative)},
                          {"bounded", p.bounded},
                          {"recession", one_based(p.recession())}});
  }
  return json{{"d", b.d},
              {"m", b.m},
              {"piece_count", b.piece_count},
              {"curvature", to_string(b.curvature)},
              {"t", to_json(b.values.t)},
              {"output", {{"weights", to_json(b.output.weights)}, {"bias", b.output.bias}}},
              {"hyperplane",
               {{"normal", to_json(b.hyperplane.normal)}, {"offset", b.hyperplane.offset}}},
              {"pieces", pieces},
              {"canonical", to_json(b.canonical)}};
}

namespace {

std::string piece_label(IndexMask j) {
  std::string s;
  for (int i : indices_from_mask(j)) {
    if (!s.empty()) s += ';';
    s += std::to_string(i);
  }
  return s;
}

}  // namespace

void write_boundary_csv(std::ostream& os, const std::vector<LabeledPoint>& rows) {
  const Eigen::Index d = rows.empty() ? 0 : rows.front().point.size();
  os << "piece";
  for (Eigen::Index i = 1; i <= d; ++i) os << ",x" << i;
  os << ",residual\n";
  for (const auto& r : rows) {
    os << piece_label(r.piece);
    for (Eigen::Index i = 0; i < r.point.size(); ++i) os << ',' << format_double(r.point(i));
    os << ',' << format_double(r.residual) << '\n';
  }
}

void write_deep_csv(std::ostream& os, const std::vector<BoundarySampleSet>& levels) {
  Eigen::Index width = 0;
  for (const auto& l : levels) {
    for (const auto& p : l.points) width = std::max(width, p.size());
  }
  os << "level";
  for (Eigen::Index i = 1; i <= width; ++i) os << ",x" << i;
  os << ",residual,fiber_id\n";
  for (const auto& l : levels) {
    for (std::size_t s = 0; s < l.points.size(); ++s) {
      os << l.level;
      const Vector& p = l.points[s];
      for (Eigen::Index i = 0; i < width; ++i) {
        os << ',';
        if (i < p.size()) os << format_double(p(i));
      }
      os << ',' << format_double(l.residuals[s]) << ',' << l.provenance[s].parent << '\n';
    }
  }
}

namespace {

using Point3 = Eigen::Vector3d;

// Keeps the part of a convex polygon with g.x <= e.
std::vector<Point3> clip(const std::vector<Point3>& poly, const Point3& g, double e) {
  std::vector<Point3> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point3& a = poly[i];
    const Point3& b = poly[(i + 1) % n];
    const double fa = g.dot(a) - e;
    const double fb = g.dot(b) - e;
    if (fa <= 0.0) out.push_back(a);
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
      out.push_back(a + (b - a) * (fa / (fa - fb)));
    }
  }
  return out;
}

}  // namespace

std::vector<std::array<double, 3>> clip_piece_to_box(const ReluLayer& layer,
                                                     const BoundaryPiece& piece, double lo,
                                                     double hi) {
  if (layer.in_dim() != 3 || layer.out_dim() != 3) {
    throw GeometryError(ErrorCode::DimensionMismatch, "OBJ export needs d = 3");
  }
  const Matrix& a = layer.affine().matrix();
  const Vector& b = layer.affine().offset();
  const Vector& t = piece.context->t;

  // Supporting plane sum_{j in J} (a_j.x + b_j) / t_j = 1.
  Point3 normal = Point3::Zero();
  double level = 1.0;
  for (int j = 0; j < 3; ++j) {
    if (!(piece.j >> j & 1)) continue;
    normal += a.row(j).transpose() / t(j);
    level -= b(j) / t(j);
  }
  const double nn = normal.squaredNorm();
  const Point3 unit = normal / std::sqrt(nn);
  const Point3 center = Point3::Constant(0.5 * (lo + hi));
  const Point3 origin = center - unit * (unit.dot(center) - level / std::sqrt(nn));
  Point3 u = unit.unitOrthogonal();
  Point3 v = unit.cross(u);
  const double r = 4.0 * (hi - lo) + (origin - center).norm();
  std::vector<Point3> poly{origin + r * (u + v), origin + r * (-u + v), origin + r * (-u - v),
                           origin + r * (u - v)};

  for (int k = 0; k < 3 && poly.size() >= 3; ++k) {
    Point3 e = Point3::Zero();
    e(k) = 1.0;
    poly = clip(poly, e, hi);
    if (poly.size() >= 3) poly = clip(poly, -e, -lo);
  }
  for (int i = 0; i < 3 && poly.size() >= 3; ++i) {
    const Point3 row = a.row(i).transpose();
    // Inside J: a_i.x + b_i >= 0. Outside J: a_i.x + b_i <= 0.
    poly = (piece.j >> i & 1) ? clip(poly, -row, b(i)) : clip(poly, row, -b(i));
  }

  std::vector<std::array<double, 3>> out;
  if (poly.size() < 3) return out;
  for (const Point3& p : poly) {
    if (!out.empty()) {
      const auto& q = out.back();
      if ((p - Point3(q[0], q[1], q[2])).norm() <= 1e-12 * (1.0 + std::abs(hi - lo))) continue;
    }
    out.push_back({p(0), p(1), p(2)});
  }
  if (out.size() >= 2) {
    const auto& f = out.front();
    const auto& l = out.back();
    if ((Point3(f[0], f[1], f[2]) - Point3(l[0], l[1], l[2])).norm() <=
        1e-12 * (1.0 + std::abs(hi - lo))) {
      out.pop_back();
    }
  }
  if (out.size() < 3) out.clear();
  return out;
}

int write_obj(std::ostream& os, const ReluLayer& layer, const DecisionBoundary& boundary,
              double lo, double hi) {
  if (boundary.d != 3) throw GeometryError(ErrorCode::DimensionMismatch, "OBJ export needs d = 3");
  if (!(lo < hi)) throw GeometryError(ErrorCode::Schema, "box needs lo < hi");
  int vertex_base = 1;
  int faces = 0;
  for (const auto& piece : boundary.pieces) {
    const auto poly = clip_piece_to_box(layer, piece, lo, hi);
    if (poly.empty()) continue;
    os << "o piece_" << piece_label(piece.j) << '\n';
    for (const auto& p : poly) {
      os << "v " << format_double(p[0]) << ' ' << format_double(p[1]) << ' '
         << format_double(p[2]) << '\n';
    }
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
      os << "f " << vertex_base << ' ' << vertex_base + static_cast<int>(k) << ' '
         << vertex_base + static_cast<int>(k) + 1 << '\n';
      ++faces;
    }
    vertex_base += static_cast<int>(poly.size());
  }
  return faces;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

}  // namespace relugeom::io
