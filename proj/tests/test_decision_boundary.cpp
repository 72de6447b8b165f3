#include <algorithm>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "relugeom/decision_boundary.hpp"
#include "relugeom/random.hpp"

using namespace relugeom;

namespace {

OutputLayer make_output(std::initializer_list<double> w, double bias) {
  OutputLayer out;
  out.weights = Vector::Map(std::data(w), static_cast<Eigen::Index>(w.size()));
  out.bias = bias;
  return out;
}

// Largest F value at midpoints of pairs of boundary samples.
double worst_midpoint(const ReluLayer& layer, const OutputLayer& out,
                      const std::vector<Vector>& pts) {
  double worst = -1e300;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      worst = std::max(worst, shallow_output(layer, out, 0.5 * (pts[i] + pts[j])));
  return worst;
}

std::vector<Vector> boundary_samples(const DecisionBoundary& b, int per_piece,
                                     std::mt19937_64& rng) {
  std::vector<Vector> pts;
  for (const auto& p : b.pieces)
    for (Vector& x : sample_piece(p, per_piece, 2.0, rng)) pts.push_back(std::move(x));
  return pts;
}

}  // namespace

TEST_CASE("intersection values of a worked example") {
  const OutputLayer out = normalize_output_layer(make_output({1, 2, -4}, -2));
  const IntersectionValues v = intersection_values(out);
  CHECK(v.t(0) == doctest::Approx(2.0));
  CHECK(v.t(1) == doctest::Approx(1.0));
  CHECK(v.t(2) == doctest::Approx(-0.5));
  CHECK(v.m == 1);
  const ReluLayer layer(AffineMap::identity(3));
  CHECK(enumerate_pieces(layer, out).piece_count == 6);
}

TEST_CASE("normalization flips a positive bias without moving the zero set") {
  const OutputLayer raw = make_output({1, -1}, 0.5);
  const OutputLayer n = normalize_output_layer(raw);
  CHECK(n.bias < 0.0);
  Vector y(2);
  y << 0.25, 0.75;
  CHECK(raw.evaluate(y) == doctest::Approx(0.0));
  CHECK(n.evaluate(y) == doctest::Approx(0.0));
}

TEST_CASE("three-dimensional counts and curvature for each m") {
  const ReluLayer layer(AffineMap::identity(3));
  const DecisionBoundary m0 = enumerate_pieces(layer, make_output({1, 1, 1}, -1));
  const DecisionBoundary m1 = enumerate_pieces(layer, make_output({-1, 1, 1}, -1));
  const DecisionBoundary m2 = enumerate_pieces(layer, make_output({-1, -1, 1}, -1));
  CHECK(m0.piece_count == 7);
  CHECK(m1.piece_count == 6);
  CHECK(m2.piece_count == 4);
  CHECK(m0.curvature == Curvature::Convex);
  CHECK(m1.curvature == Curvature::Saddle);
  CHECK(m2.curvature == Curvature::Saddle);
}

TEST_CASE("piece counts agree with the formula and two oracles") {
  std::mt19937_64 rng(13);
  for (int d = 2; d <= 6; ++d) {
    for (int trial = 0; trial < 30; ++trial) {
      const ReluLayer layer = random_layer(d, d, rng);
      const OutputLayer out = random_output(d, rng);
      const DecisionBoundary b = enumerate_pieces(layer, out);
      const std::uint64_t formula = (1ULL << d) - (1ULL << b.m);
      CHECK(b.piece_count == formula);
      CHECK(b.pieces.size() == formula);
      CHECK(piece_count_oracle(layer, out) == formula);
      CHECK(oracle::piece_count_codomain(out.weights, out.bias) == formula);
    }
  }
}

TEST_CASE("sampled points lie on the zero level set and on their piece") {
  std::mt19937_64 rng(17);
  for (int d = 2; d <= 4; ++d) {
    const ReluLayer layer = random_layer(d, d, rng);
    const OutputLayer out = random_output(d, rng);
    const DecisionBoundary b = enumerate_pieces(layer, out);
    const oracle::Net net{{layer.affine().matrix()}, {layer.affine().offset()}, out.weights,
                          out.bias};
    for (const auto& p : b.pieces) {
      for (const Vector& x : sample_piece(p, 100, 3.0, rng)) {
        CHECK(std::abs(oracle::net(net, x)) < 1e-8 * (1.0 + std::abs(b.output.bias)));
        CHECK(piece_contains(p, x));
        const Vector y = layer.evaluate(x);
        CHECK(oracle::sign_pattern(y, 1e-12).plus == p.j);
      }
    }
  }
}

TEST_CASE("convex boundaries bound a convex region; saddles do not") {
  std::mt19937_64 rng(19);
  const ReluLayer layer = random_layer(3, 3, rng);
  const OutputLayer convex_out = make_output({0.8, 1.1, 0.6}, -1.0);
  const DecisionBoundary convex = enumerate_pieces(layer, convex_out);
  REQUIRE(convex.m == 0);
  CHECK(worst_midpoint(layer, convex.output, boundary_samples(convex, 15, rng)) < 1e-9);

  const OutputLayer saddle_out = make_output({-0.8, 1.1, 0.6}, -1.0);
  const DecisionBoundary saddle = enumerate_pieces(layer, saddle_out);
  REQUIRE(saddle.m == 1);
  CHECK(worst_midpoint(layer, saddle.output, boundary_samples(saddle, 15, rng)) > 1e-3);
}

TEST_CASE("sampling along segments finds every piece") {
  std::mt19937_64 rng(23);
  const ReluLayer layer(AffineMap::identity(2));
  const OutputLayer out = make_output({1, -1}, -1);  // m = 1, two pieces
  const DecisionBoundary b = enumerate_pieces(layer, out);
  const SampledPieceCount s = sampled_piece_count(layer, out, 4000, rng);
  CHECK(s.labels.size() == b.piece_count);
  CHECK(s.gradient_clusters == static_cast<int>(b.piece_count));
}

TEST_CASE("canonical reduction maps canonical samples onto the boundary") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const ReluLayer layer = random_layer(4, 4, rng);
    const OutputLayer out = random_output(4, rng);
    const DecisionBoundary b = enumerate_pieces(layer, out);
    const DecisionBoundary canon = canonical_boundary(4, b.m);
    CHECK(equivalence_check(b, canon));
    std::vector<IndexMask> targets;
    for (const auto& p : b.pieces) targets.push_back(p.j);
    for (const auto& p : canon.pieces) {
      const IndexMask mapped = b.canonical.map_piece(p.j);
      CHECK(std::find(targets.begin(), targets.end(), mapped) != targets.end());
      for (const Vector& x : sample_piece(p, 20, 2.0, rng)) {
        const Vector mx = b.canonical.map.evaluate(x);
        CHECK(std::abs(shallow_output(layer, out, mx)) < 1e-7);
        CHECK(oracle::sign_pattern(layer.evaluate(mx), 1e-9).plus == mapped);
      }
    }
  }
}

TEST_CASE("canonical networks have the advertised intersection values") {
  for (int m = 0; m < 4; ++m) {
    const DecisionBoundary b = canonical_boundary(4, m);
    CHECK(b.m == m);
    for (int i = 0; i < 4; ++i) CHECK(b.values.t(i) == doctest::Approx(i < m ? -1.0 : 1.0));
  }
  CHECK(equivalence_check(canonical_boundary(3, 1), canonical_boundary(3, 1)));
  CHECK_FALSE(equivalence_check(canonical_boundary(3, 1), canonical_boundary(3, 2)));
}

TEST_CASE("degenerate configurations raise the matching errors") {
  const ReluLayer layer(AffineMap::identity(3));
  auto code_of = [&](const OutputLayer& out) {
    try {
      enumerate_pieces(layer, out);
    } catch (const GeometryError& e) {
      return e.code();
    }
    return ErrorCode::Schema;
  };
  CHECK(code_of(make_output({1, 1, 1}, 0)) == ErrorCode::DegenerateBias);
  CHECK(code_of(make_output({1, 0, 1}, -1)) == ErrorCode::DegenerateDirection);
  CHECK(code_of(make_output({-1, -1, -1}, -1)) == ErrorCode::AllNegative);
  try {
    canonical_network(3, 3);
    FAIL("expected InvalidM");
  } catch (const GeometryError& e) {
    CHECK(e.code() == ErrorCode::InvalidM);
  }
  const DecisionBoundary b = enumerate_pieces(layer, make_output({-1, 1, 1}, -1));
  BoundaryPiece empty = b.pieces.front();
  empty.j = empty.j_negative = 0b1;
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(sample_piece(empty, 1, 1.0, rng), GeometryError);
}

TEST_CASE("pieces sharing recession generators") {
  const DecisionBoundary b = canonical_boundary(3, 0);
  const auto& p1 = b.pieces[0];  // J = {1}
  const auto& p2 = b.pieces[1];  // J = {2}
  CHECK(shared_generators(p1, p2) == mask_from_indices({3}));
}
