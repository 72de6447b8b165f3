// Acceptance run: one PASS/FAIL line per criterion, at full scale, each
// checked against the brute-force references in oracles.hpp.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "relugeom/decision_boundary.hpp"
#include "relugeom/deep_network.hpp"
#include "relugeom/partition.hpp"
#include "relugeom/random.hpp"
#include "relugeom/relu_layer.hpp"

using namespace relugeom;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

oracle::Net to_oracle(const ReluNetwork& net) {
  oracle::Net o;
  for (const auto& l : net.layers()) {
    o.weights.push_back(l.affine().matrix());
    o.offsets.push_back(l.affine().offset());
  }
  o.out_weights = net.output().weights;
  o.out_bias = net.output().bias;
  return o;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome duality() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int d = 2 + i % 9;
    const ReluLayer layer = random_layer(d, d, rng);
    const Matrix gram = layer.affine().matrix() * layer.frame().duals();
    worst = std::max(worst, (gram - Matrix::Identity(d, d)).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-9, fmt("1000 layers, d=2..10, max|a_j.a_i* - delta_ij| = %.3g (< 1e-9)", worst)};
}

Outcome partition_counts() {
  bool ok = true;
  for (int d = 1; d <= 10; ++d) {
    const auto sectors = enumerate_sectors(d);
    std::vector<std::uint64_t> seen(static_cast<std::size_t>(d) + 1, 0);
    for (const auto& s : sectors) ++seen[static_cast<std::size_t>(s.dimension())];
    std::uint64_t total = 1;
    for (int i = 0; i < d; ++i) total *= 3;
    ok = ok && sectors.size() == total && seen == oracle::sign_vector_census(d) &&
         seen == sector_count_table(d);
    for (int k = 0; k <= d; ++k) ok = ok && seen[k] == (oracle::binomial(d, k) << k);
  }
  auto by_dim_desc = [](int d) {
    std::vector<std::uint64_t> v(static_cast<std::size_t>(d) + 1, 0);
    for (const auto& s : enumerate_sectors(d)) ++v[static_cast<std::size_t>(d - s.dimension())];
    return v;
  };
  const bool d2 = by_dim_desc(2) == std::vector<std::uint64_t>{4, 4, 1};
  const bool d3 = by_dim_desc(3) == std::vector<std::uint64_t>{8, 12, 6, 1};
  return {ok && d2 && d3, std::string("3^d and C(d,k)2^k for d<=10: ") + (ok ? "match" : "MISMATCH") +
                              "; d=2 4/4/1: " + (d2 ? "yes" : "NO") +
                              "; d=3 8/12/6/1: " + (d3 ? "yes" : "NO")};
}

Outcome image_of_sectors() {
  std::mt19937_64 rng(103);
  std::uint64_t checks = 0, violations = 0;
  for (int d = 1; d <= 4; ++d) {
    const ReluLayer layer = random_layer(d, d, rng);
    const DualFrame codomain = build_dual_frame(AffineMap::identity(d));
    const Matrix& a = layer.affine().matrix();
    const Vector& b = layer.affine().offset();
    for (const auto& s : enumerate_sectors(d)) {
      for (int k = 0; k < 100; ++k) {
        const Vector x = random_sector_point(layer.frame(), s, rng);
        const oracle::Signs in = oracle::sector_of(a, b, x, 1e-12);
        const SectorIndex got = classify(codomain, oracle::relu_layer(a, b, x));
        ++checks;
        if (in.plus != s.plus() || in.minus != s.minus() || got != image_of_sector(s) ||
            got.plus() != in.plus) {
          ++violations;
        }
      }
    }
  }
  return {violations == 0, std::to_string(checks) + " samples over all sectors for d=1..4, " +
                               std::to_string(violations) + " violations"};
}

Outcome decomposition() {
  std::mt19937_64 rng(107);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int d = 1 + i % 8;
    const ReluLayer layer = random_layer(d, d, rng);
    for (int k = 0; k < 10; ++k) {
      const Vector x = random_gaussian(d, rng, 3.0);
      const Vector direct =
          oracle::relu_layer(layer.affine().matrix(), layer.affine().offset(), x);
      const Vector via = layer.affine().evaluate(layer.project_to_cone(x));
      worst = std::max(worst, (direct - via).cwiseAbs().maxCoeff());
    }
  }
  return {worst < 1e-9, fmt("10^4 (layer, point) pairs, d<=8, max residual %.3g (< 1e-9)", worst)};
}

// Integer matrix with non-zero determinant and entries in [-3, 3].
Matrix integer_matrix(int d, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> entry(-3, 3);
  for (;;) {
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = entry(rng);
    if (std::abs(a.determinant()) > 0.5 && reciprocal_condition(a) > 1e-3) return a;
  }
}

Outcome preimage_grid() {
  // Integer weights and offsets on the 0.1 lattice keep A x + b on that
  // lattice at every grid point, so T(x) = y is either exact or off by 0.1.
  std::mt19937_64 rng(109);
  std::uniform_int_distribution<int> tenth(-20, 20);
  std::uint64_t points = 0, disagreements = 0, members = 0;
  for (int d = 1; d <= 3; ++d) {
    Vector b(d);
    for (int i = 0; i < d; ++i) b(i) = tenth(rng) / 10.0;
    const ReluLayer layer(AffineMap(integer_matrix(d, rng), b));
    const int steps = 101;
    std::uniform_int_distribution<int> pick(0, steps - 1);
    std::vector<Vector> grid;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    for (;;) {
      Vector x(d);
      for (int i = 0; i < d; ++i) x(i) = -5.0 + 0.1 * idx[i];
      grid.push_back(x);
      int i = 0;
      while (i < d && ++idx[i] == steps) idx[i++] = 0;
      if (i == d) break;
    }
    for (int t = 0; t < 20; ++t) {
      Vector g(d);
      for (int i = 0; i < d; ++i) g(i) = -5.0 + 0.1 * pick(rng);
      Vector y = layer.evaluate(g);
      if (t % 5 == 4) y(0) = -0.3;  // negative targets have empty preimages
      const auto pre = preimage_of_point(layer, y);
      for (const Vector& x : grid) {
        const Vector tx = oracle::relu_layer(layer.affine().matrix(), b, x);
        const bool direct = (tx - y).cwiseAbs().maxCoeff() < 1e-6;
        const bool claimed = pre && membership_oracle(layer, *pre, x);
        ++points;
        members += direct;
        disagreements += direct != claimed;
      }
    }
  }
  return {disagreements == 0,
          std::to_string(points) + " grid checks (d=1..3, 20 targets each, " +
              std::to_string(members) + " members), " + std::to_string(disagreements) +
              " disagreements"};
}

Outcome piece_counts() {
  std::mt19937_64 rng(113);
  std::uint64_t configs = 0, bad = 0;
  for (int d = 2; d <= 8; ++d) {
    for (int i = 0; i < 500; ++i) {
      const ReluLayer layer = random_layer(d, d, rng);
      const OutputLayer out = random_output(d, rng);
      const DecisionBoundary b = enumerate_pieces(layer, out);
      const std::uint64_t formula = (1ULL << d) - (1ULL << b.m);
      ++configs;
      if (b.piece_count != formula || b.pieces.size() != formula ||
          piece_count_oracle(layer, out) != formula ||
          oracle::piece_count_codomain(out.weights, out.bias) != formula) {
        ++bad;
      }
    }
  }
  const ReluLayer id(AffineMap::identity(3));
  auto count = [&](double w1, double w2) {
    OutputLayer out;
    out.weights = Vector(3);
    out.weights << w1, w2, 1.0;
    out.bias = -1.0;
    return enumerate_pieces(id, out).piece_count;
  };
  const bool d3_counts = count(1, 1) == 7 && count(-1, 1) == 6 && count(-1, -1) == 4;
  return {bad == 0 && d3_counts,
          std::to_string(configs) + " configs d=2..8, " + std::to_string(bad) +
              " disagreements; d=3 counts 7/6/4: " + (d3_counts ? "reproduced" : "WRONG")};
}

Outcome zero_level() {
  std::mt19937_64 rng(127);
  double worst_ratio = 0.0;
  std::uint64_t samples = 0;
  for (int i = 0; i < 50; ++i) {
    const int d = 1 + i % 4;
    const ReluLayer layer = random_layer(d, d, rng);
    const OutputLayer out = random_output(d, rng);
    const DecisionBoundary b = enumerate_pieces(layer, out);
    const oracle::Net net{{layer.affine().matrix()}, {layer.affine().offset()}, out.weights,
                          out.bias};
    const double tol = 1e-8 * (1.0 + std::abs(b.output.bias));
    for (const auto& p : b.pieces) {
      for (const Vector& x : sample_piece(p, 1000, 5.0, rng)) {
        worst_ratio = std::max(worst_ratio, std::abs(oracle::net(net, x)) / tol);
        ++samples;
      }
    }
  }
  return {worst_ratio < 1.0, std::to_string(samples) +
                                 " samples on 50 boundaries (d<=4), worst |F|/(1e-8(1+|bias|)) = " +
                                 fmt("%.3g", worst_ratio)};
}

Outcome canonicalization() {
  std::mt19937_64 rng(131);
  std::uint64_t samples = 0, off = 0, bijection_failures = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const ReluLayer layer = random_layer(4, 4, rng);
    const OutputLayer out = random_output(4, rng);
    const DecisionBoundary b = enumerate_pieces(layer, out);
    const DecisionBoundary canon = canonical_boundary(4, b.m);
    const oracle::Net net{{layer.affine().matrix()}, {layer.affine().offset()}, out.weights,
                          out.bias};
    std::set<IndexMask> targets, images;
    for (const auto& p : b.pieces) targets.insert(p.j);
    const int per_piece = static_cast<int>((1000 + canon.pieces.size() - 1) / canon.pieces.size());
    for (const auto& p : canon.pieces) {
      const IndexMask mapped = b.canonical.map_piece(p.j);
      images.insert(mapped);
      if (!targets.count(mapped)) ++bijection_failures;
      for (const Vector& x : sample_piece(p, per_piece, 3.0, rng)) {
        const Vector mx = b.canonical.map.evaluate(x);
        const double r = std::abs(oracle::net(net, mx));
        worst = std::max(worst, r);
        off += r >= 1e-7;
        const Vector y = oracle::relu_layer(layer.affine().matrix(), layer.affine().offset(), mx);
        if (oracle::sign_pattern(y, 0.0).plus != mapped) ++bijection_failures;
        ++samples;
      }
    }
    if (images != targets) ++bijection_failures;
  }
  return {off == 0 && bijection_failures == 0,
          std::to_string(samples) + " mapped samples over 100 d=4 configs, max |F(M(x))| = " +
              fmt("%.3g", worst) + ", " + std::to_string(off) + " >= 1e-7, " +
              std::to_string(bijection_failures) + " piece-map failures"};
}

Outcome network_rewrite() {
  std::mt19937_64 rng(137);
  double worst = 0.0;
  std::uint64_t samples = 0;
  for (int depth = 1; depth <= 4; ++depth) {
    for (int d = 2; d <= 6; ++d) {
      const ReluNetwork net = random_network(depth, d, rng);
      const ComposedAffine c = canonical_structure(net);
      const oracle::Net o = to_oracle(net);
      for (int k = 0; k < 500; ++k) {
        const Vector x = random_gaussian(d, rng, 2.0);
        worst = std::max(worst, std::abs(c.evaluate(x) - oracle::net(o, x)));
        ++samples;
      }
    }
  }
  return {worst < 1e-8, std::to_string(samples) + " samples, N<=4, d<=6, max |F - rewrite| = " +
                            fmt("%.3g (< 1e-8)", worst)};
}

Outcome deep_recursion() {
  std::mt19937_64 rng(139);
  std::uint64_t points = 0, bad = 0, reached = 0, nets = 0;
  double worst = 0.0;
  for (int depth = 2; depth <= 3; ++depth) {
    for (int i = 0; i < 20; ++i) {
      const ReluNetwork net = random_network(depth, 2 + i % 3, rng);
      const oracle::Net o = to_oracle(net);
      const RecursionResult res = pull_back_all(net, 10, rng);
      ++nets;
      reached += !res.empty_level.has_value();
      for (const auto& level : res.levels) {
        if (level.level > net.depth()) continue;
        for (const Vector& x : level.points) {
          const double r = std::abs(oracle::net_from(o, level.level, x));
          worst = std::max(worst, r);
          bad += r >= 1e-7;
          ++points;
        }
      }
    }
  }
  // Single layer: the recursion and the exact enumerator must describe the
  // same pieces.
  std::uint64_t shallow_mismatch = 0;
  for (int i = 0; i < 20; ++i) {
    const ReluNetwork net = random_network(1, 2 + i % 3, rng);
    const ReluLayer& layer = net.layer(1);
    const DecisionBoundary b = enumerate_pieces(layer, net.output());
    const RecursionResult res = pull_back_all(net, 20, rng);
    if (res.empty_level) {
      ++shallow_mismatch;
      continue;
    }
    std::set<IndexMask> enumerated, from_recursion, from_sampler;
    for (const auto& p : b.pieces) {
      enumerated.insert(p.j);
      for (const Vector& x : sample_piece(p, 20, 2.0, rng))
        from_sampler.insert(oracle::sign_pattern(layer.evaluate(x), 0.0).plus);
    }
    for (const Vector& x : res.levels.back().points) {
      const IndexMask active = oracle::sign_pattern(layer.evaluate(x), 0.0).plus;
      from_recursion.insert(active);
      const auto on = std::find_if(b.pieces.begin(), b.pieces.end(),
                                   [&](const BoundaryPiece& p) { return p.j == active; });
      if (on == b.pieces.end() || !piece_contains(*on, x)) ++shallow_mismatch;
    }
    if (from_recursion != enumerated || from_sampler != enumerated) ++shallow_mismatch;
  }
  return {bad == 0 && shallow_mismatch == 0 && reached > 0,
          std::to_string(points) + " points from " + std::to_string(nets) + " N=2,3 nets (" +
              std::to_string(reached) + " reached level 1), max level residual " +
              fmt("%.3g", worst) + ", " + std::to_string(bad) + " >= 1e-7; N=1 mismatches: " +
              std::to_string(shallow_mismatch)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "duality identity", 5, duality},
      {2, "partition counts", 1, partition_counts},
      {3, "image of sectors", 10, image_of_sectors},
      {4, "decomposition T = A_b o pi", 5, decomposition},
      {5, "preimage brute force", 60, preimage_grid},
      {6, "piece count", 30, piece_counts},
      {7, "zero-level soundness", 30, zero_level},
      {8, "canonical reduction", 60, canonicalization},
      {9, "canonical network rewrite", 30, network_rewrite},
      {10, "deep recursion soundness", 60, deep_recursion},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.ok && in_time;
    failures += !pass;
    std::printf("criterion %2d %s: %s | %s | %.2f s (limit %.0f s)\n", c.id, pass ? "PASS" : "FAIL",
                c.name, o.detail.c_str(), secs, c.limit_s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
