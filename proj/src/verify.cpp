#include "relugeom/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>

#include "relugeom/decision_boundary.hpp"
#include "relugeom/deep_network.hpp"
#include "relugeom/io.hpp"
#include "relugeom/partition.hpp"
#include "relugeom/random.hpp"
#include "relugeom/relu_layer.hpp"

namespace relugeom {

namespace {

using nlohmann::json;
using io::to_json;

class Property {
 public:
  Property(std::string name, double tol) : name_(std::move(name)), tol_(tol) {}
  /// Exact (pass/fail) property with no residual.
  Property(std::string name) : name_(std::move(name)) {}

  /// Residual check: passes when residual < tol.
  void residual(double r, const std::function<json()>& context) {
    ++checks_;
    if (std::isfinite(r)) worst_ = std::max(worst_, r);
    if (tol_ && r < *tol_) {
      ++passes_;
    } else {
      fail(context);
    }
  }

  void check(bool ok, const std::function<json()>& context) {
    ++checks_;
    if (ok) {
      ++passes_;
    } else {
      fail(context);
    }
  }

  bool ok() const { return passes_ == checks_; }
  const json& first_failure() const { return first_failure_; }

  json summary() const {
    json j{{"property", name_}, {"checks", checks_}, {"passed", passes_}};
    if (tol_) {
      j["tolerance"] = *tol_;
      j["worst_residual"] = worst_;
    } else {
      j["tolerance"] = "exact";
    }
    return j;
  }

 private:
  void fail(const std::function<json()>& context) {
    if (first_failure_.is_null()) {
      first_failure_ = context();
      first_failure_["property"] = name_;
    }
  }

  std::string name_;
  std::optional<double> tol_;
  long checks_ = 0;
  long passes_ = 0;
  double worst_ = 0.0;
  json first_failure_;
};

json layer_json(const ReluLayer& layer) {
  return json{{"matrix", to_json(layer.affine().matrix())},
              {"offset", to_json(layer.affine().offset())}};
}

json output_json(const OutputLayer& l) {
  return json{{"weights", to_json(l.weights)}, {"bias", l.bias}};
}

VerifyOutcome finish(std::vector<Property>& props) {
  VerifyOutcome out;
  out.report = json::array();
  for (const auto& p : props) {
    out.report.push_back(p.summary());
    if (!p.ok() && out.passed) {
      out.passed = false;
      out.counterexample = p.first_failure();
    }
  }
  return out;
}

VerifyOutcome suite_duality(std::mt19937_64& rng) {
  std::vector<Property> props{{"duality", 1e-9},
                              {"apex", 1e-9},
                              {"reconstruction", 1e-9},
                              {"contracting_duality", 1e-9},
                              {"contracting_kernel", 1e-9},
                              {"contracting_apex_in_row_span", 1e-9}};
  std::uniform_int_distribution<int> dim(2, 10);
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = dim(rng);
    const ReluLayer layer = random_layer(d, d, rng);
    const AffineMap& a = layer.affine();
    const DualFrame& f = layer.frame();
    auto ctx = [&] { return json{{"layer", layer_json(layer)}}; };
    props[0].residual((a.matrix() * f.duals() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), ctx);
    props[1].residual(a.evaluate(f.apex()).norm() / (1.0 + a.offset().norm()), ctx);
    const Vector x = random_gaussian(d, rng, 3.0);
    const Vector rebuilt = f.reconstruct(a.evaluate(x));
    props[2].residual((rebuilt - x).norm() / (1.0 + x.norm()), ctx);
  }
  for (int trial = 0; trial < 200; ++trial) {
    const int n = dim(rng);
    const int m = std::uniform_int_distribution<int>(1, n - 1)(rng);
    const ReluLayer layer = random_layer(m, n, rng);
    const Matrix& a = layer.affine().matrix();
    const DualFrame& f = layer.frame();
    auto ctx = [&] { return json{{"layer", layer_json(layer)}}; };
    props[3].residual((a * f.duals() - Matrix::Identity(m, m)).cwiseAbs().maxCoeff(), ctx);
    props[4].residual((a * *f.complement_basis()).cwiseAbs().maxCoeff(), ctx);
    props[5].residual((project_to_row_span(f, f.apex()) - f.apex()).norm() /
                          (1.0 + f.apex().norm()),
                      ctx);
  }
  return finish(props);
}

VerifyOutcome suite_partition(std::mt19937_64& rng) {
  std::vector<Property> props{{"sector_counts"},
                              {"sectors_distinct_and_disjoint"},
                              {"classification_roundtrip", 1e-9},
                              {"order_axioms"}};
  for (int d = 1; d <= 10; ++d) {
    const auto all = enumerate_sectors(d);
    std::uint64_t expected = 1;
    for (int i = 0; i < d; ++i) expected *= 3;
    props[0].check(all.size() == expected, [&] { return json{{"d", d}, {"count", all.size()}}; });
    const auto table = sector_count_table(d);
    for (int k = 0; k <= d; ++k) {
      const auto by_dim = enumerate_sectors(d, k);
      props[0].check(by_dim.size() == table[static_cast<std::size_t>(k)],
                     [&] { return json{{"d", d}, {"k", k}, {"count", by_dim.size()}}; });
    }
    std::set<std::pair<IndexMask, IndexMask>> seen;
    bool ok = true;
    for (const auto& s : all) {
      ok = ok && (s.plus() & s.minus()) == 0 && seen.insert({s.plus(), s.minus()}).second;
    }
    props[1].check(ok, [&] { return json{{"d", d}}; });
  }
  std::uniform_int_distribution<int> dim(1, 8);
  for (int trial = 0; trial < 10000; ++trial) {
    const int d = dim(rng);
    const ReluLayer layer = random_layer(d, d, rng);
    const DualFrame& f = layer.frame();
    const Vector x = random_gaussian(d, rng, 3.0);
    const Vector lambdas = expand(f, x).lambdas;
    const double tol = default_zero_tol(lambdas);
    const SectorIndex s = classify_coefficients(lambdas, tol);
    Vector coeffs = Vector::Zero(d);
    for (int i = 0; i < d; ++i) {
      if (s.plus() >> i & 1) coeffs(i) = std::abs(lambdas(i));
      if (s.minus() >> i & 1) coeffs(i) = -std::abs(lambdas(i));
    }
    const double err = (f.reconstruct(coeffs) - x).norm() / (1.0 + x.norm());
    props[2].residual(err, [&] { return json{{"layer", layer_json(layer)}, {"x", to_json(x)}}; });
  }
  for (int d = 1; d <= 4; ++d) {
    const auto all = enumerate_sectors(d);
    bool ok = true;
    for (const auto& a : all) {
      ok = ok && leq(a, a);
      for (const auto& b : all) {
        if (leq(a, b) && leq(b, a)) ok = ok && a == b;
        if (!leq(a, b)) continue;
        for (const auto& c : all) {
          if (leq(b, c)) ok = ok && leq(a, c);
        }
      }
    }
    props[3].check(ok, [&] { return json{{"d", d}}; });
  }
  return finish(props);
}

VerifyOutcome suite_image(std::mt19937_64& rng) {
  std::vector<Property> props{{"image_of_sectors"}};
  for (int d = 1; d <= 4; ++d) {
    const ReluLayer layer = random_layer(d, d, rng);
    const DualFrame canonical = build_dual_frame(AffineMap::identity(d));
    for (const auto& s : enumerate_sectors(d)) {
      for (int k = 0; k < 100; ++k) {
        const Vector x = random_sector_point(layer.frame(), s, rng);
        const SectorIndex got = classify(canonical, layer.evaluate(x));
        props[0].check(got == image_of_sector(s), [&] {
          return json{{"layer", layer_json(layer)}, {"sector", to_json(s)}, {"x", to_json(x)},
                      {"got", to_json(got)}};
        });
      }
    }
  }
  return finish(props);
}

VerifyOutcome suite_preimage(std::mt19937_64& rng) {
  std::vector<Property> props{{"preimage_sound", 1e-9},
                              {"membership_accepts_samples"},
                              {"membership_rejects_wrong_sign"},
                              {"dimension_law"},
                              {"negative_target_empty"}};
  std::uniform_int_distribution<int> dim(1, 3);
  std::bernoulli_distribution zero(0.4);
  std::exponential_distribution<double> expo(1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = dim(rng);
    const ReluLayer layer = random_layer(d, d, rng);
    Vector y(d);
    int zeros = 0;
    for (int i = 0; i < d; ++i) {
      y(i) = zero(rng) ? 0.0 : 0.1 + expo(rng);
      zeros += y(i) == 0.0;
    }
    const auto pre = preimage_of_point(layer, y);
    auto ctx = [&] { return json{{"layer", layer_json(layer)}, {"y", to_json(y)}}; };
    props[3].check(pre && pre->generators.cols() == zeros, ctx);
    for (const Vector& x : sample_preimage(*pre, 20, 2.0, rng)) {
      props[0].residual((layer.evaluate(x) - y).cwiseAbs().maxCoeff() / (1.0 + y.norm()), ctx);
      props[1].check(membership_oracle(layer, *pre, x), ctx);
    }
    for (int i : pre->free_indices) {
      const Vector x = pre->base + layer.frame().dual(i);
      props[2].check(!membership_oracle(layer, *pre, x) &&
                         (layer.evaluate(x) - y).cwiseAbs().maxCoeff() > 1e-6,
                     ctx);
    }
    Vector bad = y;
    bad(0) = -0.5;
    props[4].check(!preimage_of_point(layer, bad).has_value(), ctx);
  }
  return finish(props);
}

VerifyOutcome suite_decomposition(std::mt19937_64& rng) {
  std::vector<Property> props{{"decomposition", 1e-9}, {"projection_idempotent", 1e-9}};
  std::uniform_int_distribution<int> dim(2, 8);
  for (int trial = 0; trial < 10000; ++trial) {
    const int d = dim(rng);
    const ReluLayer layer = random_layer(d, d, rng);
    const Vector x = random_gaussian(d, rng, 3.0);
    auto ctx = [&] { return json{{"layer", layer_json(layer)}, {"x", to_json(x)}}; };
    props[0].residual(layer.decompose_residual(x), ctx);
    const Vector p = layer.project_to_cone(x);
    props[1].residual((layer.project_to_cone(p) - p).norm() / (1.0 + p.norm()), ctx);
  }
  return finish(props);
}

VerifyOutcome suite_count(std::mt19937_64& rng) {
  std::vector<Property> props{{"count_formula"},
                              {"count_oracle"},
                              {"sign_law"},
                              {"geometric_consistency", 1e-10},
                              {"d3_counts_7_6_4"}};
  for (int d = 2; d <= 8; ++d) {
    for (int trial = 0; trial < 500; ++trial) {
      const ReluLayer layer = random_layer(d, d, rng);
      const OutputLayer out = random_output(d, rng);
      const DecisionBoundary b = enumerate_pieces(layer, out);
      auto ctx = [&] {
        return json{{"layer", layer_json(layer)}, {"output", output_json(out)}, {"m", b.m}};
      };
      const std::uint64_t formula = (std::uint64_t{1} << d) - (std::uint64_t{1} << b.m);
      props[0].check(b.pieces.size() == formula && b.piece_count == formula, ctx);
      props[1].check(piece_count_oracle(layer, out) == formula, ctx);
      bool signs = true;
      double geo = 0.0;
      for (int i = 0; i < d; ++i) {
        signs = signs && ((b.values.t(i) > 0) == (b.output.weights(i) > 0));
        geo = std::max(geo, std::abs(b.hyperplane.normal.dot(layer.frame().dual(i)) -
                                     b.output.weights(i)) /
                                (1.0 + std::abs(b.output.weights(i))));
      }
      props[2].check(signs, ctx);
      props[3].residual(geo, ctx);
    }
  }
  const std::map<int, std::uint64_t> expected_d3{{0, 7}, {1, 6}, {2, 4}};
  for (const auto& [m, count] : expected_d3) {
    const DecisionBoundary b = canonical_boundary(3, m);
    props[4].check(b.piece_count == count && b.pieces.size() == count,
                   [&] { return json{{"m", m}, {"count", b.piece_count}}; });
  }
  return finish(props);
}

VerifyOutcome suite_canonical(std::mt19937_64& rng) {
  std::vector<Property> props{{"mapped_samples_on_boundary", 1e-7},
                              {"piece_bijection"},
                              {"map_invertible"}};
  constexpr int d = 4;
  for (int trial = 0; trial < 100; ++trial) {
    const ReluLayer layer = random_layer(d, d, rng);
    const OutputLayer out = random_output(d, rng);
    const DecisionBoundary actual = enumerate_pieces(layer, out);
    const CanonicalReduction& r = actual.canonical;
    const DecisionBoundary canon = canonical_boundary(d, actual.m);
    auto ctx = [&] { return json{{"layer", layer_json(layer)}, {"output", output_json(out)}}; };
    props[2].check(r.rcond >= kMinRcond, ctx);
    std::set<IndexMask> actual_pieces;
    for (const auto& p : actual.pieces) actual_pieces.insert(p.j);
    const int per_piece = 1000 / static_cast<int>(canon.pieces.size()) + 1;
    for (const auto& piece : canon.pieces) {
      const IndexMask target = r.map_piece(piece.j);
      props[1].check(actual_pieces.count(target) == 1, ctx);
      for (const Vector& x : sample_piece(piece, per_piece, 2.0, rng)) {
        const Vector mx = r.map.evaluate(x);
        props[0].residual(std::abs(shallow_output(layer, out, mx)), ctx);
        props[1].check(classify(layer.frame(), mx).plus() == target, ctx);
      }
    }
  }
  return finish(props);
}

VerifyOutcome suite_deep(std::mt19937_64& rng) {
  std::vector<Property> props{{"rewrite_equivalence", 1e-8},
                              {"recursion_soundness", 1e-7},
                              {"shallow_agreement"}};
  std::uniform_int_distribution<int> depth(1, 4);
  std::uniform_int_distribution<int> width(2, 6);
  for (int trial = 0; trial < 20; ++trial) {
    const ReluNetwork net = random_network(depth(rng), width(rng), rng);
    const ComposedAffine rewrite = canonical_structure(net);
    for (int s = 0; s < 500; ++s) {
      const Vector x = random_gaussian(net.in_dim(), rng, 3.0);
      props[0].residual(std::abs(net.evaluate(x) - rewrite.evaluate(x)), [&] {
        return json{{"depth", net.depth()}, {"x", to_json(x)}};
      });
    }
  }
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 2;
    const ReluNetwork net = random_network(n, 2 + trial % 3, rng);
    const RecursionResult res = pull_back_all(net, 20, rng);
    for (std::size_t l = 1; l < res.levels.size(); ++l) {
      for (double r : res.levels[l].residuals) {
        props[1].residual(r, [&] { return json{{"level", res.levels[l].level}}; });
      }
    }
  }
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 3;
    const ReluNetwork net = random_network(1, d, rng);
    const DecisionBoundary b = enumerate_pieces(net.layer(1), net.output());
    const RecursionResult res = pull_back_all(net, 20, rng);
    std::set<IndexMask> hit;
    bool on_pieces = res.levels.size() == 2;
    if (on_pieces) {
      for (const Vector& x : res.levels[1].points) {
        bool found = false;
        for (const auto& p : b.pieces) {
          if (piece_contains(p, x)) {
            hit.insert(p.j);
            found = true;
            break;
          }
        }
        on_pieces = on_pieces && found;
      }
    }
    props[2].check(on_pieces && hit.size() == b.pieces.size(),
                   [&] { return json{{"d", d}, {"pieces_hit", hit.size()}}; });
  }
  return finish(props);
}

}  // namespace

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> names{"duality", "partition",     "image", "preimage",
                                              "decomposition", "count", "canonical", "deep"};
  return names;
}

VerifyOutcome run_verify(const std::string& suite, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  if (suite == "duality") return suite_duality(rng);
  if (suite == "partition") return suite_partition(rng);
  if (suite == "image") return suite_image(rng);
  if (suite == "preimage") return suite_preimage(rng);
  if (suite == "decomposition") return suite_decomposition(rng);
  if (suite == "count") return suite_count(rng);
  if (suite == "canonical") return suite_canonical(rng);
  if (suite == "deep") return suite_deep(rng);
  throw GeometryError(ErrorCode::Schema, "unknown verify suite '" + suite + "'");
}

}  // namespace relugeom
