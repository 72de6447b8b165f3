// relugeom: command-line front end for dual frames, sector partitions,
// preimages and exact shallow decision boundaries of ReLU layers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relugeom/decision_boundary.hpp"
#include "relugeom/deep_network.hpp"
#include "relugeom/io.hpp"
#include "relugeom/partition.hpp"
#include "relugeom/relu_layer.hpp"
#include "relugeom/verify.hpp"

using namespace relugeom;
using io::json;
using io::to_json;

namespace {

struct Options {
  std::string input;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::string format = "json";
  std::string obj;
  std::string box = "-5,5";
  std::string csv;
  bool timing = false;

  std::vector<std::string> points;
  int samples = 0;
  int per_face = 20;
  std::string suite;
};

/// Accumulates numeric checks, each reported next to its tolerance.
class Checks {
 public:
  void add(const std::string& name, double value, double tol) {
    const bool ok = std::isfinite(value) && value < tol;
    all_ok_ = all_ok_ && ok;
    list_.push_back(json{{"name", name}, {"value", value}, {"tolerance", tol}, {"passed", ok}});
  }
  void add_equal(const std::string& name, std::uint64_t got, std::uint64_t expected) {
    const bool ok = got == expected;
    all_ok_ = all_ok_ && ok;
    list_.push_back(
        json{{"name", name}, {"value", got}, {"expected", expected}, {"passed", ok}});
  }
  bool ok() const { return all_ok_; }
  const json& list() const { return list_; }

 private:
  json list_ = json::array();
  bool all_ok_ = true;
};

Vector parse_point(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw GeometryError(ErrorCode::Schema, "cannot parse coordinate '" + item + "'");
    }
  }
  if (values.empty()) throw GeometryError(ErrorCode::Schema, "empty point");
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::pair<double, double> parse_box(const std::string& text) {
  const Vector v = parse_point(text);
  if (v.size() != 2 || !(v(0) < v(1))) {
    throw GeometryError(ErrorCode::Schema, "--box expects 'lo,hi' with lo < hi");
  }
  return {v(0), v(1)};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GeometryError(ErrorCode::Schema, "cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Input {
  json doc;
  std::string digest;
};

Input load_input(const Options& opt) {
  if (opt.input.empty()) throw GeometryError(ErrorCode::Schema, "--input FILE is required");
  const std::string bytes = read_file(opt.input);
  Input in;
  try {
    in.doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw GeometryError(ErrorCode::Schema, std::string("invalid JSON: ") + e.what());
  }
  in.digest = io::sha256_hex(bytes);
  return in;
}

std::vector<io::LayerSpec> layer_specs(const json& doc) {
  if (doc.is_object() && doc.contains("layers")) return io::parse_network_spec(doc).layers;
  return {io::parse_layer_spec(doc)};
}

std::uint64_t effective_seed(const Options& opt, const std::optional<std::uint64_t>& spec_seed) {
  return opt.seed.value_or(spec_seed.value_or(0));
}

void write_artifact(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GeometryError(ErrorCode::Schema, "cannot write '" + path + "'");
  out << contents;
}

json cmd_analyze(const Options& opt, const Input& in, Checks& checks) {
  json layers = json::array();
  for (const auto& spec : layer_specs(in.doc)) {
    const AffineMap affine = spec.affine();
    const DualFrame frame = build_dual_frame(affine);
    const int d = static_cast<int>(affine.out_dim());
    const auto table = sector_count_table(d);
    std::uint64_t total = 0;
    for (auto c : table) total += c;
    checks.add("duality_residual", frame.duality_residual(), 1e-9);
    checks.add("apex_residual",
               affine.evaluate(frame.apex()).norm() / (1.0 + affine.offset().norm()), 1e-9);
    json entry{{"frame", to_json(frame)},
               {"sector_counts", {{"total", total}, {"by_dimension", table}}}};
    if (!spec.name.empty()) entry["name"] = spec.name;
    layers.push_back(entry);
  }
  (void)opt;
  return layers.size() == 1 ? layers[0] : json{{"layers", layers}};
}

json cmd_classify(const Options& opt, const Input& in, Checks& checks) {
  const auto specs = layer_specs(in.doc);
  const DualFrame frame = build_dual_frame(specs.front().affine());
  if (opt.points.empty()) throw GeometryError(ErrorCode::Schema, "--point is required");
  json out = json::array();
  for (const auto& text : opt.points) {
    const Vector x = parse_point(text);
    const Vector lambdas = expand(frame, x).lambdas;
    const double zero_tol = opt.tol.value_or(default_zero_tol(lambdas));
    const SectorIndex s = classify_coefficients(lambdas, zero_tol);
    const Vector rebuilt = frame.reconstruct(lambdas);
    const Vector target = frame.contracting() ? project_to_row_span(frame, x) : x;
    checks.add("reconstruction", (rebuilt - target).norm() / (1.0 + x.norm()), 1e-9);
    out.push_back(json{{"point", to_json(x)},
                       {"lambdas", to_json(lambdas)},
                       {"sector", to_json(s)},
                       {"dimension", s.dimension()},
                       {"zero_tol", zero_tol},
                       {"near_boundary", near_sector_boundary(lambdas, zero_tol)}});
  }
  return json{{"points", out}};
}

json cmd_preimage(const Options& opt, const Input& in, Checks& checks) {
  const auto specs = layer_specs(in.doc);
  const ReluLayer layer(specs.front().affine());
  if (opt.points.size() != 1) throw GeometryError(ErrorCode::Schema, "preimage needs one --point");
  const Vector y = parse_point(opt.points.front());
  const auto pre = preimage_of_point(layer, y, opt.tol.value_or(kCodomainZeroTol));
  if (!pre) return json{{"target", to_json(y)}, {"empty", true}};
  json out = to_json(*pre);
  out["empty"] = false;
  if (opt.samples > 0) {
    std::mt19937_64 rng(effective_seed(opt, std::nullopt));
    json pts = json::array();
    double worst = 0.0;
    for (const Vector& x : sample_preimage(*pre, opt.samples, 1.0, rng)) {
      worst = std::max(worst, (layer.evaluate(x) - y).cwiseAbs().maxCoeff() / (1.0 + y.norm()));
      pts.push_back(to_json(x));
    }
    checks.add("sample_image_residual", worst, 1e-9);
    out["samples"] = pts;
  }
  return out;
}

json cmd_boundary(const Options& opt, const Input& in, Checks& checks, std::string& csv_out) {
  const io::NetworkSpec spec = io::parse_network_spec(in.doc);
  if (spec.layers.size() != 1) {
    throw GeometryError(ErrorCode::Schema, "boundary needs a network with exactly one layer");
  }
  const ReluNetwork net = spec.network();
  const ReluLayer& layer = net.layer(1);
  const DecisionBoundary b = enumerate_pieces(layer, net.output());
  json out = to_json(b);

  checks.add("intersection_residual", intersection_residual(layer, b.output, b.values), 1e-9);
  const std::uint64_t oracle = piece_count_oracle(layer, net.output());
  checks.add_equal("piece_count_vs_oracle", b.piece_count, oracle);
  checks.add_equal("piece_count_vs_enumeration", b.piece_count, b.pieces.size());
  out["oracle_piece_count"] = oracle;

  if (opt.samples > 0) {
    std::mt19937_64 rng(effective_seed(opt, spec.seed));
    std::vector<io::LabeledPoint> rows;
    double worst = 0.0, sum = 0.0;
    for (const auto& piece : b.pieces) {
      for (Vector& x : sample_piece(piece, opt.samples, 1.0, rng)) {
        const double r = std::abs(net.evaluate(x));
        worst = std::max(worst, r);
        sum += r;
        rows.push_back({piece.j, std::move(x), r});
      }
    }
    const double tol = 1e-8 * (1.0 + std::abs(b.output.bias));
    checks.add("sample_zero_level", worst, tol);
    out["samples"] = json{{"count", rows.size()},
                          {"max_residual", worst},
                          {"mean_residual", rows.empty() ? 0.0 : sum / rows.size()}};
    std::ostringstream os;
    io::write_boundary_csv(os, rows);
    csv_out = os.str();
    if (!opt.csv.empty()) write_artifact(opt.csv, csv_out);
  }
  if (!opt.obj.empty()) {
    const auto [lo, hi] = parse_box(opt.box);
    std::ostringstream os;
    const int faces = io::write_obj(os, layer, b, lo, hi);
    write_artifact(opt.obj, os.str());
    out["obj"] = json{{"path", opt.obj}, {"faces", faces}, {"box", {lo, hi}}};
  }
  return out;
}

json cmd_deep_boundary(const Options& opt, const Input& in, Checks& checks,
                       std::string& csv_out) {
  const io::NetworkSpec spec = io::parse_network_spec(in.doc);
  const ReluNetwork net = spec.network();
  std::mt19937_64 rng(effective_seed(opt, spec.seed));
  const RecursionResult res = pull_back_all(net, opt.per_face, rng);

  json levels = json::array();
  for (const auto& level : res.levels) {
    double worst = 0.0, sum = 0.0;
    for (double r : level.residuals) {
      worst = std::max(worst, r);
      sum += r;
    }
    if (level.level <= net.depth()) {
      checks.add("level_" + std::to_string(level.level) + "_zero_condition", worst, 1e-7);
    }
    levels.push_back(json{{"level", level.level},
                          {"count", level.points.size()},
                          {"max_residual", worst},
                          {"mean_residual", level.points.empty() ? 0.0 : sum / level.points.size()}});
  }
  json out{{"depth", net.depth()}, {"levels", levels}};
  out["empty_level"] = res.empty_level ? json(*res.empty_level) : json(nullptr);

  if (net.depth() == 1 && !res.empty_level && net.layer(1).in_dim() == net.layer(1).out_dim()) {
    const DecisionBoundary b = enumerate_pieces(net.layer(1), net.output());
    std::size_t off_piece = 0;
    std::vector<IndexMask> hit;
    for (const Vector& x : res.levels.back().points) {
      bool found = false;
      for (const auto& p : b.pieces) {
        if (piece_contains(p, x)) {
          if (std::find(hit.begin(), hit.end(), p.j) == hit.end()) hit.push_back(p.j);
          found = true;
          break;
        }
      }
      off_piece += !found;
    }
    checks.add_equal("shallow_points_off_enumerated_pieces", off_piece, 0);
    checks.add_equal("shallow_pieces_hit", hit.size(), b.pieces.size());
  }

  std::vector<BoundarySampleSet> emitted(res.levels.begin() + 1, res.levels.end());
  std::ostringstream os;
  io::write_deep_csv(os, emitted);
  csv_out = os.str();
  if (!opt.csv.empty()) write_artifact(opt.csv, csv_out);
  return out;
}

json error_body(const GeometryError& e) {
  json body{{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (e.depth()) body["depth"] = *e.depth();
  return body;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometry of fully connected ReLU layers"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--input", opt.input, "LayerSpec or NetworkSpec JSON file");
  app.add_option("--seed", opt.seed, "Random seed (default: spec seed, else 0)");
  app.add_option("--tol", opt.tol, "Override the zero tolerance");
  app.add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--obj", opt.obj, "Write an OBJ mesh of the boundary (d = 3)");
  app.add_option("--box", opt.box, "Clipping box 'lo,hi' for --obj");
  app.add_option("--csv", opt.csv, "Write sampled points as CSV");
  app.add_flag("--timing", opt.timing, "Include wall time in the report");

  auto* analyze = app.add_subcommand("analyze", "Dual frame, apex and sector counts");
  auto* classify_cmd = app.add_subcommand("classify", "Sector of one or more points");
  classify_cmd->add_option("--point", opt.points, "Comma-separated coordinates")->required();
  auto* preimage = app.add_subcommand("preimage", "Preimage of a codomain point");
  preimage->add_option("--point", opt.points, "Comma-separated coordinates")->required();
  preimage->add_option("--samples", opt.samples, "Number of preimage samples");
  auto* boundary = app.add_subcommand("boundary", "Exact decision boundary of a shallow net");
  boundary->add_option("--samples", opt.samples, "Samples per piece");
  auto* deep = app.add_subcommand("deep-boundary", "Sampled boundary recursion for deep nets");
  deep->add_option("--per-face", opt.per_face, "Seed samples per orthant face");
  auto* verify = app.add_subcommand("verify", "Run an oracle suite");
  verify->add_option("suite", opt.suite, "Suite name")
      ->required()
      ->check(CLI::IsMember(verify_suites()));
  for (auto* sub : {analyze, classify_cmd, preimage, boundary, deep, verify}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  json command = json::array();
  for (int i = 1; i < argc; ++i) command.push_back(argv[i]);
  const auto start = std::chrono::steady_clock::now();

  json report{{"command", command}};
  Checks checks;
  std::string csv;
  int status = 0;
  try {
    if (*verify) {
      const std::uint64_t seed = opt.seed.value_or(0);
      const VerifyOutcome v = run_verify(opt.suite, seed);
      report["input_digest"] = nullptr;
      report["results"] = json{{"suite", opt.suite}, {"seed", seed}, {"properties", v.report}};
      report["passed"] = v.passed;
      if (!v.passed) {
        report["counterexample"] = v.counterexample;
        status = 1;
      }
    } else {
      const Input in = load_input(opt);
      report["input_digest"] = in.digest;
      if (*analyze) report["results"] = cmd_analyze(opt, in, checks);
      if (*classify_cmd) report["results"] = cmd_classify(opt, in, checks);
      if (*preimage) report["results"] = cmd_preimage(opt, in, checks);
      if (*boundary) report["results"] = cmd_boundary(opt, in, checks, csv);
      if (*deep) report["results"] = cmd_deep_boundary(opt, in, checks, csv);
      report["checks"] = checks.list();
      report["passed"] = checks.ok();
      if (!checks.ok()) status = 1;
    }
  } catch (const GeometryError& e) {
    report["error"] = error_body(e);
    report["passed"] = false;
    std::cout << io::dump_json(report) << '\n';
    return exit_code_for(e.code());
  }

  if (opt.timing) {
    report["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  if (opt.format == "csv" && !csv.empty()) {
    std::cout << csv;
  } else {
    std::cout << io::dump_json(report) << '\n';
  }
  return status;
}
