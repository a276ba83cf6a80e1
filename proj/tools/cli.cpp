#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "minpart/analytic.hpp"
#include "minpart/eigensolve.hpp"
#include "minpart/errors.hpp"
#include "minpart/extract.hpp"
#include "minpart/format.hpp"
#include "minpart/grid.hpp"
#include "minpart/relax.hpp"
#include "minpart/tilings.hpp"

namespace minpart::cli {
namespace {

using nlohmann::ordered_json;

constexpr const char* kSweepSchema =
    "CSV columns (header row first, one row per b, ascending):\n"
    "  b                 torus height, T(1,b)\n"
    "  strip_energy      k^2 pi^2, energy of k vertical strips\n"
    "  hex_lambda1       FD Dirichlet lambda1 of one cell of the 120-degree hexagonal tiling;\n"
    "                    empty when b <= b_H(k)\n"
    "  multistart_energy exact energy of the best extracted partition; empty when starts = 0\n"
    "                    or the point failed\n"
    "  error             failure message for this b, empty on success\n"
    "Numbers carry 12 significant digits.";

// Options of one subcommand that may also come from the --config file. Keys are the long flag
// names with '-' replaced by '_'.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {
    // Long form only: squarewell has an option named --h.
    app_->set_help_flag("--help", "Print this help message and exit");
    app_->add_option("--config", config_path_, "JSON file with option values (flags win)");
  }

  template <class T>
  CLI::Option* add(const std::string& flag, T& var, const std::string& help) {
    CLI::Option* opt = app_->add_option("--" + flag, var, help)->capture_default_str();
    std::string key = flag;
    std::replace(key.begin(), key.end(), '-', '_');
    entries_[key] = {opt, [&var](const nlohmann::json& v) { var = v.get<T>(); }};
    return opt;
  }

  CLI::App* app() const { return app_; }

  void apply_config() const {
    if (config_path_.empty()) return;
    std::ifstream in(config_path_);
    require(static_cast<bool>(in), "cannot open config file " + config_path_);
    nlohmann::json cfg;
    try {
      cfg = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw PreconditionError("config file " + config_path_ + ": " + e.what());
    }
    require(cfg.is_object(), "config file must hold a JSON object");
    for (const auto& [key, value] : cfg.items()) {
      auto it = entries_.find(key);
      require(it != entries_.end(), "unknown config key '" + key + "'");
      if (it->second.option->count() > 0) continue;
      try {
        it->second.set(value);
      } catch (const nlohmann::json::exception& e) {
        throw PreconditionError("config key '" + key + "': " + e.what());
      }
    }
  }

 private:
  struct Entry {
    CLI::Option* option = nullptr;
    std::function<void(const nlohmann::json&)> set;
  };
  CLI::App* app_;
  std::string config_path_;
  std::map<std::string, Entry> entries_;
};

ordered_json num(double x) { return round12(x); }

ordered_json num_array(const std::vector<double>& xs) {
  ordered_json a = ordered_json::array();
  for (double x : xs) a.push_back(round12(x));
  return a;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  require(static_cast<bool>(f), "cannot write " + path);
  return f;
}

// Writes to the named file, or to `out` when the path is empty or "-".
void emit(const std::string& path, std::ostream& out, const std::string& text) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    auto f = open_output(path);
    f << text;
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

// Shared relaxation settings for optimize and sweep.
struct RelaxOptions {
  RelaxParams params;
  int starts = 5;
  int jobs = 1;
  double min_fraction = ExtractOptions{}.min_fraction;

  void add_to(Options& o) {
    o.add("C", params.C, "final penalty constant");
    o.add("C-start", params.C_start, "first penalty of the continuation (0: C/10)");
    o.add("C-factor", params.C_factor, "penalty growth between continuation stages");
    o.add("p-schedule", params.p_schedule, "increasing l^p exponents")->delimiter(',');
    o.add("step0", params.step0, "initial step (0: 1e-2 |T| / C)");
    o.add("backtrack", params.backtrack, "step shrink factor");
    o.add("max-iters", params.max_iters, "iteration cap per p");
    o.add("rel-tol", params.rel_tol, "relative energy change ending a p phase");
    o.add("window", params.window, "iterations over which rel-tol is measured");
    o.add("grad-tol", params.grad_tol, "projected-gradient stop");
    o.add("eig-tol", params.eig_tol, "eigensolver residual tolerance");
    o.add("seed", params.seed, "seed of the first start");
    o.add("starts", starts, "number of random starts");
    o.add("jobs", jobs, "worker threads");
    o.add("min-fraction", min_fraction, "extraction: smallest kept component, fraction of nodes");
  }

  void validate(bool allow_zero_starts) const {
    params.validate();
    require(starts >= (allow_zero_starts ? 0 : 1), "starts must be >= 1");
    require(jobs >= 1, "jobs must be >= 1");
    require(min_fraction >= 0.0 && min_fraction < 1.0, "min-fraction must lie in [0, 1)");
  }
};

TorusGeometry geometry(double a, double b) {
  TorusGeometry g{a, b};
  g.validate();
  return g;
}

// ---- bounds ------------------------------------------------------------------------------------

struct BoundsCmd {
  int k = 3;

  void add_to(Options& o) { o.add("k", k, "number of cells"); }

  int run(std::ostream& out) const {
    const CertificateReport r = transition_bounds(k);
    ordered_json j;
    j["k"] = r.k;
    j["bS_lower"] = num(r.bS_lower);
    j["bS_upper"] = num(r.bS_upper);
    j["bS_upper_strict"] = r.bS_upper_strict;
    j["bS_bounds_transition"] = r.bS_bounds_transition;
    j["bk_even"] = r.bk_even ? num(*r.bk_even) : ordered_json(nullptr);
    j["bk_conjectured"] = r.bk_conjectured ? num(*r.bk_conjectured) : ordered_json(nullptr);
    j["bk_conjectured_proven"] = r.bk_conjectured_proven;
    j["V_used"] = num(r.V_used);
    j["mu1_lower_closed"] = num(r.mu1_lower_closed);
    j["xi1"] = num(r.xi1);
    j["rho1"] = num(r.rho1);
    out << j.dump(2) << '\n';
    return kExitOk;
  }
};

// ---- spectrum ----------------------------------------------------------------------------------

struct SpectrumCmd {
  double a = 1.0;
  double b = 1.0;
  int count = 10;
  int fd_resolution = 0;

  void add_to(Options& o) {
    o.add("a", a, "torus width");
    o.add("b", b, "torus height");
    o.add("count", count, "number of distinct eigenvalues");
    o.add("fd-resolution", fd_resolution, "also list FD periodic eigenvalues (nodes per unit length; 0: off)");
  }

  int run(std::ostream& out) const {
    const TorusGeometry geom = geometry(a, b);
    require(count >= 1, "count must be >= 1");
    require(fd_resolution == 0 || fd_resolution >= 8, "fd-resolution must be 0 or >= 8");
    ordered_json j;
    j["a"] = num(a);
    j["b"] = num(b);
    ordered_json entries = ordered_json::array();
    int total = 0;
    for (const auto& e : torus_spectrum(geom, count)) {
      entries.push_back({{"value", num(e.value)}, {"multiplicity", e.multiplicity}});
      total += e.multiplicity;
    }
    j["analytic"] = entries;
    if (fd_resolution > 0) {
      const Grid grid = Grid::with_resolution(geom, static_cast<int>(std::lround(fd_resolution * a)));
      const auto pairs = smallest_eigenpairs(assemble_periodic_laplacian(grid), total);
      std::vector<double> values;
      for (const auto& p : pairs) values.push_back(p.value);
      j["fd_nx"] = grid.nx();
      j["fd_ny"] = grid.ny();
      j["fd"] = num_array(values);
    }
    out << j.dump(2) << '\n';
    return kExitOk;
  }
};

// ---- squarewell --------------------------------------------------------------------------------

struct SquareWellCmd {
  double h = 4.0;
  int points = 4000;

  void add_to(Options& o) {
    o.add("h", h, "well parameter, > 0");
    o.add("points", points, "interior FD points of the 1D operator");
  }

  int run(std::ostream& out) const {
    require(h > 0.0 && std::isfinite(h), "h must be positive");
    OneDimOperatorSpec spec;
    spec.parameter = h;
    spec.points = points;
    std::optional<double> mu;
    for (int attempt = 0; attempt < 8 && !mu; ++attempt) {
      try {
        mu = mu1_fd(spec);
      } catch (const NumericalError&) {
        spec.truncation *= 2.0;
      }
    }
    if (!mu) throw NumericalError("squarewell: truncation too small even at " + format12(spec.truncation));
    ordered_json j;
    j["h"] = num(h);
    j["rho1"] = num(rho1(h));
    j["xi1"] = num(xi1(h));
    j["mu1_lower_closed"] = num(std::numbers::pi * std::numbers::pi * h * h / 32.0);
    j["mu1_fd"] = num(*mu);
    j["truncation"] = num(spec.truncation);
    out << j.dump(2) << '\n';
    return kExitOk;
  }
};

// ---- tiling / paircompat -----------------------------------------------------------------------

struct TilingChoice {
  std::string kind = "hexagons";
  int k = 3;
  double a = 1.0;
  double b = 1.0;
  double alpha = -1.0;

  void add_to(Options& o) {
    o.add("kind", kind, "strips | hexagons | squares5 | double_cover3")
        ->check(CLI::IsMember({"strips", "hexagons", "squares5", "double_cover3"}));
    o.add("k", k, "number of cells (strips, hexagons)");
    o.add("a", a, "torus width (strips)");
    o.add("b", b, "torus height (strips, hexagons)");
    o.add("alpha", alpha, "double-cover mixing coefficient (< 0: scanned default)");
  }

  TilingSpec build(int resolution) const {
    if (kind == "strips") return strips(k, geometry(a, b));
    if (kind == "hexagons") return hexagonal_tiling(k, b);
    if (kind == "squares5") return five_squares();
    require(kind == "double_cover3", "unknown tiling kind '" + kind + "'");
    return double_cover_3partition(alpha >= 0.0 ? alpha : double_cover_alpha_default(resolution));
  }
};

struct TilingCmd {
  TilingChoice choice;
  int resolution = 128;
  std::string output;
  std::string labels;

  void add_to(Options& o) {
    choice.add_to(o);
    o.add("resolution", resolution, "FD nodes per unit length");
    o.add("output", output, "JSON report path (default stdout)");
    o.add("labels", labels, "write the rasterized partition as P2 to this path");
  }

  int run(std::ostream& out) const {
    require(resolution >= 16, "resolution must be >= 16");
    const TilingSpec spec = choice.build(resolution);
    std::ostringstream raw;
    write_tiling_json(raw, spec);
    ordered_json j = ordered_json::parse(raw.str());
    if (!spec.cells.empty()) {
      const TilingCheck c = check_tiling(spec, resolution);
      j["check"] = {{"max_area_error", num(c.max_area_error)},
                    {"max_angle_error", num(c.max_angle_error)},
                    {"min_vertex_degree", c.min_vertex_degree},
                    {"max_vertex_degree", c.max_vertex_degree},
                    {"coverage", num(c.coverage)},
                    {"overlap", num(c.overlap)}};
    }
    const StrongPartition part = tiling_partition(spec, resolution);
    j["resolution"] = resolution;
    j["cell_lambda1"] = num_array(part.lambdas);
    j["cell_area"] = num_array(part.areas);
    j["energy"] = num(part.energy);
    if (!labels.empty()) {
      auto f = open_output(labels);
      write_labels_pgm(f, part);
    }
    emit(output, out, j.dump(2) + "\n");
    return kExitOk;
  }
};

struct PairCompatCmd {
  TilingChoice choice;
  int resolution = 128;
  std::string mode = "point_reflection";
  double threshold = 0.02;

  PairCompatCmd() { choice.b = 0.72; }

  void add_to(Options& o) {
    choice.add_to(o);
    o.add("resolution", resolution, "FD nodes per unit length");
    o.add("mode", mode, "point_reflection | mirror")
        ->check(CLI::IsMember({"point_reflection", "mirror"}));
    o.add("threshold", threshold, "relative gap above which the tiling is flagged");
  }

  int run(std::ostream& out) const {
    require(threshold > 0.0, "threshold must be positive");
    require(mode == "mirror" || mode == "point_reflection", "unknown glue mode '" + mode + "'");
    const TilingSpec spec = choice.build(resolution);
    const GlueMode gm = mode == "mirror" ? GlueMode::mirror : GlueMode::point_reflection;
    const PairCompatibility r = pair_compatibility(spec, resolution, gm);
    ordered_json j;
    j["kind"] = tiling_kind_name(spec.kind);
    j["k"] = spec.k;
    j["a"] = num(spec.geom.a);
    j["b"] = num(spec.geom.b);
    j["resolution"] = resolution;
    j["mode"] = mode;
    j["lambda1_cell"] = num(r.lambda1_cell);
    ordered_json sides = ordered_json::array();
    for (std::size_t i = 0; i < r.sides.size(); ++i) {
      const double l2 = r.lambda2_glued[i];
      sides.push_back({{"side", r.sides[i]},
                       {"lambda2_glued", num(l2)},
                       {"gap", num(std::abs(r.lambda1_cell - l2) / r.lambda1_cell)}});
    }
    j["sides"] = sides;
    j["max_gap"] = num(r.max_gap);
    j["threshold"] = num(threshold);
    j["verdict"] = r.max_gap > threshold ? "tiling not minimal here" : "pair compatible";
    out << j.dump(2) << '\n';
    return kExitOk;
  }
};

// ---- optimize ----------------------------------------------------------------------------------

struct OptimizeCmd {
  int k = 3;
  double a = 1.0;
  double b = 1.0;
  int resolution = 128;
  RelaxOptions relax;
  std::string output_dir = ".";

  void add_to(Options& o) {
    o.add("k", k, "number of cells");
    o.add("a", a, "torus width");
    o.add("b", b, "torus height");
    o.add("resolution", resolution, "grid nodes along x; ny = ceil(resolution b / a)");
    relax.add_to(o);
    o.add("output-dir", output_dir, "directory for labels.pgm, labels.csv, report.json, trace.csv");
  }

  int run(std::ostream& out) const {
    relax.validate(false);
    require(k >= 2, "k must be >= 2");
    const Grid grid = Grid::with_resolution(geometry(a, b), resolution);
    std::filesystem::create_directories(output_dir);
    const std::filesystem::path dir(output_dir);
    const MultistartResult best = multistart(grid, k, relax.params, relax.starts, relax.jobs);
    // Re-extract with the requested cleanup threshold when it differs from the default.
    StrongPartition part = best.partition;
    if (relax.min_fraction != ExtractOptions{}.min_fraction) {
      ExtractOptions eo;
      eo.min_fraction = relax.min_fraction;
      part = extract_strong(best.densities, eo);
    }
    const NeighborGraph graph = neighbor_graph(part);
    const BipartiteResult bip = is_bipartite(graph);

    ordered_json j;
    j["k"] = k;
    j["a"] = num(a);
    j["b"] = num(b);
    j["nx"] = grid.nx();
    j["ny"] = grid.ny();
    j["C"] = num(relax.params.C);
    j["seed"] = relax.params.seed;
    j["starts"] = relax.starts;
    j["best_start"] = best.best_start;
    j["relaxed_energy"] = num(best.trace.relaxed_energy);
    j["relaxed_lambdas"] = num_array(best.trace.lambdas);
    j["exact_energy"] = num(part.energy);
    j["lambdas"] = num_array(part.lambdas);
    j["areas"] = num_array(part.areas);
    ordered_json edges = ordered_json::array();
    for (const auto& [u, v] : graph.edges) edges.push_back({u + 1, v + 1});
    j["neighbor_edges"] = edges;
    j["bipartite"] = bip.bipartite;
    if (!bip.bipartite) {
      ordered_json cyc = ordered_json::array();
      for (int v : bip.odd_cycle) cyc.push_back(v + 1);
      j["odd_cycle"] = cyc;
    }
    j["degenerate_seen"] = best.trace.degenerate_seen;
    ordered_json starts = ordered_json::array();
    for (const auto& s : best.starts) {
      ordered_json e;
      e["index"] = s.index;
      e["ok"] = s.ok;
      if (s.ok) {
        e["relaxed_energy"] = num(s.relaxed_energy);
        e["exact_energy"] = num(s.exact_energy);
      } else {
        e["error"] = s.error;
      }
      starts.push_back(e);
    }
    j["start_outcomes"] = starts;
    const std::string report = j.dump(2) + "\n";

    {
      auto f = open_output((dir / "labels.pgm").string());
      write_labels_pgm(f, part);
    }
    {
      auto f = open_output((dir / "labels.csv").string());
      write_labels_csv(f, part);
    }
    {
      auto f = open_output((dir / "trace.csv").string());
      f << "C,p,iteration,energy,step,degenerate\n";
      for (const auto& e : best.trace.entries) {
        f << format12(e.C) << ',' << format12(e.p) << ',' << e.iteration << ',' << format12(e.energy)
          << ',' << format12(e.step) << ',' << (e.degenerate ? 1 : 0) << '\n';
      }
    }
    {
      auto f = open_output((dir / "report.json").string());
      f << report;
    }
    out << report;
    return kExitOk;
  }
};

// ---- sweep -------------------------------------------------------------------------------------

struct SweepCmd {
  int k = 3;
  double b_min = 0.6;
  double b_max = 0.8;
  int steps = 5;
  int resolution = 128;
  RelaxOptions relax;
  std::string output;

  void add_to(Options& o) {
    o.add("k", k, "number of cells, 3..5");
    o.add("b-min", b_min, "first b");
    o.add("b-max", b_max, "last b");
    o.add("steps", steps, "number of b values, evenly spaced");
    o.add("resolution", resolution, "grid nodes per unit length");
    relax.add_to(o);
    o.add("output", output, "CSV path (default stdout)");
  }

  struct Row {
    double b = 0.0;
    double strip = 0.0;
    std::optional<double> hex;
    std::optional<double> multistart;
    std::string error;
  };

  Row evaluate(double b, int inner_jobs) const {
    Row row;
    row.b = b;
    row.strip = strip_energy(k, 1.0);
    try {
      if (b > b_H(k)) row.hex = tiling_cell_lambda1(hexagonal_tiling(k, b), resolution);
      if (relax.starts > 0) {
        const Grid grid = Grid::with_resolution(geometry(1.0, b), resolution);
        ExtractOptions eo;
        eo.min_fraction = relax.min_fraction;
        const auto best = multistart(grid, k, relax.params, relax.starts, inner_jobs);
        row.multistart = relax.min_fraction == ExtractOptions{}.min_fraction
                             ? best.partition.energy
                             : extract_strong(best.densities, eo).energy;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    return row;
  }

  int run(std::ostream& out) const {
    relax.validate(true);
    require(k >= 3 && k <= 5, "sweep: k must be 3, 4 or 5");
    require(steps >= 1, "sweep: steps must be >= 1");
    require(b_min > 0.0 && b_max <= 1.0 && b_min <= b_max, "sweep: need 0 < b_min <= b_max <= 1");
    require(resolution >= 16, "sweep: resolution must be >= 16");
    std::vector<double> bs;
    for (int i = 0; i < steps; ++i) {
      bs.push_back(steps == 1 ? b_min : round12(b_min + (b_max - b_min) * i / (steps - 1)));
    }
    std::vector<Row> rows(bs.size());
    const int workers = std::min<int>(relax.jobs, static_cast<int>(bs.size()));
    const int inner_jobs = std::max(1, relax.jobs / std::max(1, workers));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (std::size_t i = next++; i < bs.size(); i = next++) rows[i] = evaluate(bs[i], inner_jobs);
    };
    if (workers <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    std::ostringstream csv;
    csv << "b,strip_energy,hex_lambda1,multistart_energy,error\n";
    for (const auto& r : rows) {
      csv << format12(r.b) << ',' << format12(r.strip) << ',' << (r.hex ? format12(*r.hex) : "")
          << ',' << (r.multistart ? format12(*r.multistart) : "") << ',' << csv_field(r.error)
          << '\n';
    }
    emit(output, out, csv.str());
    return kExitOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral minimal k-partitions of flat tori T(a,b)", "minpart"};
  app.require_subcommand(1);

  BoundsCmd bounds;
  SpectrumCmd spectrum;
  SquareWellCmd squarewell;
  TilingCmd tiling;
  PairCompatCmd paircompat;
  OptimizeCmd optimize;
  SweepCmd sweep;

  Options o_bounds(app.add_subcommand("bounds", "transition-value bounds and certificate chain (JSON)"));
  bounds.add_to(o_bounds);
  Options o_spectrum(app.add_subcommand("spectrum", "closed-form torus spectrum (JSON)"));
  spectrum.add_to(o_spectrum);
  Options o_squarewell(app.add_subcommand("squarewell", "square-well comparison constants (JSON)"));
  squarewell.add_to(o_squarewell);
  Options o_tiling(app.add_subcommand("tiling", "build and evaluate a candidate tiling (JSON)"));
  tiling.add_to(o_tiling);
  Options o_pair(app.add_subcommand("paircompat", "pair-compatibility gaps of a tiling (JSON)"));
  paircompat.add_to(o_pair);
  Options o_optimize(app.add_subcommand("optimize", "multistart relaxed optimization and extraction"));
  optimize.add_to(o_optimize);
  Options o_sweep(app.add_subcommand("sweep", "energies over a range of b (CSV)"));
  sweep.add_to(o_sweep);
  o_sweep.app()->footer(kSweepSchema);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends
      app.exit(e, out, err);
      return kExitOk;
    }
    app.exit(e, out, err);
    return kExitPrecondition;
  }

  const std::vector<std::pair<Options*, std::function<int()>>> commands = {
      {&o_bounds, [&] { return bounds.run(out); }},
      {&o_spectrum, [&] { return spectrum.run(out); }},
      {&o_squarewell, [&] { return squarewell.run(out); }},
      {&o_tiling, [&] { return tiling.run(out); }},
      {&o_pair, [&] { return paircompat.run(out); }},
      {&o_optimize, [&] { return optimize.run(out); }},
      {&o_sweep, [&] { return sweep.run(out); }},
  };
  try {
    for (const auto& [opts, fn] : commands) {
      if (!opts->app()->parsed()) continue;
      opts->apply_config();
      return fn();
    }
    return kExitPrecondition;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace minpart::cli
