// charvar: command-line driver. Every subcommand writes one JSON report
// (stdout, or <out>/<command>.json) and exits 0 on success, 2 when the
// parameter draw is degenerate or non-generic, 1 on usage errors.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "charvar/embed.hpp"
#include "charvar/io.hpp"
#include "charvar/limits.hpp"
#include "charvar/minors.hpp"
#include "charvar/params.hpp"
#include "charvar/reduce.hpp"
#include "charvar/scan.hpp"
#include "charvar/singular.hpp"
#include "charvar/symbol.hpp"

namespace {

using namespace charvar;

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::string command;
  int n = 5;
  std::uint64_t seed = 1;
  double t = 1e-3;
  std::vector<double> t_list{1e-2, 1e-3, 1e-4};
  std::string params;
  std::string out;
  int samples = 10000;
  int threads = 0;
  int nodes = 50;
  std::vector<int> pair{1, 2};
};

/// Thread count is left out on purpose: it must not change the report.
Json config_json(const RunConfig& cfg) {
  Json j = {{"command", cfg.command}, {"n", cfg.n}, {"seed", cfg.seed}};
  if (!cfg.params.empty()) j["params"] = cfg.params;
  j["t"] = cfg.t;
  j["t_list"] = cfg.t_list;
  j["samples"] = cfg.samples;
  j["nodes"] = cfg.nodes;
  j["pair"] = cfg.pair;
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

ParamSet load_params(RunConfig& cfg) {
  if (cfg.params.empty()) return sample(cfg.n, cfg.seed);
  ParamSet c = load_param_set(cfg.params);
  cfg.n = c.n();
  return c;
}

void write_text(const RunConfig& cfg, const std::string& name, const std::string& body) {
  if (cfg.out.empty()) return;
  std::filesystem::create_directories(cfg.out);
  std::ofstream f(std::filesystem::path(cfg.out) / name);
  if (!f) throw Error(ErrorCode::Usage, "cannot write " + name + " under " + cfg.out);
  f << body;
}

void require_n(const ParamSet& c, int n, const char* what) {
  if (c.n() != n) throw Error(ErrorCode::WrongDimension, std::string(what) + " needs n = " + std::to_string(n));
}

// Each command fills `result` and returns the exit status.
using Command = int (*)(RunConfig&, Json&);

int cmd_sample(RunConfig& cfg, Json& result) {
  const ParamSet c = load_params(cfg);
  result = to_json(c);
  write_text(cfg, "params.json", result.dump(2) + "\n");
  return 0;
}

int cmd_check(RunConfig& cfg, Json& result) {
  const ParamSet c = load_params(cfg);
  if (c.n() == 3) {
    result = {{"passed", true}, {"note", "no genericity conditions for n = 3"}};
    return 0;
  }
  const GenericReport rep = c.n() == 4 ? check_n4_conditions(c) : check_all_pairs(c);
  result = to_json(rep);
  result["tolerance"] = GenericTolerance{}.eps;
  return rep.passed ? 0 : 2;
}

int cmd_limits(RunConfig& cfg, Json& result) {
  const ParamSet c = load_params(cfg);
  if (c.n() == 5) {
    result["case1"] = to_json(case1_points(c));
    result["case2"] = to_json(case2_points(c));
    result["case3"] = to_json(case3_points(c));
    try {
      const auto p = predict_count(c);
      result["prediction"] = {{"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}, {"total", p.total}};
    } catch (const Error& e) {
      result["prediction"] = {{"error", e.what()}};
      return 2;
    }
    return 0;
  }
  const LimitDescription d = lambda_general(c);
  Json fam = Json::array(), tri = Json::array(), quad = Json::array(), fails = Json::array();
  for (const auto& f : d.pair_families)
    fam.push_back({{"zeros", one_based({f.i, f.j})}, {"basis", to_json(f.basis)}});
  for (const auto& z : d.triple_patterns) tri.push_back(one_based(z));
  for (const auto& z : d.quadruple_patterns) quad.push_back(one_based(z));
  for (const auto& f : d.failures) fails.push_back(to_json(f));
  result = {{"n", d.n}, {"pair_families", fam}, {"triple_patterns", tri}, {"quadruple_patterns", quad},
            {"failures", fails}};
  return d.failures.empty() ? 0 : 2;
}

int cmd_count(RunConfig& cfg, Json& result) {
  const ParamSet c = load_params(cfg);
  require_n(c, 5, "count");
  const GenericReport gen = check_all_pairs(c);
  result["genericity"] = to_json(gen);
  if (!gen.passed) return 2;
  const CountPrediction p = predict_count(c);
  const DetectionResult det = count_detected(c, cfg.t, {}, cfg.threads);
  const bool match = det.count == p.total;
  result["predicted"] = {{"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}, {"total", p.total}};
  result["detected"] = det.count;
  result["match"] = match;
  result["detection"] = to_json(det);
  return match ? 0 : 2;
}

int cmd_singular(RunConfig& cfg, Json& result) {
  const ParamSet c = load_params(cfg);
  if (c.n() == 5) {
    const DetectionResult det = count_detected(c, cfg.t, {}, cfg.threads);
    result = to_json(det);
    return det.failures.empty() ? 0 : 2;
  }
  if (c.n() < 5) throw Error(ErrorCode::WrongDimension, "singular needs n >= 5");
  if (cfg.pair.size() != 2) throw Error(ErrorCode::Usage, "--pair takes two indices");
  const int i = cfg.pair[0] - 1, j = cfg.pair[1] - 1;
  if (i < 0 || j < 0 || i >= c.n() || j >= c.n() || i == j) throw Error(ErrorCode::InvalidPair, "bad --pair");
  TransverseGrid grid;
  grid.nodes = cfg.nodes;
  const SurfaceTrace tr = surface_trace(c, cfg.t, i, j, grid, {}, cfg.threads);
  result = to_json(tr);
  return 0;
}

int cmd_smooth(RunConfig& cfg, Json& result) {
  const ParamSet c = load_params(cfg);
  require_n(c, 4, "smooth");
  const GenericReport gen = check_n4_conditions(c);
  result["genericity"] = to_json(gen);
  if (!gen.passed) return 2;
  ScanOptions opt;
  opt.seed = cfg.seed;
  const SmoothnessReport rep = smooth_scan_n4(c, cfg.t, cfg.samples, opt, cfg.threads);
  result["scan"] = to_json(rep);
  result["smooth"] = !rep.singular_found && rep.coverage_ok;
  return 0;
}

int cmd_witness(RunConfig& cfg, Json& result) {
  const ParamSet c = load_params(cfg);
  const double tol = 1e-10;
  const Witness w = nonempty_witness(c, tol, cfg.seed);
  result = to_json(w);
  result["tolerance"] = tol;
  return 0;
}

int cmd_curvature(RunConfig& cfg, Json& result) {
  const ParamSet c = load_params(cfg);
  const SecondFundamentalForm h = h_from_params(c);
  const CurvatureTensor R = gauss_curvature(h);
  const QuadraticMetric g = metric_from_curvature(R);
  const CurvatureTensor back = curvature_at_origin(g);
  double diff = 0.0;
  for (std::size_t k = 0; k < R.r.size(); ++k) diff = std::max(diff, std::abs(R.r[k] - back.r[k]));
  result["second_fundamental_form"] = to_json(h);
  result["curvature"] = to_json(R);
  result["metric_second_derivatives"] = g.d;
  result["metric_curvature_residual"] = diff;
  return 0;
}

int cmd_verify_embed(RunConfig& cfg, Json& result) {
  const ParamSet c = load_params(cfg);
  const AlphaSolution sol = embed_from_params(c);
  const QuadraticMetric g = metric_from_curvature(gauss_curvature(h_from_params(c)));
  const Order2Report o2 = verify_order2(sol.jet, g);
  const EmbeddingCounts k = sol.counts;
  result["counts"] = {{"A", k.A},
                      {"B", k.B},
                      {"C", k.C},
                      {"classes", k.classes},
                      {"identity_holds", k.B - (k.A - k.C) == k.classes}};
  result["selected"] = sol.selected;
  result["selected_rcond"] = sol.selected_rcond;
  result["gauss_residual"] = sol.gauss_residual;
  result["gauss_tolerance"] = 1e-12;
  result["max_equation_residual"] = sol.max_equation_residual;
  result["equation_tolerance"] = 1e-9;
  result["order2_max_derivative"] = o2.max_derivative;
  result["order2_tolerance"] = 1e-10;
  result["passed"] = sol.gauss_residual <= 1e-12 && sol.max_equation_residual <= 1e-9 && o2.max_derivative <= 1e-10;
  result["jet"] = to_json(sol.jet);
  return 0;
}

int cmd_reduce(RunConfig& cfg, Json& result) {
  const ParamSet c = load_params(cfg);
  const int n = c.n();
  const AlphaSolution sol = embed_from_params(c);
  const FrameData fr = frame_at(sol.jet, std::vector<double>(n, 0.0));
  const ReducedSystem rs = reduced_system(fr, Eigen::MatrixXd::Zero(n, n));
  double a_err = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a_err = std::max(a_err, std::abs(rs.A[k](i, j) - c(i, k, j)));
  std::mt19937_64 rng(cfg.seed);
  double sym_err = 0.0;
  for (int s = 0; s < 100; ++s) {
    const Covector xi = random_unit(n, rng);
    Matrix sum = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) sum += xi(k) * rs.A[k];
    sym_err = std::max(sym_err, (sum - assemble(c, xi).entries()).cwiseAbs().maxCoeff());
  }
  result["system"] = to_json(rs);
  result["closure"] = {{"max_A_minus_c", a_err},
                       {"A_tolerance", 1e-12},
                       {"max_B", rs.B.cwiseAbs().maxCoeff()},
                       {"B_tolerance", 1e-10},
                       {"max_symbol_difference", sym_err}};
  if (n <= 4) {
    const RoundTrip rt = manufactured_round_trip(sol.jet, cfg.seed);
    result["round_trip"] = {{"points", rt.points}, {"tangential", rt.tangential}, {"normal", rt.normal},
                            {"tolerance", 1e-9}};
  }
  std::ostringstream csv;
  write_closure_csv(csv, rs, c);
  write_text(cfg, "closure.csv", csv.str());
  return 0;
}

int cmd_sweep(RunConfig& cfg, Json& result) {
  const ParamSet c = load_params(cfg);
  require_n(c, 5, "sweep");
  if (cfg.t_list.empty()) throw Error(ErrorCode::Usage, "--t-list is empty");
  const GenericReport gen = check_all_pairs(c);
  if (!gen.passed) {
    result["genericity"] = to_json(gen);
    return 2;
  }
  const CountPrediction p = predict_count(c);
  Json rows = Json::array();
  std::vector<double> ts, drift;
  std::ostringstream csv;
  csv << "t,predicted,detected,max_drift\n";
  csv << std::setprecision(17);
  for (double t : cfg.t_list) {
    const DetectionResult det = count_detected(c, t, {}, cfg.threads);
    double d = 0.0;
    for (const auto& pt : det.points) d = std::max(d, pt.seed_distance);
    ts.push_back(t);
    drift.push_back(d);
    rows.push_back({{"t", t}, {"detected", det.count}, {"match", det.count == p.total}, {"max_drift", d},
                    {"failures", det.failures.size()}});
    csv << t << ',' << p.total << ',' << det.count << ',' << d << '\n';
  }
  const double slope = loglog_slope(ts, drift);
  result["predicted"] = p.total;
  result["rows"] = std::move(rows);
  result["drift_slope"] = slope;
  result["slope_target"] = 1.0;
  result["slope_tolerance"] = 0.2;
  write_text(cfg, "sweep.csv", csv.str());
  write_text(cfg, "sweep.gp",
             "set datafile separator ','\n"
             "set logscale xy\n"
             "set xlabel 't'\n"
             "set ylabel 'max drift from limit'\n"
             "set key left top\n"
             "plot 'sweep.csv' every ::1 using 1:4 with linespoints title 'drift', "
             "x title 'slope 1'\n");
  return 0;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--n", cfg.n, "dimension n")->check(CLI::Range(3, 12));
  sub->add_option("--seed", cfg.seed, "sampling seed");
  sub->add_option("--params", cfg.params, "ParamSet JSON file (overrides --n/--seed sampling)");
  sub->add_option("--out", cfg.out, "output directory for the report and data files");
  sub->add_option("--threads", cfg.threads, "worker threads (CHARVAR_THREADS overrides)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Characteristic variety of the reduced linearized embedding system"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  RunConfig cfg;

  struct Entry {
    const char* name;
    const char* help;
    Command run;
  };
  const std::vector<Entry> entries = {
      {"sample", "draw a parameter set", cmd_sample},
      {"check", "genericity conditions (n = 4 or n >= 5)", cmd_check},
      {"limits", "limit set of the rescaled singular locus", cmd_limits},
      {"count", "predicted vs detected singular points (n = 5)", cmd_count},
      {"singular", "refine singular points (n = 5) or trace the surface (n >= 6)", cmd_singular},
      {"smooth", "n = 4 smoothness scan", cmd_smooth},
      {"witness", "nonzero root of det P", cmd_witness},
      {"curvature", "Gauss curvature and normal-coordinate metric", cmd_curvature},
      {"verify-embed", "cubic embedding coefficients and 2-jet check", cmd_verify_embed},
      {"reduce", "reduced first-order system and its closure", cmd_reduce},
      {"sweep", "t-schedule with drift fit (n = 5)", cmd_sweep},
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub, cfg);
    const std::string name = e.name;
    if (name == "count" || name == "singular" || name == "smooth")
      sub->add_option("--t", cfg.t, "scale t")->check(CLI::PositiveNumber);
    if (name == "sweep") sub->add_option("--t-list", cfg.t_list, "comma-separated scales")->delimiter(',');
    if (name == "smooth") sub->add_option("--samples", cfg.samples, "Sigma-points to examine")->check(CLI::PositiveNumber);
    if (name == "singular") {
      sub->add_option("--nodes", cfg.nodes, "transverse grid nodes (n >= 6)")->check(CLI::PositiveNumber);
      sub->add_option("--pair", cfg.pair, "zero pair i j, 1-based (n >= 6)")->expected(2);
    }
    subs.emplace_back(sub, e.run);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (const auto& [sub, run] : subs) {
    if (!sub->parsed()) continue;
    cfg.command = sub->get_name();
    Json result = Json::object();
    int status = 0;
    try {
      status = run(cfg, result);
    } catch (const Error& e) {
      result = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
      status = is_degeneracy(e.code()) ? 2 : 1;
      std::cerr << "charvar: " << e.what() << "\n";
    } catch (const std::exception& e) {
      std::cerr << "charvar: " << e.what() << "\n";
      return 1;
    }
    Json report = {{"version", kVersion}, {"config", config_json(cfg)}, {"timestamp", utc_timestamp()},
                   {"status", status},    {"result", std::move(result)}};
    const std::string text = report.dump(2) + "\n";
    if (cfg.out.empty()) {
      std::cout << text;
    } else {
      try {
        write_text(cfg, cfg.command + ".json", text);
      } catch (const std::exception& e) {
        std::cerr << "charvar: " << e.what() << "\n";
        return 1;
      }
      std::cout << (std::filesystem::path(cfg.out) / (cfg.command + ".json")).string() << "\n";
    }
    return status;
  }
  return 1;
}
