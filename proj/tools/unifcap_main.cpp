// Command-line front end: closed-form and numerical capacity solves, phase
// diagrams, budget sweeps, and the verification suite. Data goes to --out (or
// stdout); diagnostics go to stderr, gated by UNIFCAP_LOG.
//
// Exit codes: 0 success, 1 usage error, 2 verification failure, 3 numerical
// failure (bracket or convergence).
#include <algorithm>
#include <clocale>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "unifcap/analytic.hpp"
#include "unifcap/channel.hpp"
#include "unifcap/logging.hpp"
#include "unifcap/numerical.hpp"
#include "unifcap/records.hpp"
#include "unifcap/verify.hpp"

using namespace unifcap;
using nlohmann::json;

namespace {

constexpr const char* kVersion = UNIFCAP_VERSION;
constexpr double kLog2 = 0.69314718055994530942;

struct Range {
  double lo = 0.0, hi = 0.0, step = 0.0;

  std::vector<double> values() const {
    std::vector<double> v;
    for (double x = lo; x <= hi + 1e-12 * std::max(1.0, std::abs(hi)); x += step) v.push_back(x);
    return v;
  }
};

Range parse_range(const std::string& text) {
  Range r;
  std::istringstream is(text);
  char c1 = 0, c2 = 0;
  if (!(is >> r.lo >> c1 >> r.hi >> c2 >> r.step) || c1 != ':' || c2 != ':' || r.step <= 0.0 ||
      r.hi < r.lo) {
    throw CLI::ValidationError("range", "expected LO:HI:STEP with STEP > 0, got '" + text + "'");
  }
  return r;
}

struct CommonOpts {
  double r = 0.0;
  double alpha = 0.0;
  bool alpha_set = false;
  std::string cost_table_path;
  double cbar = 0.0;
  bool cbar_set = false;
  std::string cbar_range_text, r_range_text, alpha_range_text;
  int gin = 2001, gout = 4001;
  std::string units = "bits";
  std::string format = "json";
  std::string out_path;
  bool confirm_numeric = false;
  bool quick = false;
  bool no_header = false;
  bool skip_ba = false;
  bool negative_controls = false;
  unsigned seed = 0;  // reserved; every algorithm is deterministic
};

CostFunction load_cost(const CommonOpts& opt) {
  if (!opt.cost_table_path.empty()) {
    std::ifstream in(opt.cost_table_path);
    if (!in) throw CLI::ValidationError("--cost-table", "cannot open " + opt.cost_table_path);
    std::vector<double> xs, vals;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream is(line);
      double x, v;
      if (is >> x >> v) {
        xs.push_back(x);
        vals.push_back(v);
      }
    }
    return CostFunction::from_table(std::move(xs), std::move(vals));
  }
  if (!opt.alpha_set) {
    throw CLI::ValidationError("--alpha", "either --alpha or --cost-table is required");
  }
  return CostFunction::power(opt.alpha);
}

double in_units(double nats, const std::string& units) {
  return units == "bits" ? nats / kLog2 : nats;
}

void emit(const CommonOpts& opt, const std::string& text) {
  if (opt.out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
  } else {
    std::ofstream out(opt.out_path);
    if (!out) throw CLI::ValidationError("--out", "cannot write " + opt.out_path);
    out << text;
  }
}

std::string provenance(const CommonOpts& opt, const std::string& cmd) {
  std::ostringstream os;
  os << "unifcap " << kVersion << " " << cmd << " r=" << format_double(opt.r);
  if (opt.alpha_set) os << " alpha=" << format_double(opt.alpha);
  if (!opt.cost_table_path.empty()) os << " cost-table=" << opt.cost_table_path;
  os << " units=" << opt.units;
  return os.str();
}

BAConfig ba_config(const CommonOpts& opt) {
  BAConfig cfg;
  cfg.g_in = opt.gin;
  cfg.g_out = opt.gout;
  if (opt.quick) {
    cfg.g_in = std::min(cfg.g_in, 501);
    cfg.g_out = std::min(cfg.g_out, 1001);
  }
  return cfg;
}

SolutionRecord base_record(const CommonOpts& opt, const CostFunction& cost) {
  SolutionRecord rec;
  rec.version = kVersion;
  rec.r = opt.r;
  rec.cbar = opt.cbar;
  rec.cost_family = cost.family();
  rec.alpha = cost.alpha().value_or(0.0);
  rec.cost_table_path = opt.cost_table_path;
  rec.units = opt.units;
  return rec;
}

void fill_ba_fields(SolutionRecord& rec, const BAResult& ba, const SupportClusters& sc,
                    const BAConfig& cfg) {
  rec.solver = "ba";
  rec.g_in = cfg.g_in;
  rec.g_out = cfg.g_out;
  rec.lambda_star = ba.lambda;
  rec.capacity_nats = ba.capacity_nats;
  rec.capacity_bits = ba.capacity_nats / kLog2;
  rec.expected_cost = ba.achieved_cost;
  rec.ba_present = true;
  rec.ba_iterations = ba.iterations;
  rec.ba_converged = ba.converged;
  rec.ba_achieved_cost = ba.achieved_cost;
  for (const auto& c : sc.clusters) {
    rec.ba_cluster_positions.push_back(c.position);
    rec.ba_cluster_masses.push_back(c.mass);
  }
  rec.ba_largest_gap_cells = sc.largest_interior_gap;
  rec.ba_full_support = sc.full_support;
  rec.ba_discrete = sc.discrete;
}

int cmd_solve(const CommonOpts& opt) {
  const ChannelGeometry geom = make_geometry(opt.r);
  const CostFunction cost = load_cost(opt);
  SolutionRecord rec = base_record(opt, cost);

  const Regime regime = classify(geom, cost, opt.cbar);
  if (regime.kind == Regime::Kind::CaseIII) {
    const BAConfig cfg = ba_config(opt);
    const DiscretizedChannel chan = discretize(geom, cfg.g_in, cfg.g_out);
    const BAResult ba = ba_solve(chan, cost, opt.cbar, cfg);
    const SupportClusters sc = extract_support(ba, chan);
    rec.regime = regime.label();
    fill_ba_fields(rec, ba, sc, cfg);
    rec.cbar_star = cbar_star(geom, cost);
    emit(opt, rec.to_json());
    return ba.converged ? 0 : 3;
  }

  const AnalyticSolution sol = solve(geom, cost, opt.cbar);
  const KKTReport kkt = kkt_report(sol.distribution, sol.lambda_star, geom, cost, opt.cbar);
  rec.solver = "analytic";
  rec.regime = sol.regime.label();
  rec.positions = sol.distribution.positions;
  rec.masses = sol.distribution.masses;
  rec.lambda_star = sol.lambda_star;
  rec.capacity_nats = sol.capacity_nats;
  rec.capacity_bits = sol.capacity_nats / kLog2;
  rec.expected_cost = expected_cost(sol.distribution, cost);
  rec.cbar_star = sol.thresholds.cbar_star;
  rec.theta = sol.thresholds.theta;
  rec.lambda_at_theta = sol.thresholds.lambda_at_theta;
  rec.kkt_evaluated = true;
  rec.kkt_pass = kkt.pass;
  rec.kkt_mutual_information = kkt.mutual_information;
  rec.kkt_equality_residual = kkt.max_equality_residual;
  rec.kkt_inequality_violation = kkt.max_inequality_violation;
  rec.kkt_worst_x = kkt.worst_x;
  emit(opt, rec.to_json());
  return kkt.pass ? 0 : 2;
}

int cmd_capacity(const CommonOpts& opt) {
  const CostFunction cost = load_cost(opt);
  const bool sweep_r = !opt.r_range_text.empty();
  std::vector<double> xs;
  if (sweep_r) {
    xs = parse_range(opt.r_range_text).values();
  } else if (!opt.cbar_range_text.empty()) {
    xs = parse_range(opt.cbar_range_text).values();
  } else if (opt.cbar_set) {
    xs = {opt.cbar};
  } else {
    throw CLI::ValidationError("capacity", "need --cbar, --cbar-range, or --r-range");
  }
  if (!sweep_r && !(opt.r > 0.0)) {
    throw CLI::ValidationError("capacity", "need --r for a budget sweep");
  }
  if (sweep_r && !opt.cbar_set) {
    throw CLI::ValidationError("capacity", "need --cbar for a width sweep");
  }

  const std::string var = sweep_r ? "r" : "cbar";
  CsvWriter csv({var, "analytic_capacity_" + opt.units, "ba_capacity_" + opt.units, "abs_gap"},
                provenance(opt, "capacity"), !opt.no_header);
  const BAConfig cfg = ba_config(opt);
  std::optional<DiscretizedChannel> chan;
  Thresholds th;
  bool th_ready = false;
  int exit_code = 0;
  for (double x : xs) {
    const double r = sweep_r ? x : opt.r;
    const double cbar = sweep_r ? opt.cbar : x;
    if (!(cbar > 0.0) || cbar > 1.0) continue;
    const ChannelGeometry geom = make_geometry(r);
    double analytic = std::numeric_limits<double>::quiet_NaN();
    try {
      if (sweep_r || !th_ready) {
        if (!geom.is_integer && cost.concave_or_linear()) {
          th = thresholds(geom, cost);
        } else {
          th = Thresholds{cbar_star(geom, cost), {}, {}};
        }
        th_ready = !sweep_r;
      }
      analytic = in_units(solve(geom, cost, cbar, th).capacity_nats, opt.units);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AnalyticUnavailable) throw;
    }
    double ba_cap = std::numeric_limits<double>::quiet_NaN();
    if (!opt.skip_ba) {
      if (sweep_r || !chan) chan = discretize(geom, cfg.g_in, cfg.g_out);
      const BAResult ba = ba_solve(*chan, cost, cbar, cfg);
      if (!ba.converged) exit_code = 3;
      ba_cap = in_units(ba.capacity_nats, opt.units);
    }
    csv.add_row({x, analytic, ba_cap, std::abs(analytic - ba_cap)});
  }
  emit(opt, csv.str());
  return exit_code;
}

int cmd_phase_diagram(const CommonOpts& opt) {
  if (opt.alpha_range_text.empty() || opt.cbar_range_text.empty()) {
    throw CLI::ValidationError("phase-diagram", "need --alpha-range and --cbar-range");
  }
  const ChannelGeometry geom = make_geometry(opt.r);
  const std::vector<double> alphas = parse_range(opt.alpha_range_text).values();
  const std::vector<double> cbars = parse_range(opt.cbar_range_text).values();

  std::ostringstream os;
  if (!opt.no_header) os << "# " << provenance(opt, "phase-diagram") << "\n";
  os << "# alpha,cbar,regime" << (opt.confirm_numeric ? ",numeric_full_support" : "") << "\n";
  const BAConfig cfg = ba_config(opt);
  std::optional<DiscretizedChannel> chan;
  for (double alpha : alphas) {
    const CostFunction cost = CostFunction::power(alpha);
    Thresholds th;
    if (!geom.is_integer && cost.concave_or_linear()) {
      th = thresholds(geom, cost);
    } else {
      th = Thresholds{cbar_star(geom, cost), {}, {}};
    }
    for (double cbar : cbars) {
      if (!(cbar > 0.0) || cbar > 1.0) continue;
      const Regime regime = classify(geom, cost, cbar, th);
      os << format_double(alpha) << "," << format_double(cbar) << "," << regime.label();
      if (opt.confirm_numeric) {
        if (regime.kind == Regime::Kind::CaseIII) {
          if (!chan) chan = discretize(geom, cfg.g_in, cfg.g_out);
          const BAResult ba = ba_solve(*chan, cost, cbar, cfg);
          os << "," << (extract_support(ba, *chan).full_support ? 1 : 0);
        } else {
          os << ",";
        }
      }
      os << "\n";
    }
  }
  emit(opt, os.str());
  return 0;
}

int cmd_masses_vs_budget(const CommonOpts& opt) {
  const ChannelGeometry geom = make_geometry(opt.r);
  if (geom.is_integer) {
    throw CLI::ValidationError("masses-vs-budget", "needs a non-integer r");
  }
  const CostFunction cost = load_cost(opt);
  if (!cost.concave_or_linear()) {
    throw CLI::ValidationError("masses-vs-budget", "needs a concave or linear cost");
  }
  if (opt.cbar_range_text.empty()) {
    throw CLI::ValidationError("masses-vs-budget", "need --cbar-range");
  }
  const Thresholds th = thresholds(geom, cost);

  std::vector<std::pair<double, std::string>> budgets;
  for (double c : parse_range(opt.cbar_range_text).values()) {
    if (c > 0.0 && c <= 1.0) budgets.emplace_back(c, "");
  }
  for (std::size_t k = 0; k < th.theta.size(); ++k) {
    budgets.emplace_back(th.theta[k], "theta_" + std::to_string(k));
  }
  std::sort(budgets.begin(), budgets.end());

  std::vector<std::string> cols{"cbar", "lambda_star"};
  for (int j = 1; j <= 2 * geom.n; ++j) cols.push_back("m_" + std::to_string(j));
  CsvWriter csv(std::move(cols), provenance(opt, "masses-vs-budget"), !opt.no_header);
  for (const auto& [cbar, note] : budgets) {
    const AnalyticSolution sol = solve(geom, cost, cbar, th);
    const std::vector<double> full = align_to_grid(sol.distribution, geom);
    std::vector<double> row{cbar, sol.lambda_star};
    row.insert(row.end(), full.begin(), full.end());
    csv.add_row(row, note);
  }
  emit(opt, csv.str());
  return 0;
}

int cmd_ba(const CommonOpts& opt) {
  const ChannelGeometry geom = make_geometry(opt.r);
  const CostFunction cost = load_cost(opt);
  const BAConfig cfg = ba_config(opt);
  const DiscretizedChannel chan = discretize(geom, cfg.g_in, cfg.g_out);
  const BAResult ba = ba_solve(chan, cost, opt.cbar, cfg);
  const SupportClusters sc = extract_support(ba, chan);
  SolutionRecord rec = base_record(opt, cost);
  rec.regime = "";
  fill_ba_fields(rec, ba, sc, cfg);
  rec.cbar_star = cbar_star(geom, cost);
  emit(opt, rec.to_json());
  return ba.converged ? 0 : 3;
}

int cmd_verify(const CommonOpts& opt) {
  json report;
  report["tool"] = "unifcap";
  report["version"] = kVersion;
  report["quick"] = opt.quick;
  json checks = json::array();
  bool all_pass = true;
  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    checks.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
    all_pass = all_pass && pass;
    log_info(name + ": " + (pass ? "pass" : "FAIL") + (detail.empty() ? "" : " (" + detail + ")"));
  };

  const std::vector<double> rs =
      opt.quick ? std::vector<double>{2.4, 4.0} : std::vector<double>{2.0, 2.4, 3.9, 4.0, 4.4, 6.2};
  const std::vector<double> alphas =
      opt.quick ? std::vector<double>{0.5, 1.0} : std::vector<double>{0.3, 0.5, 0.7, 1.0};
  const int budget_count = opt.quick ? 5 : 12;
  const BAConfig cfg = ba_config(opt);
  // the numerical solver's discretization error scales with its cell width
  const double ba_tol = 5e-3 * (2001.0 / cfg.g_in);

  {
    double worst_eq = 0.0, worst_ineq = 0.0;
    int count = 0;
    for (double r : rs) {
      const ChannelGeometry geom = make_geometry(r);
      for (double alpha : alphas) {
        const CostFunction cost = CostFunction::power(alpha);
        for (double cbar : sweep_budgets(geom, cost, budget_count)) {
          const AnalyticSolution sol = solve(geom, cost, cbar);
          const KKTReport rep = kkt_report(sol.distribution, sol.lambda_star, geom, cost, cbar,
                                           opt.quick ? 1001 : 10001);
          worst_eq = std::max(worst_eq, rep.max_equality_residual);
          worst_ineq = std::max(worst_ineq, rep.max_inequality_violation);
          ++count;
        }
      }
    }
    add("kkt_sweep", worst_eq <= 1e-8 && worst_ineq <= 1e-8,
        std::to_string(count) + " instances, worst eq " + format_double(worst_eq) +
            ", worst ineq " + format_double(worst_ineq));
  }

  {
    const ChannelGeometry g24 = make_geometry(2.4);
    const LinearityReport rep =
        check_piecewise_linear(unconstrained_solution(g24), g24, opt.quick ? 200 : 1000);
    add("piecewise_linearity",
        rep.max_second_difference <= 1e-8 && rep.max_slope_deviation <= 1e-8,
        "second diff " + format_double(rep.max_second_difference));
  }

  {
    const double dev = integer_limit_check(4, 1e-6);
    add("integer_limit", dev <= 1e-4, "deviation " + format_double(dev));
  }

  {
    double worst = 0.0;
    for (double lambda : {0.1, 1.0, 5.0}) {
      worst = std::max(
          worst, cost_derivative_check(lambda, make_geometry(4.0), CostFunction::power(0.7)));
    }
    add("cost_derivative_identity", worst <= 1e-6, "worst residual " + format_double(worst));
  }

  if (!opt.skip_ba) {
    double worst = 0.0;
    const std::vector<double> ver_rs = opt.quick ? std::vector<double>{2.4} : rs;
    for (double r : ver_rs) {
      const ChannelGeometry geom = make_geometry(r);
      const DiscretizedChannel chan = discretize(geom, cfg.g_in, cfg.g_out);
      for (double alpha : alphas) {
        const CostFunction cost = CostFunction::power(alpha);
        const auto budgets = sweep_budgets(geom, cost, opt.quick ? 3 : budget_count);
        for (double cbar : budgets) {
          const AnalyticSolution sol = solve(geom, cost, cbar);
          const BAResult ba = ba_solve(chan, cost, cbar, cfg);
          worst = std::max(worst, std::abs(ba.capacity_nats - sol.capacity_nats));
        }
      }
    }
    add("ba_agreement", worst <= ba_tol,
        "worst capacity gap " + format_double(worst) + " (tolerance " + format_double(ba_tol) +
            ")");
  }

  if (opt.negative_controls) {
    const ChannelGeometry g = make_geometry(2.4);
    const CostFunction c = CostFunction::power(0.5);
    const AnalyticSolution sol = solve(g, c, 0.54);
    int rejected = 0;
    const int total = static_cast<int>(sol.distribution.size());
    for (std::size_t j = 0; j < sol.distribution.size(); ++j) {
      std::vector<double> m = sol.distribution.masses;
      m[j] += 1e-3;
      double z = 0.0;
      for (double v : m) z += v;
      for (double& v : m) v /= z;
      const KKTReport rep = kkt_report(make_distribution(sol.distribution.positions, std::move(m)),
                                       sol.lambda_star, g, c, 0.54);
      if (!rep.pass) ++rejected;
    }
    add("negative_controls", rejected == total,
        std::to_string(rejected) + "/" + std::to_string(total) + " perturbations rejected");
  }

  report["checks"] = checks;
  report["pass"] = all_pass;
  emit(opt, report.dump(2));
  return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_NUMERIC, "C");
  CLI::App app{"Capacity and capacity-achieving inputs of the uniform-noise channel under peak "
               "and average-cost constraints"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOpts opt;
  auto add_common = [&](CLI::App* cmd, bool needs_r) {
    if (needs_r) cmd->add_option("--r", opt.r, "inverse noise width r = 1/(2b)")->required();
    cmd->add_option("--alpha", opt.alpha, "power-cost exponent")
        ->each([&](const std::string&) { opt.alpha_set = true; });
    cmd->add_option("--cost-table", opt.cost_table_path,
                    "two-column CSV x,c(x) with ascending x covering 0 and 1");
    cmd->add_option("--gin", opt.gin, "input grid points for the numerical solver");
    cmd->add_option("--gout", opt.gout, "output grid cells for the numerical solver");
    cmd->add_option("--units", opt.units, "capacity units")->check(CLI::IsMember({"bits", "nats"}));
    cmd->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--out", opt.out_path, "output file (stdout when omitted)");
    cmd->add_flag("--quick", opt.quick, "reduced grids and sweep sizes, loosened tolerances");
    cmd->add_flag("--no-header", opt.no_header, "suppress the provenance header line");
    cmd->add_flag("--skip-ba", opt.skip_ba, "skip numerical-solver columns/checks");
    cmd->add_option("--seed", opt.seed, "reserved; all algorithms are deterministic");
  };

  auto* solve_cmd = app.add_subcommand("solve", "solve one instance, emit a JSON record");
  add_common(solve_cmd, true);
  solve_cmd->add_option("--cbar", opt.cbar, "budget on the expected cost")
      ->required()
      ->each([&](const std::string&) { opt.cbar_set = true; });

  auto* cap_cmd = app.add_subcommand("capacity", "capacity along a budget or width sweep (CSV)");
  add_common(cap_cmd, false);
  cap_cmd->add_option("--r", opt.r, "inverse noise width (fixed for a budget sweep)");
  cap_cmd->add_option("--cbar", opt.cbar, "budget")->each([&](const std::string&) {
    opt.cbar_set = true;
  });
  cap_cmd->add_option("--cbar-range", opt.cbar_range_text, "budget sweep LO:HI:STEP");
  cap_cmd->add_option("--r-range", opt.r_range_text, "width sweep LO:HI:STEP");

  auto* phase_cmd = app.add_subcommand("phase-diagram", "regime label per (alpha, cbar) cell");
  add_common(phase_cmd, true);
  phase_cmd->add_option("--alpha-range", opt.alpha_range_text, "exponent sweep LO:HI:STEP");
  phase_cmd->add_option("--cbar-range", opt.cbar_range_text, "budget sweep LO:HI:STEP");
  phase_cmd->add_flag("--confirm-numeric", opt.confirm_numeric,
                      "confirm convex-regime cells with the numerical solver");

  auto* verify_cmd = app.add_subcommand("verify", "run the invariant suite, emit a JSON report");
  add_common(verify_cmd, false);
  verify_cmd->add_flag("--negative-controls", opt.negative_controls,
                       "also check that perturbed solutions fail certification");

  auto* masses_cmd =
      app.add_subcommand("masses-vs-budget", "mass trajectories over the budget (CSV)");
  add_common(masses_cmd, true);
  masses_cmd->add_option("--cbar-range", opt.cbar_range_text, "budget sweep LO:HI:STEP");

  auto* ba_cmd = app.add_subcommand("ba", "raw numerical solve, emit a JSON record");
  add_common(ba_cmd, true);
  ba_cmd->add_option("--cbar", opt.cbar, "budget on the expected cost")
      ->required()
      ->each([&](const std::string&) { opt.cbar_set = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(opt);
    if (cap_cmd->parsed()) return cmd_capacity(opt);
    if (phase_cmd->parsed()) return cmd_phase_diagram(opt);
    if (verify_cmd->parsed()) return cmd_verify(opt);
    if (masses_cmd->parsed()) return cmd_masses_vs_budget(opt);
    if (ba_cmd->parsed()) return cmd_ba(opt);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::BracketFailure:
      case ErrorCode::NoRootFound:
      case ErrorCode::NotConverged:
        return 3;
      case ErrorCode::NonPositiveR:
      case ErrorCode::InvalidBudget:
      case ErrorCode::InvalidCost:
      case ErrorCode::GridTooCoarse:
        return 1;
      default:
        return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
