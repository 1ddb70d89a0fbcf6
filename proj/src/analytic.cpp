#include "unifcap/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace unifcap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Boltzmann weights exp(-lambda * energy) normalized to total, with the usual
// max-exponent shift.
std::vector<double> boltzmann(const std::vector<double>& energy, double lambda, double total) {
  std::vector<double> w(energy.size());
  double emax = -kInf;
  for (double e : energy) emax = std::max(emax, -lambda * e);
  double z = 0.0;
  for (std::size_t i = 0; i < energy.size(); ++i) {
    w[i] = std::exp(-lambda * energy[i] - emax);
    z += w[i];
  }
  for (double& v : w) v *= total / z;
  return w;
}

// log sum_i exp(-lambda * energy_i)
double log_partition(const std::vector<double>& energy, double lambda) {
  double emax = -kInf;
  for (double e : energy) emax = std::max(emax, -lambda * e);
  double z = 0.0;
  for (double e : energy) z += std::exp(-lambda * e - emax);
  return emax + std::log(z);
}

struct PartitionPair {
  double zhat = 0.0;  // sum over the dhat energies
  double zbar = 0.0;  // sum over the dbar energies
};

PartitionPair partition_sums(const Exponents& ex, double lambda) {
  PartitionPair p;
  for (double d : ex.dhat) p.zhat += std::exp(-lambda * d);
  for (double d : ex.dbar) p.zbar += std::exp(-lambda * d);
  return p;
}

}  // namespace

std::string Regime::label() const {
  switch (kind) {
    case Kind::CaseI: return "I";
    case Kind::CaseIIa: return "IIa";
    case Kind::CaseIIb: return "IIb(" + std::to_string(k) + ")";
    case Kind::CaseIII: return "III";
  }
  return "?";
}

std::vector<double> unconstrained_positions(const ChannelGeometry& geom) {
  std::vector<double> x;
  if (geom.is_integer) {
    const int n = geom.n;
    x.resize(n);
    for (int j = 1; j <= n; ++j) x[j - 1] = double(j - 1) / double(n - 1);
  } else {
    const int n = geom.n;
    x.resize(2 * n);
    for (int j = 1; j <= 2 * n; ++j) {
      if (j % 2 == 1) {
        x[j - 1] = double(j - 1) / (2.0 * geom.r);
      } else {
        x[j - 1] = 1.0 - double(2 * n - j) / (2.0 * geom.r);
      }
    }
  }
  return x;
}

DiscreteInputDistribution unconstrained_solution(const ChannelGeometry& geom) {
  std::vector<double> x = unconstrained_positions(geom);
  std::vector<double> m(x.size());
  if (geom.is_integer) {
    std::fill(m.begin(), m.end(), 1.0 / double(geom.n));
  } else {
    const int n = geom.n;
    const double denom = 2.0 * n * (n + 1.0);
    for (int j = 1; j <= 2 * n; ++j) {
      m[j - 1] = (j % 2 == 1) ? double(2 * n - (j - 1)) / denom : double(j) / denom;
    }
  }
  return make_distribution(std::move(x), std::move(m));
}

double cbar_star(const ChannelGeometry& geom, const CostFunction& cost) {
  return expected_cost(unconstrained_solution(geom), cost);
}

DiscreteInputDistribution integer_masses(double lambda, const ChannelGeometry& geom,
                                         const CostFunction& cost) {
  if (!geom.is_integer) fail(ErrorCode::WrongRegime, "integer grid requires integer r");
  std::vector<double> x = unconstrained_positions(geom);
  std::vector<double> energy(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) energy[j] = cost(x[j]);
  return make_distribution(std::move(x), boltzmann(energy, lambda, 1.0));
}

Exponents exponents(int k, const ChannelGeometry& geom, const CostFunction& cost) {
  if (geom.is_integer) fail(ErrorCode::InvalidK, "exponents require non-integer r");
  const int n = geom.n;
  if (k < 0 || k > n - 1) {
    fail(ErrorCode::InvalidK, "k must lie in [0, n-1], got " + std::to_string(k));
  }
  const std::vector<double> x = unconstrained_positions(geom);
  auto c = [&](int j) { return cost(x[j - 1]); };  // 1-based grid index

  Exponents ex;
  ex.k = k;
  ex.dhat.resize(n + 1 - k, 0.0);
  ex.dbar.resize(n - k, 0.0);
  // Cumulative sums of cost increments across the narrow (rho/r) and wide
  // ((1-rho)/r) grid gaps; the gap widths are uniform, so the quotient with
  // the segment length reduces to a division by rho or 1-rho.
  for (int t = 1; t <= n - k; ++t) {
    const int i = k + t;
    ex.dhat[t] = ex.dhat[t - 1] + (c(2 * i) - c(2 * i - 1)) / geom.rho;
  }
  for (int t = 1; t <= n - 1 - k; ++t) {
    const int i = k + t;
    ex.dbar[t] = ex.dbar[t - 1] + (c(2 * i + 1) - c(2 * i)) / (1.0 - geom.rho);
  }
  return ex;
}

std::pair<double, double> normalization_split(int k, double lambda, const ChannelGeometry& geom,
                                              const CostFunction& cost) {
  if (geom.is_integer) fail(ErrorCode::InvalidK, "split requires non-integer r");
  const int n = geom.n;
  if (k < 1 || k > n - 1) {
    fail(ErrorCode::InvalidK, "split needs k in [1, n-1], got " + std::to_string(k));
  }
  const std::vector<double> x = unconstrained_positions(geom);
  std::vector<double> left_energy(k);
  for (int j = 1; j <= k; ++j) left_energy[j - 1] = cost(x[2 * j - 2]);  // c_{2j-1}
  const Exponents ex = exponents(k, geom, cost);

  const double c_2k1 = cost(x[2 * k]);  // c_{2k+1}
  const double c_1 = cost(x[0]);
  const double log_ratio = lambda * (c_2k1 - c_1) + log_partition(left_energy, lambda) -
                           geom.rho * log_partition(ex.dhat, lambda) -
                           (1.0 - geom.rho) * log_partition(ex.dbar, lambda);
  // ratio = M<_k / M>_k; the split is a logistic function of log_ratio,
  // evaluated on the small side to keep a tiny share representable.
  if (log_ratio >= 0.0) {
    const double m_greater = 1.0 / (1.0 + std::exp(log_ratio));
    return {1.0 - m_greater, m_greater};
  }
  const double m_less = 1.0 / (1.0 + std::exp(-log_ratio));
  return {m_less, 1.0 - m_less};
}

CombinedMasses combined_masses(int k, double lambda, const ChannelGeometry& geom,
                               const CostFunction& cost) {
  if (geom.is_integer) fail(ErrorCode::InvalidK, "combined masses require non-integer r");
  const int n = geom.n;
  if (k < 0 || k > n - 1) {
    fail(ErrorCode::InvalidK, "k must lie in [0, n-1], got " + std::to_string(k));
  }
  CombinedMasses cm;
  cm.k = k;
  if (k == 0) {
    cm.m_less = 0.0;
    cm.m_greater = 1.0;
  } else {
    std::tie(cm.m_less, cm.m_greater) = normalization_split(k, lambda, geom, cost);
  }
  const Exponents ex = exponents(k, geom, cost);
  cm.mhat = boltzmann(ex.dhat, lambda, cm.m_greater);
  cm.mbar = boltzmann(ex.dbar, lambda, cm.m_greater);
  return cm;
}

std::vector<double> back_transform(const CombinedMasses& cm) {
  const std::size_t nh = cm.mhat.size();  // n-k+1 entries
  const std::size_t nb = cm.mbar.size();  // n-k entries
  if (nh != nb + 1 || nb == 0) {
    fail(ErrorCode::InvalidK, "combined-mass vectors have inconsistent lengths");
  }
  std::vector<double> m(2 * nb);
  double sum_hat = 0.0, sum_bar = 0.0;
  for (std::size_t t = 1; t <= 2 * nb; ++t) {
    double v;
    if (t % 2 == 1) {
      sum_hat += cm.mhat[(t + 1) / 2 - 1];
      v = sum_hat - sum_bar;
    } else {
      sum_bar += cm.mbar[t / 2 - 1];
      v = sum_bar - sum_hat;
    }
    if (v < -1e-12) {
      fail(ErrorCode::InfeasibleSupport,
           "back transform produced a negative mass " + fmt(v) + "; the support must shrink");
    }
    m[t - 1] = std::max(v, 0.0);
  }
  // The sum constraint makes the last mass equal the trailing combined mass
  // exactly; the cumulative difference would cancel it away at extreme
  // multiplier values.
  m.back() = cm.mhat.back();
  return m;
}

namespace {

// Smallest root of g to the right of lo, located by step doubling followed by
// bisection. g must be positive at lo and the crossing simple.
double smallest_root_after(double lo, const std::function<double(double)>& g, double scale_hint,
                           double rel_tol, double cap, const char* what) {
  double g_lo = g(lo);
  if (g_lo < 0.0) fail(ErrorCode::NoRootFound, std::string(what) + ": negative at bracket start");
  double step = 0.125;
  double hi = lo + step;
  double g_hi = g(hi);
  while (g_hi > 0.0) {
    lo = hi;
    g_lo = g_hi;
    step *= 2.0;
    hi = lo + step;
    if (hi > cap) {
      fail(ErrorCode::NoRootFound,
           std::string(what) + ": no sign change below the multiplier cap " + fmt(cap));
    }
    g_hi = g(hi);
  }
  const double tol = rel_tol * scale_hint;
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 300; ++it) {
    mid = 0.5 * (lo + hi);
    const double g_mid = g(mid);
    if (std::abs(g_mid) <= tol) return mid;
    if (g_mid > 0.0) lo = mid; else hi = mid;
    if (hi - lo <= 8.0 * kEps * std::max(1.0, std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> lambda_chain(int kmax, const ChannelGeometry& geom, const CostFunction& cost,
                                 const RootConfig& cfg) {
  std::vector<double> chain;
  chain.reserve(kmax + 1);
  double prev = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    const Exponents ex = exponents(k, geom, cost);
    auto g = [&ex](double l) {
      const PartitionPair p = partition_sums(ex, l);
      return p.zhat - p.zbar;
    };
    // scale for the stopping rule: the partition sums start at n-k+1 and n-k
    const double scale = static_cast<double>(ex.dhat.size());
    chain.push_back(smallest_root_after(prev, g, scale, cfg.threshold_tol, cfg.lambda_cap,
                                        "mass-vanishing multiplier"));
    prev = chain.back();
  }
  return chain;
}

// Monotone-decreasing budget matching: bisection of cost_at(lambda) - cbar on
// [lo, hi] (cost_at(lo) >= cbar >= cost_at(hi)), narrowed to machine width.
double bisect_budget(const std::function<double(double)>& cost_at, double cbar, double lo,
                     double hi, const RootConfig& cfg) {
  double mid = lo;
  for (int it = 0; it < 300; ++it) {
    mid = 0.5 * (lo + hi);
    const double f = cost_at(mid) - cbar;
    if (f == 0.0) return mid;
    if (f > 0.0) lo = mid; else hi = mid;
    if (hi - lo <= 4.0 * kEps * std::max(1.0, std::abs(mid))) break;
  }
  mid = 0.5 * (lo + hi);
  if (std::abs(cost_at(mid) - cbar) > std::max(cfg.cost_tol, 1e-9)) {
    fail(ErrorCode::BracketFailure, "budget match did not converge at lambda=" + fmt(mid));
  }
  return mid;
}

// Doubling search for an upper bracket where the achieved cost drops below cbar.
double find_upper_lambda(const std::function<double(double)>& cost_at, double cbar, double lo,
                         double cap) {
  double step = std::max(1.0, 0.25 * lo);
  double hi = lo + step;
  while (cost_at(hi) > cbar) {
    lo = hi;
    step *= 2.0;
    hi = lo + step;
    if (hi > cap) {
      fail(ErrorCode::BracketFailure, "no multiplier below the cap reaches budget " + fmt(cbar));
    }
  }
  return hi;
}

}  // namespace

double lambda_threshold(int k, const ChannelGeometry& geom, const CostFunction& cost,
                        const RootConfig& cfg) {
  if (geom.is_integer) fail(ErrorCode::InvalidK, "thresholds require non-integer r");
  if (cost.curvature() == Curvature::ConvexOnInterval) {
    fail(ErrorCode::WrongRegime, "thresholds are defined for concave or linear cost");
  }
  const int n = geom.n;
  if (k < 0 || k > n - 2) {
    fail(ErrorCode::InvalidK, "threshold index must lie in [0, n-2], got " + std::to_string(k));
  }
  if (cost.curvature() == Curvature::Linear) return kInf;
  return lambda_chain(k, geom, cost, cfg)[k];
}

Thresholds thresholds(const ChannelGeometry& geom, const CostFunction& cost,
                      const RootConfig& cfg) {
  if (geom.is_integer) fail(ErrorCode::WrongRegime, "thresholds require non-integer r");
  if (cost.curvature() == Curvature::ConvexOnInterval) {
    fail(ErrorCode::WrongRegime, "thresholds are defined for concave or linear cost");
  }
  Thresholds th;
  th.cbar_star = cbar_star(geom, cost);
  if (cost.curvature() == Curvature::Linear || geom.n < 2) {
    return th;  // every active budget keeps the full support
  }
  th.lambda_at_theta = lambda_chain(geom.n - 2, geom, cost, cfg);
  th.theta.resize(th.lambda_at_theta.size());
  for (std::size_t k = 0; k < th.theta.size(); ++k) {
    th.theta[k] = expected_cost(
        support_k_distribution(static_cast<int>(k), th.lambda_at_theta[k], geom, cost), cost);
  }
  return th;
}

Regime classify(const ChannelGeometry& geom, const CostFunction& cost, double cbar) {
  if (!(cbar > 0.0) || cbar > 1.0) {
    fail(ErrorCode::InvalidBudget, "budget must lie in (0, 1], got " + fmt(cbar));
  }
  Thresholds th;
  if (!geom.is_integer && cost.concave_or_linear()) {
    th = thresholds(geom, cost);
  } else {
    th.cbar_star = cbar_star(geom, cost);
  }
  return classify(geom, cost, cbar, th);
}

Regime classify(const ChannelGeometry& geom, const CostFunction& cost, double cbar,
                const Thresholds& th) {
  if (!(cbar > 0.0) || cbar > 1.0) {
    fail(ErrorCode::InvalidBudget, "budget must lie in (0, 1], got " + fmt(cbar));
  }
  if (cbar >= th.cbar_star) return {Regime::Kind::CaseI, 0};
  if (!cost.concave_or_linear()) return {Regime::Kind::CaseIII, 0};
  if (geom.is_integer) return {Regime::Kind::CaseIIa, 0};
  int k = 0;
  while (k < static_cast<int>(th.theta.size()) && cbar <= th.theta[k]) ++k;
  return {Regime::Kind::CaseIIb, k};
}

DiscreteInputDistribution support_k_distribution(int k, double lambda,
                                                 const ChannelGeometry& geom,
                                                 const CostFunction& cost) {
  if (geom.is_integer) fail(ErrorCode::InvalidK, "support construction requires non-integer r");
  const int n = geom.n;
  if (k < 0 || k > n - 1) {
    fail(ErrorCode::InvalidK, "k must lie in [0, n-1], got " + std::to_string(k));
  }
  const std::vector<double> grid = unconstrained_positions(geom);
  const CombinedMasses cm = combined_masses(k, lambda, geom, cost);
  const std::vector<double> right = back_transform(cm);

  std::vector<double> x, m;
  x.reserve(k + right.size());
  m.reserve(k + right.size());
  if (k > 0) {
    std::vector<double> left_energy(k);
    for (int j = 1; j <= k; ++j) left_energy[j - 1] = cost(grid[2 * j - 2]);
    const std::vector<double> left = boltzmann(left_energy, lambda, cm.m_less);
    for (int j = 1; j <= k; ++j) {
      x.push_back(grid[2 * j - 2]);  // x_{2j-1}
      m.push_back(left[j - 1]);
    }
  }
  for (std::size_t t = 0; t < right.size(); ++t) {
    x.push_back(grid[2 * k + t]);  // x_{2k+1} .. x_{2n}
    m.push_back(right[t]);
  }
  return make_distribution(std::move(x), std::move(m));
}

double solve_lambda_star(const ChannelGeometry& geom, const CostFunction& cost, double cbar,
                         const Regime& regime, const Thresholds& th, const RootConfig& cfg) {
  switch (regime.kind) {
    case Regime::Kind::CaseI:
      return 0.0;
    case Regime::Kind::CaseIII:
      fail(ErrorCode::WrongRegime, "no analytic multiplier in the convex regime");
    case Regime::Kind::CaseIIa: {
      auto cost_at = [&](double l) { return expected_cost(integer_masses(l, geom, cost), cost); };
      const double hi = find_upper_lambda(cost_at, cbar, 0.0, cfg.lambda_cap);
      return bisect_budget(cost_at, cbar, 0.0, hi, cfg);
    }
    case Regime::Kind::CaseIIb: {
      const int k = regime.k;
      auto cost_at = [&](double l) {
        return expected_cost(support_k_distribution(k, l, geom, cost), cost);
      };
      const double lo = (k == 0) ? 0.0 : th.lambda_at_theta[k - 1];
      double hi;
      if (k < static_cast<int>(th.lambda_at_theta.size())) {
        hi = th.lambda_at_theta[k];
      } else {
        hi = find_upper_lambda(cost_at, cbar, lo, cfg.lambda_cap);
      }
      return bisect_budget(cost_at, cbar, lo, hi, cfg);
    }
  }
  fail(ErrorCode::WrongRegime, "unhandled regime");
}

AnalyticSolution solve(const ChannelGeometry& geom, const CostFunction& cost, double cbar) {
  Thresholds th;
  if (!geom.is_integer && cost.concave_or_linear()) {
    th = thresholds(geom, cost);
  } else {
    th.cbar_star = cbar_star(geom, cost);
  }
  return solve(geom, cost, cbar, th);
}

AnalyticSolution solve(const ChannelGeometry& geom, const CostFunction& cost, double cbar,
                       const Thresholds& th, const RootConfig& cfg) {
  AnalyticSolution sol;
  sol.thresholds = th;
  sol.regime = classify(geom, cost, cbar, th);
  switch (sol.regime.kind) {
    case Regime::Kind::CaseI:
      sol.lambda_star = 0.0;
      sol.distribution = unconstrained_solution(geom);
      break;
    case Regime::Kind::CaseIIa:
      sol.lambda_star = solve_lambda_star(geom, cost, cbar, sol.regime, th, cfg);
      sol.distribution = integer_masses(sol.lambda_star, geom, cost);
      break;
    case Regime::Kind::CaseIIb: {
      const int k = sol.regime.k;
      sol.lambda_star = solve_lambda_star(geom, cost, cbar, sol.regime, th, cfg);
      sol.distribution = support_k_distribution(k, sol.lambda_star, geom, cost);
      // Exactly at the band's upper budget the previous support point carries
      // zero mass; report it explicitly.
      if (k >= 1 && std::abs(cbar - th.theta[k - 1]) <= 1e-12) {
        const std::vector<double> grid = unconstrained_positions(geom);
        const double x_gone = grid[2 * k - 1];  // x_{2k}
        auto it = std::upper_bound(sol.distribution.positions.begin(),
                                   sol.distribution.positions.end(), x_gone);
        const auto idx = it - sol.distribution.positions.begin();
        sol.distribution.positions.insert(it, x_gone);
        sol.distribution.masses.insert(sol.distribution.masses.begin() + idx, 0.0);
      }
      break;
    }
    case Regime::Kind::CaseIII:
      fail(ErrorCode::AnalyticUnavailable,
           "active budget with a convex cost: the optimizer is not discrete, use the numerical "
           "solver");
  }
  sol.capacity_nats = capacity_analytic(sol, geom);
  return sol;
}

double capacity_analytic(const AnalyticSolution& solution, const ChannelGeometry& geom) {
  switch (solution.regime.kind) {
    case Regime::Kind::CaseI:
      if (geom.is_integer) return std::log(double(geom.n));
      return geom.rho * std::log(double(geom.n + 1)) + (1.0 - geom.rho) * std::log(double(geom.n));
    case Regime::Kind::CaseIIa:
      return entropy(solution.distribution.masses);
    case Regime::Kind::CaseIIb: {
      const std::vector<double> full = align_to_grid(solution.distribution, geom);
      const auto [mhat, mbar] = combine_full_masses(full, geom);
      return geom.rho * entropy(mhat) + (1.0 - geom.rho) * entropy(mbar);
    }
    case Regime::Kind::CaseIII:
      fail(ErrorCode::WrongRegime, "no closed-form capacity in the convex regime");
  }
  fail(ErrorCode::WrongRegime, "unhandled regime");
}

std::vector<double> align_to_grid(const DiscreteInputDistribution& dist,
                                  const ChannelGeometry& geom) {
  const std::vector<double> grid = unconstrained_positions(geom);
  std::vector<double> full(grid.size(), 0.0);
  std::size_t g = 0;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    while (g < grid.size() && grid[g] < dist.positions[j] - 1e-9) ++g;
    if (g >= grid.size() || std::abs(grid[g] - dist.positions[j]) > 1e-9) {
      fail(ErrorCode::InvalidDistribution,
           "position " + fmt(dist.positions[j]) + " is not on the master grid");
    }
    full[g] += dist.masses[j];
  }
  return full;
}

std::pair<std::vector<double>, std::vector<double>> combine_full_masses(
    const std::vector<double>& full, const ChannelGeometry& geom) {
  if (geom.is_integer || full.size() != static_cast<std::size_t>(2 * geom.n)) {
    fail(ErrorCode::InvalidDistribution, "combined masses need the 2n-point non-integer grid");
  }
  const int n = geom.n;
  std::vector<double> mhat(n + 1), mbar(n);
  mhat[0] = full[0];
  for (int j = 2; j <= n; ++j) mhat[j - 1] = full[2 * j - 3] + full[2 * j - 2];
  mhat[n] = full[2 * n - 1];
  for (int j = 1; j <= n; ++j) mbar[j - 1] = full[2 * j - 2] + full[2 * j - 1];
  return {std::move(mhat), std::move(mbar)};
}

std::vector<double> sweep_budgets(const ChannelGeometry& geom, const CostFunction& cost,
                                  int count) {
  Thresholds th;
  if (!geom.is_integer && cost.concave_or_linear()) {
    th = thresholds(geom, cost);
  } else {
    th.cbar_star = cbar_star(geom, cost);
  }
  const double cstar = th.cbar_star;

  std::vector<double> edges{cstar};
  for (double t : th.theta) edges.push_back(t);
  edges.push_back(0.5 * edges.back());

  std::vector<double> budgets;
  budgets.push_back(std::min(1.0, 0.5 * (1.0 + cstar)));  // inactive region
  budgets.push_back(cstar);                               // boundary, still Case I
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    budgets.push_back(0.5 * (edges[i] + edges[i + 1]));  // one per support band
  }
  const double lo = edges.back();
  const int rem = count - static_cast<int>(budgets.size());
  for (int i = 1; i <= rem; ++i) {
    double v = lo + (cstar - lo) * double(i) / double(rem + 1);
    for (double e : edges) {
      if (std::abs(v - e) < 1e-9) v += (cstar - lo) * 1e-3;
    }
    budgets.push_back(v);
  }
  std::sort(budgets.begin(), budgets.end(), std::greater<>());
  budgets.erase(std::unique(budgets.begin(), budgets.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                budgets.end());
  return budgets;
}

}  // namespace unifcap
