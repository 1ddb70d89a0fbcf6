#include "unifcap/numerical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "unifcap/logging.hpp"

namespace unifcap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Stand-in for log of an empty output cell; finite so the update stays NaN-free.
constexpr double kLogFloor = -768.0;
// Cells never drop below this mass. A dead cell would zero its output window,
// which makes the window look infinitely informative and blows up the update
// normalizer once the multiplier grows; a live floor keeps the fixed point
// reachable from both directions and costs nothing at any reported tolerance.
constexpr double kMassFloor = 1e-250;

// Single-channel alternating-maximization engine with reusable buffers. All
// per-iteration work is O(G_in + G_out): the output distribution comes from a
// difference-array sweep, the per-row cross entropies from prefix sums, and
// logs are only recomputed for output cells whose probability actually moved.
class BAEngine {
 public:
  BAEngine(const DiscretizedChannel& chan, const CostFunction& cost)
      : chan_(chan),
        two_b_(2.0 * chan.geom.b),
        cost_cell_(chan.g_in),
        span_(chan.g_in),
        row_logw_(chan.g_in),
        q_(chan.g_out),
        q_cached_(chan.g_out, -1.0),
        logq_(chan.g_out),
        prefix_logq_(chan.g_out + 1, 0.0),
        interior_(chan.g_out + 1),
        t_(chan.g_in),
        d_(chan.g_in) {
    const double log_wout = std::log(chan.out_width / two_b_);
    for (int i = 0; i < chan.g_in; ++i) {
      cost_cell_[i] = cost(chan.input_center(i));
      const auto s = span_[i] = chan.row_span(i);
      double r = 0.0;
      if (s.hi > s.lo) {
        if (s.cov_lo > 0.0) r += s.cov_lo * std::log(s.cov_lo / two_b_);
        if (s.cov_hi > 0.0) r += s.cov_hi * std::log(s.cov_hi / two_b_);
        r += double(s.hi - s.lo - 1) * chan.out_width * log_wout;
      }
      row_logw_[i] = r / two_b_;
    }
  }

  struct Inner {
    double capacity = 0.0;
    double cost = 0.0;
    double objective = 0.0;  // capacity - lambda * cost
    double gap = kInf;
    long iterations = 0;
    bool converged = false;
  };

  // Iterates until the optimality bracket gap or the per-iteration objective
  // increment falls below its tolerance, whichever happens first. The
  // increment stop only fires once the gap is already small, so a slowly
  // draining transient cannot masquerade as convergence.
  Inner run(double lambda, std::vector<double>& p, double gap_tol, double increment_tol,
            double gap_guard, long max_iters) {
    Inner out;
    double prev_objective = kInf;
    for (long iter = 0;; ++iter) {
      update_output(p);
      double max_t = -kInf, mean_t = 0.0, mean_d = 0.0, mean_c = 0.0;
      for (int i = 0; i < chan_.g_in; ++i) {
        const auto& s = span_[i];
        double cross;
        if (s.hi > s.lo) {
          cross = s.cov_lo * logq_[s.lo] + s.cov_hi * logq_[s.hi] +
                  chan_.out_width * (prefix_logq_[s.hi] - prefix_logq_[s.lo + 1]);
        } else {
          cross = s.cov_lo * logq_[s.lo];
        }
        d_[i] = row_logw_[i] - cross / two_b_;
        t_[i] = d_[i] - lambda * cost_cell_[i];
        max_t = std::max(max_t, t_[i]);
        mean_t += p[i] * t_[i];
        mean_d += p[i] * d_[i];
        mean_c += p[i] * cost_cell_[i];
      }
      out.capacity = mean_d;
      out.cost = mean_c;
      out.objective = mean_t;
      out.gap = max_t - mean_t;
      out.iterations = iter;
      if (out.gap <= gap_tol || (out.gap <= gap_guard &&
                                 std::abs(out.objective - prev_objective) <= increment_tol)) {
        out.converged = true;
        return out;
      }
      if (iter >= max_iters) {
        out.converged = false;
        return out;
      }
      prev_objective = out.objective;
      double z = 0.0;
      for (int i = 0; i < chan_.g_in; ++i) {
        p[i] = std::max(p[i] * std::exp(t_[i] - max_t), kMassFloor);
        z += p[i];
      }
      for (int i = 0; i < chan_.g_in; ++i) p[i] /= z;
    }
  }

  Inner run(double lambda, std::vector<double>& p, const BAConfig& cfg, long max_iters) {
    return run(lambda, p, cfg.inner_tol, cfg.increment_tol, cfg.increment_gap_guard, max_iters);
  }

  const std::vector<double>& cell_costs() const { return cost_cell_; }

 private:
  void update_output(const std::vector<double>& p) {
    std::fill(q_.begin(), q_.end(), 0.0);
    std::fill(interior_.begin(), interior_.end(), 0.0);
    for (int i = 0; i < chan_.g_in; ++i) {
      const auto& s = span_[i];
      if (s.hi > s.lo) {
        q_[s.lo] += p[i] * s.cov_lo;
        q_[s.hi] += p[i] * s.cov_hi;
        interior_[s.lo + 1] += p[i];
        interior_[s.hi] -= p[i];
      } else {
        q_[s.lo] += p[i] * s.cov_lo;
      }
    }
    double run = 0.0;
    for (int m = 0; m < chan_.g_out; ++m) {
      run += interior_[m];
      q_[m] = (q_[m] + run * chan_.out_width) / two_b_;
      // Refresh the cached log only when this cell moved beyond roundoff.
      if (std::abs(q_[m] - q_cached_[m]) > 1e-13 * q_cached_[m] || q_cached_[m] < 0.0) {
        q_cached_[m] = q_[m];
        logq_[m] = q_[m] > 0.0 ? std::log(q_[m]) : kLogFloor;
      }
      prefix_logq_[m + 1] = prefix_logq_[m] + logq_[m];
    }
  }

  const DiscretizedChannel& chan_;
  double two_b_;
  std::vector<double> cost_cell_;
  std::vector<DiscretizedChannel::RowSpan> span_;
  std::vector<double> row_logw_;
  std::vector<double> q_, q_cached_, logq_, prefix_logq_, interior_, t_, d_;
};

std::vector<double> uniform_input(int g_in) {
  return std::vector<double>(g_in, 1.0 / double(g_in));
}

BAResult assemble(double lambda, const BAEngine::Inner& inner, std::vector<double> p) {
  BAResult res;
  res.input = GriddedDensity{0.0, 1.0, std::move(p)};
  res.lambda = lambda;
  res.capacity_nats = inner.capacity;
  res.achieved_cost = inner.cost;
  res.iterations = inner.iterations;
  res.converged = inner.converged;
  res.final_gap = inner.gap;
  return res;
}

// Warm restarts revive underflowed cells so mass can flow back when the
// multiplier moves during bisection.
void remix(std::vector<double>& p) {
  const double eps = 1e-9 / double(p.size());
  double z = 0.0;
  for (double& v : p) {
    v += eps;
    z += v;
  }
  for (double& v : p) v /= z;
}

}  // namespace

DiscretizedChannel::RowSpan DiscretizedChannel::row_span(int i) const {
  const double x = input_center(i);
  const double xl = x - geom.b, xr = x + geom.b;
  int lo = static_cast<int>(std::floor((xl - out_lo) / out_width));
  int hi = static_cast<int>(std::floor((xr - out_lo) / out_width));
  lo = std::clamp(lo, 0, g_out - 1);
  hi = std::clamp(hi, lo, g_out - 1);
  RowSpan s;
  s.lo = lo;
  s.hi = hi;
  if (hi > lo) {
    s.cov_lo = std::max(0.0, output_edge(lo + 1) - xl);
    s.cov_hi = std::max(0.0, xr - output_edge(hi));
  } else {
    s.cov_lo = xr - xl;
    s.cov_hi = 0.0;
  }
  return s;
}

double DiscretizedChannel::w(int m, int i) const {
  const auto s = row_span(i);
  if (m < s.lo || m > s.hi) return 0.0;
  if (m == s.lo) return s.cov_lo / (2.0 * geom.b);
  if (m == s.hi) return s.cov_hi / (2.0 * geom.b);
  return out_width / (2.0 * geom.b);
}

std::vector<double> DiscretizedChannel::row(int i) const {
  std::vector<double> r(g_out, 0.0);
  const auto s = row_span(i);
  for (int m = s.lo; m <= s.hi; ++m) r[m] = w(m, i);
  return r;
}

double DiscretizedChannel::row_sum(int i) const {
  const auto s = row_span(i);
  double sum = 0.0, comp = 0.0;  // Kahan
  for (int m = s.lo; m <= s.hi; ++m) {
    const double y = w(m, i) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

DiscretizedChannel discretize(const ChannelGeometry& geom, int g_in, int g_out) {
  if (g_in < 2 || g_out < 2) fail(ErrorCode::GridTooCoarse, "grids need at least 2 cells");
  DiscretizedChannel chan;
  chan.geom = geom;
  chan.g_in = g_in;
  chan.g_out = g_out;
  chan.in_width = 1.0 / double(g_in - 1);
  chan.out_lo = -geom.b;
  chan.out_width = (1.0 + 2.0 * geom.b) / double(g_out);
  if (chan.out_width > 2.0 * geom.b) {
    fail(ErrorCode::GridTooCoarse, "output cells wider than the noise kernel; raise G_out");
  }
  return chan;
}

BAResult ba_fixed_lambda(const DiscretizedChannel& chan, const CostFunction& cost, double lambda,
                         const BAConfig& config) {
  return ba_fixed_lambda(chan, cost, lambda, config, uniform_input(chan.g_in));
}

BAResult ba_fixed_lambda(const DiscretizedChannel& chan, const CostFunction& cost, double lambda,
                         const BAConfig& config, std::vector<double> initial) {
  if (lambda < 0.0) fail(ErrorCode::InvalidBudget, "multiplier must be nonnegative");
  if (static_cast<int>(initial.size()) != chan.g_in) {
    fail(ErrorCode::GridTooCoarse, "initial distribution size must match the input grid");
  }
  double z = 0.0;
  for (double v : initial) {
    if (v < 0.0) fail(ErrorCode::NegativeMass, "initial distribution must be nonnegative");
    z += v;
  }
  for (double& v : initial) v /= z;
  BAEngine engine(chan, cost);
  const auto inner = engine.run(lambda, initial, config, config.max_inner_iterations);
  return assemble(lambda, inner, std::move(initial));
}

BAResult ba_solve(const DiscretizedChannel& chan, const CostFunction& cost, double cbar,
                  const BAConfig& config) {
  if (!(cbar > 0.0) || cbar > 1.0) {
    fail(ErrorCode::InvalidBudget, "budget must lie in (0, 1]");
  }
  BAEngine engine(chan, cost);
  std::vector<double> p = uniform_input(chan.g_in);
  long total_iterations = 0;
  const long probe_cap = std::min<long>(6000, config.max_inner_iterations);
  const long mid_cap = std::min<long>(2500, config.max_inner_iterations);
  const long polish_cap = std::min<long>(1500, config.max_inner_iterations);

  // Activity probe: a coarse unconstrained solve decides whether the budget
  // binds at all; its accuracy (~1e-4 in cost) is far finer than any sensible
  // budget-to-critical-cost distance.
  auto inner = engine.run(0.0, p, config.inner_tol, 1e-8, 1.0, probe_cap);
  total_iterations += inner.iterations;
  if (inner.cost <= cbar) {
    inner = engine.run(0.0, p, config, config.max_inner_iterations);
    inner.iterations += total_iterations;
    return assemble(0.0, inner, std::move(p));  // constraint inactive
  }

  auto eval = [&](double lambda, long cap) {
    remix(p);
    auto res = engine.run(lambda, p, config, cap);
    total_iterations += res.iterations;
    return res;
  };

  // Doubling bracket, then coarse bisection on the achieved cost.
  double lo = 0.0;
  double hi = 1.0;
  inner = eval(hi, mid_cap);
  while (inner.cost > cbar) {
    lo = hi;
    hi *= 2.0;
    if (hi > config.lambda_cap) {
      fail(ErrorCode::BracketFailure, "no multiplier below the cap meets the budget");
    }
    inner = eval(hi, mid_cap);
  }
  double lambda = hi;
  const double coarse_tol = std::max(config.outer_cost_tol, 1e-5);
  for (int it = 0; it < 80 && std::abs(inner.cost - cbar) > coarse_tol; ++it) {
    lambda = 0.5 * (lo + hi);
    inner = eval(lambda, mid_cap);
    if (inner.cost > cbar) lo = lambda; else hi = lambda;
    if (hi - lo <= 1e-9 * std::max(1.0, hi)) break;
  }

  // Consolidate the support at the coarse multiplier, then polish the
  // multiplier with short re-equilibrations. The achieved-cost sensitivity to
  // the multiplier is -Var(c), which gives a Newton step.
  inner = engine.run(lambda, p, config, config.max_inner_iterations);
  total_iterations += inner.iterations;
  for (int round = 0; round < 60; ++round) {
    const double err = inner.cost - cbar;
    if (std::abs(err) <= config.outer_cost_tol) break;
    double mean = 0.0, second = 0.0;
    const auto& costs = engine.cell_costs();
    for (int i = 0; i < chan.g_in; ++i) {
      mean += p[i] * costs[i];
      second += p[i] * costs[i] * costs[i];
    }
    const double var = second - mean * mean;
    if (!(var > 1e-14)) break;
    double next = lambda + err / var;
    next = std::clamp(next, 0.25 * lambda, 4.0 * lambda);
    if (!(next > 0.0) || next > config.lambda_cap) break;
    lambda = next;
    inner = eval(lambda, polish_cap);
    log_debug("ba_solve polish: lambda=" + std::to_string(lambda) +
              " cost=" + std::to_string(inner.cost) + " gap=" + std::to_string(inner.gap));
  }
  inner.converged = inner.converged && std::abs(inner.cost - cbar) <= config.outer_cost_tol;
  inner.iterations = total_iterations;
  return assemble(lambda, inner, std::move(p));
}

SupportClusters extract_support(const BAResult& result, const DiscretizedChannel& chan,
                                double mass_threshold, int smooth_halfwidth,
                                double cluster_mass_floor) {
  const double thr = mass_threshold < 0.0 ? 0.01 / double(chan.g_in) : mass_threshold;
  const auto& p = result.input.probs;
  const int n = static_cast<int>(p.size());

  // Occupancy on the windowed mass profile; cluster statistics on the raw one.
  std::vector<bool> occupied(n);
  for (int i = 0; i < n; ++i) {
    double local = 0.0;
    for (int j = std::max(0, i - smooth_halfwidth); j <= std::min(n - 1, i + smooth_halfwidth);
         ++j) {
      local += p[j];
    }
    occupied[i] = local > thr;
  }

  SupportClusters sc;
  int run_start = -1;
  double run_mass = 0.0, run_moment = 0.0;
  auto close_run = [&](int last) {
    if (run_mass > 0.0) {
      SupportClusters::Cluster c;
      c.first_cell = run_start;
      c.last_cell = last;
      c.mass = run_mass;
      c.position = run_moment / run_mass;
      sc.clusters.push_back(c);
    }
    run_start = -1;
    run_mass = run_moment = 0.0;
  };
  for (int i = 0; i < n; ++i) {
    if (occupied[i]) {
      if (run_start < 0) run_start = i;
      run_mass += p[i];
      run_moment += p[i] * result.input.center(i);
    } else if (run_start >= 0) {
      close_run(i - 1);
    }
  }
  if (run_start >= 0) close_run(n - 1);

  for (std::size_t c = 1; c < sc.clusters.size(); ++c) {
    sc.gap_widths.push_back(sc.clusters[c].first_cell - sc.clusters[c - 1].last_cell - 1);
  }
  sc.largest_interior_gap =
      sc.gap_widths.empty() ? 0 : *std::max_element(sc.gap_widths.begin(), sc.gap_widths.end());
  for (const auto& c : sc.clusters) {
    sc.clustered_mass += c.mass;
    if (c.mass >= cluster_mass_floor) ++sc.significant_clusters;
  }
  sc.full_support = !sc.clusters.empty() && sc.largest_interior_gap <= 3;
  sc.discrete = !sc.clusters.empty() &&
                sc.significant_clusters <= 2 * chan.geom.n &&
                sc.clustered_mass >= 0.999;
  return sc;
}

}  // namespace unifcap
