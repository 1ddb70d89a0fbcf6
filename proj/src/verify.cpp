#include "unifcap/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace unifcap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Boltzmann masses on the integer grid without the lambda >= 0 precondition;
// the derivative check probes lambda - h slightly below zero.
DiscreteInputDistribution integer_boltzmann_any(double lambda, const ChannelGeometry& geom,
                                                const CostFunction& cost) {
  std::vector<double> x = unconstrained_positions(geom);
  std::vector<double> w(x.size());
  double emax = -kInf;
  for (std::size_t j = 0; j < x.size(); ++j) emax = std::max(emax, -lambda * cost(x[j]));
  double z = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    w[j] = std::exp(-lambda * cost(x[j]) - emax);
    z += w[j];
  }
  for (double& v : w) v /= z;
  return make_distribution(std::move(x), std::move(w));
}

}  // namespace

KKTReport kkt_report(const DiscreteInputDistribution& dist, double lambda,
                     const ChannelGeometry& geom, const CostFunction& cost, double cbar,
                     std::size_t grid_size, double tol_eq, double tol_ineq, bool relative) {
  validate(dist);
  const PiecewiseConstantDensity py = output_density(dist, geom);

  KKTReport rep;
  rep.lambda = lambda;
  rep.tol_eq = tol_eq;
  rep.tol_ineq = tol_ineq;
  rep.relative = relative;

  double info = 0.0;
  std::vector<double> i_at_support(dist.size(), 0.0);
  bool degenerate = false;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    i_at_support[j] = marginal_information_density(dist.positions[j], py, geom);
    if (dist.masses[j] > 0.0) {
      if (!std::isfinite(i_at_support[j])) degenerate = true;
      info += dist.masses[j] * i_at_support[j];
    }
  }
  rep.mutual_information = info;

  const double scale =
      relative ? std::max(1.0, std::abs(info) + lambda * std::max(cbar, 1.0 - cbar)) : 1.0;

  for (std::size_t j = 0; j < dist.size(); ++j) {
    if (dist.masses[j] <= 0.0) continue;
    const double rhs = info + lambda * (cost(dist.positions[j]) - cbar);
    const double res = std::abs(i_at_support[j] - rhs) / scale;
    rep.max_equality_residual = std::max(rep.max_equality_residual, res);
  }

  // Dense inequality grid: uniform points plus every kink of i(x). The density
  // is piecewise constant, so i(x) can only kink where a window edge crosses a
  // density breakpoint.
  std::vector<double> xs;
  xs.reserve(grid_size + 2 * py.breakpoints.size() + dist.size());
  for (std::size_t t = 0; t < grid_size; ++t) {
    xs.push_back(double(t) / double(grid_size - 1));
  }
  for (double bp : py.breakpoints) {
    const double xl = bp + geom.b, xr = bp - geom.b;
    if (xl >= 0.0 && xl <= 1.0) xs.push_back(xl);
    if (xr >= 0.0 && xr <= 1.0) xs.push_back(xr);
  }
  xs.insert(xs.end(), dist.positions.begin(), dist.positions.end());

  for (double x : xs) {
    const double ix = marginal_information_density(x, py, geom);
    const double rhs = info + lambda * (cost(x) - cbar);
    const double viol = std::isfinite(ix) ? (ix - rhs) / scale : kInf;
    if (viol > rep.max_inequality_violation) {
      rep.max_inequality_violation = viol;
      rep.worst_x = x;
    }
  }
  rep.max_inequality_violation = std::max(rep.max_inequality_violation, 0.0);

  rep.pass = !degenerate && rep.max_equality_residual <= tol_eq &&
             rep.max_inequality_violation <= tol_ineq;
  if (degenerate) rep.max_equality_residual = kInf;
  return rep;
}

LinearityReport check_piecewise_linear(const DiscreteInputDistribution& dist,
                                       const ChannelGeometry& geom, std::size_t refinement) {
  const std::vector<double> grid = unconstrained_positions(geom);
  const std::vector<double> full = align_to_grid(dist, geom);
  const PiecewiseConstantDensity py = output_density(dist, geom);

  auto mass = [&](int j) {  // 1-based, zero outside the grid
    if (j < 1 || j > static_cast<int>(full.size())) return 0.0;
    return full[j - 1];
  };

  LinearityReport rep;
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    LinearityReport::Segment seg;
    seg.x_lo = grid[j];
    seg.x_hi = grid[j + 1];

    const std::size_t pts = std::max<std::size_t>(refinement, 3);
    std::vector<double> vals(pts);
    for (std::size_t t = 0; t < pts; ++t) {
      const double x = seg.x_lo + (seg.x_hi - seg.x_lo) * double(t) / double(pts - 1);
      vals[t] = marginal_information_density(x, py, geom);
    }
    for (std::size_t t = 1; t + 1 < pts; ++t) {
      seg.max_second_difference = std::max(
          seg.max_second_difference, std::abs(vals[t + 1] - 2.0 * vals[t] + vals[t - 1]));
    }
    seg.measured_slope = (vals.back() - vals.front()) / (seg.x_hi - seg.x_lo);

    const int j1 = static_cast<int>(j) + 1;  // 1-based segment index
    double num, den;
    if (geom.is_integer) {
      num = mass(j1);
      den = mass(j1 + 1);
    } else {
      num = mass(j1 - 1) + mass(j1);
      den = mass(j1 + 1) + mass(j1 + 2);
    }
    if (num > 0.0 && den > 0.0) {
      seg.slope_defined = true;
      seg.formula_slope = geom.r * std::log(num / den);
      seg.slope_deviation = std::abs(seg.measured_slope - seg.formula_slope);
      rep.max_slope_deviation = std::max(rep.max_slope_deviation, seg.slope_deviation);
    }
    rep.max_second_difference = std::max(rep.max_second_difference, seg.max_second_difference);
    rep.segments.push_back(seg);
  }
  return rep;
}

double mi_quadrature_oracle(const DiscreteInputDistribution& dist, const ChannelGeometry& geom,
                            std::size_t fine_grid) {
  validate(dist);
  const double lo = -geom.b, hi = 1.0 + geom.b;
  const double w = (hi - lo) / double(fine_grid);
  double h = 0.0;
  for (std::size_t i = 0; i < fine_grid; ++i) {
    const double y = lo + (double(i) + 0.5) * w;
    double p = 0.0;
    for (std::size_t j = 0; j < dist.size(); ++j) {
      if (std::abs(y - dist.positions[j]) < geom.b) p += dist.masses[j];
    }
    p *= geom.r;
    if (p > 0.0) h -= w * p * std::log(p);
  }
  return h - std::log(2.0 * geom.b);
}

double cost_derivative_check(double lambda, const ChannelGeometry& geom,
                             const CostFunction& cost) {
  if (!geom.is_integer) fail(ErrorCode::WrongRegime, "derivative identity uses the integer grid");
  const double h = 1e-5;
  auto cost_at = [&](double l) {
    return expected_cost(integer_boltzmann_any(l, geom, cost), cost);
  };
  const double fd = (cost_at(lambda + h) - cost_at(lambda - h)) / (2.0 * h);

  const DiscreteInputDistribution d = integer_boltzmann_any(lambda, geom, cost);
  double mean = 0.0, second = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double c = cost(d.positions[j]);
    mean += d.masses[j] * c;
    second += d.masses[j] * c * c;
  }
  const double var = second - mean * mean;
  return std::abs(fd + var);
}

double integer_limit_check(int m, double delta) {
  if (m < 1) fail(ErrorCode::NonPositiveR, "integer limit needs m >= 1");
  if (!(delta >= 0.0) || delta > 1e-4) {
    fail(ErrorCode::InvalidBudget, "delta must lie in [0, 1e-4]");
  }
  const ChannelGeometry gi = make_geometry(double(m));
  const ChannelGeometry gn = make_geometry(double(m) + delta);
  const DiscreteInputDistribution di = unconstrained_solution(gi);
  const DiscreteInputDistribution dn = unconstrained_solution(gn);
  if (gn.is_integer) return 0.0;  // delta below the snap width: same branch

  double mass_dev = 0.0, pos_dev = 0.0;
  for (int j = 1; j <= 2 * gn.n; j += 2) {
    const int t = (j + 1) / 2;  // merged integer-grid index
    mass_dev = std::max(mass_dev,
                        std::abs(dn.masses[j - 1] + dn.masses[j] - di.masses[t - 1]));
    pos_dev = std::max(pos_dev, std::abs(dn.positions[j - 1] - di.positions[t - 1]));
    pos_dev = std::max(pos_dev, std::abs(dn.positions[j] - di.positions[t - 1]));
  }
  return mass_dev + pos_dev;
}

}  // namespace unifcap
