#include "unifcap/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace unifcap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveR: return "NonPositiveR";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::InvalidCost: return "InvalidCost";
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::InfeasibleSupport: return "InfeasibleSupport";
    case ErrorCode::NoRootFound: return "NoRootFound";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::InvalidBudget: return "InvalidBudget";
    case ErrorCode::AnalyticUnavailable: return "AnalyticUnavailable";
    case ErrorCode::WrongRegime: return "WrongRegime";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::NotConverged: return "NotConverged";
  }
  return "UnknownError";
}

const char* to_string(Curvature c) {
  switch (c) {
    case Curvature::StrictlyConcave: return "strictly-concave";
    case Curvature::Linear: return "linear";
    case Curvature::ConvexOnInterval: return "convex-on-interval";
  }
  return "unknown";
}

ChannelGeometry make_geometry(double r, double eps_int) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    fail(ErrorCode::NonPositiveR, "inverse noise width must be a positive real, got " + fmt(r));
  }
  ChannelGeometry g;
  const double nearest = std::round(r);
  if (nearest >= 1.0 && std::abs(r - nearest) < eps_int) {
    // Snap: the non-integer formulas converge to the integer ones as rho -> 0,
    // so classifying the band as integer keeps everything continuous.
    g.r = nearest;
    g.rho = 0.0;
    g.is_integer = true;
    g.n = static_cast<int>(nearest) + 1;
  } else {
    g.r = r;
    g.rho = r - std::floor(r);
    g.is_integer = false;
    g.n = static_cast<int>(std::floor(r)) + 1;
  }
  g.b = 1.0 / (2.0 * g.r);
  return g;
}

void CostFunction::validate() const {
  const double c0 = eval_(0.0);
  const double c1 = eval_(1.0);
  if (std::abs(c0) > tolerances::kEndpoint || std::abs(c1 - 1.0) > tolerances::kEndpoint) {
    fail(ErrorCode::InvalidCost,
         "cost must satisfy c(0)=0 and c(1)=1, got c(0)=" + fmt(c0) + ", c(1)=" + fmt(c1));
  }
  // Monotonicity: derivative positive on a midpoint sample (endpoints excluded;
  // the power family has c'(0) = 0 or infinity there).
  constexpr int kSamples = 1024;
  double prev = c0;
  for (int t = 0; t < kSamples; ++t) {
    const double x = (t + 0.5) / kSamples;
    if (!(deriv_(x) > 0.0)) {
      fail(ErrorCode::InvalidCost, "cost derivative not positive at x=" + fmt(x));
    }
    const double v = eval_(x);
    if (!(v >= prev)) {
      fail(ErrorCode::InvalidCost, "cost values not increasing near x=" + fmt(x));
    }
    prev = v;
  }
  // Declared curvature must not be refuted by sampled second differences.
  const double h = 1.0 / kSamples;
  for (int t = 1; t + 1 < kSamples; ++t) {
    const double x = (t + 0.5) / kSamples;
    const double d2 = eval_(x + h) - 2.0 * eval_(x) + eval_(x - h);
    switch (curvature_) {
      case Curvature::StrictlyConcave:
        if (d2 > tolerances::kCurvature) {
          fail(ErrorCode::InvalidCost, "declared concave but convex near x=" + fmt(x));
        }
        break;
      case Curvature::Linear:
        if (std::abs(d2) > tolerances::kCurvature) {
          fail(ErrorCode::InvalidCost, "declared linear but curved near x=" + fmt(x));
        }
        break;
      case Curvature::ConvexOnInterval:
        if (x >= convex_interval_.first && x <= convex_interval_.second &&
            d2 < -tolerances::kCurvature) {
          fail(ErrorCode::InvalidCost, "declared convex on interval but concave near x=" + fmt(x));
        }
        break;
    }
  }
}

CostFunction CostFunction::power(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    fail(ErrorCode::InvalidCost, "power cost requires alpha > 0, got " + fmt(alpha));
  }
  CostFunction c;
  c.family_ = "power";
  c.alpha_ = alpha;
  c.eval_ = [alpha](double x) { return std::pow(x, alpha); };
  c.deriv_ = [alpha](double x) { return alpha * std::pow(x, alpha - 1.0); };
  if (alpha < 1.0) {
    c.curvature_ = Curvature::StrictlyConcave;
  } else if (alpha == 1.0) {
    c.curvature_ = Curvature::Linear;
  } else {
    c.curvature_ = Curvature::ConvexOnInterval;
    c.convex_interval_ = {0.0, 1.0};
  }
  c.validate();
  return c;
}

CostFunction CostFunction::from_table(std::vector<double> xs, std::vector<double> values) {
  if (xs.size() != values.size() || xs.size() < 2) {
    fail(ErrorCode::InvalidCost, "cost table needs two columns of equal length >= 2");
  }
  if (std::abs(xs.front()) > tolerances::kEndpoint || std::abs(xs.back() - 1.0) > tolerances::kEndpoint) {
    fail(ErrorCode::InvalidCost, "cost table must cover x = 0 and x = 1");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) fail(ErrorCode::InvalidCost, "cost table x values must be ascending");
    if (!(values[i] > values[i - 1])) {
      fail(ErrorCode::InvalidCost, "cost table values must be strictly increasing");
    }
  }
  xs.front() = 0.0;
  xs.back() = 1.0;

  // Node derivatives: central differences inside, one-sided at the ends.
  const std::size_t m = xs.size();
  std::vector<double> dv(m);
  dv.front() = (values[1] - values[0]) / (xs[1] - xs[0]);
  dv.back() = (values[m - 1] - values[m - 2]) / (xs[m - 1] - xs[m - 2]);
  for (std::size_t i = 1; i + 1 < m; ++i) {
    dv[i] = (values[i + 1] - values[i - 1]) / (xs[i + 1] - xs[i - 1]);
  }

  // Curvature class from second divided differences.
  bool any_convex = false, any_concave = false;
  double convex_lo = 1.0, convex_hi = 0.0;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double s1 = (values[i] - values[i - 1]) / (xs[i] - xs[i - 1]);
    const double s2 = (values[i + 1] - values[i]) / (xs[i + 1] - xs[i]);
    const double d2 = s2 - s1;
    if (d2 > tolerances::kCurvature) {
      any_convex = true;
      convex_lo = std::min(convex_lo, xs[i - 1]);
      convex_hi = std::max(convex_hi, xs[i + 1]);
    } else if (d2 < -tolerances::kCurvature) {
      any_concave = true;
    }
  }

  CostFunction c;
  c.family_ = "table";
  auto interp = [xs = std::move(xs), ys = std::move(values)](double x, const std::vector<double>* slopes) {
    if (x <= xs.front()) return slopes ? (*slopes).front() : ys.front();
    if (x >= xs.back()) return slopes ? (*slopes).back() : ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    if (slopes) return (1.0 - t) * (*slopes)[i] + t * (*slopes)[i + 1];
    return (1.0 - t) * ys[i] + t * ys[i + 1];
  };
  c.eval_ = [interp](double x) { return interp(x, nullptr); };
  c.deriv_ = [interp, dv = std::move(dv)](double x) { return interp(x, &dv); };
  if (any_convex) {
    c.curvature_ = Curvature::ConvexOnInterval;
    c.convex_interval_ = {convex_lo, convex_hi};
  } else if (any_concave) {
    c.curvature_ = Curvature::StrictlyConcave;
  } else {
    c.curvature_ = Curvature::Linear;
  }
  // Tables interpolate linearly, so skip the dense resample check; the divided
  // differences above already fixed the class consistently.
  const double c0 = c.eval_(0.0), c1 = c.eval_(1.0);
  if (std::abs(c0) > tolerances::kEndpoint || std::abs(c1 - 1.0) > tolerances::kEndpoint) {
    fail(ErrorCode::InvalidCost, "cost table must be normalized to c(0)=0, c(1)=1");
  }
  return c;
}

DiscreteInputDistribution make_distribution(std::vector<double> positions,
                                            std::vector<double> masses) {
  DiscreteInputDistribution d{std::move(positions), std::move(masses)};
  validate(d);
  return d;
}

void validate(const DiscreteInputDistribution& dist) {
  if (dist.positions.size() != dist.masses.size() || dist.positions.empty()) {
    fail(ErrorCode::InvalidDistribution, "positions and masses must be nonempty and equal-sized");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    const double x = dist.positions[j];
    if (!(x >= 0.0 && x <= 1.0)) {
      fail(ErrorCode::InvalidDistribution, "position outside [0,1]: " + fmt(x));
    }
    if (j > 0 && !(x > dist.positions[j - 1])) {
      fail(ErrorCode::InvalidDistribution, "positions must be strictly ascending");
    }
    if (dist.masses[j] < 0.0) {
      fail(ErrorCode::InvalidDistribution, "negative mass at x=" + fmt(x));
    }
    sum += dist.masses[j];
  }
  if (std::abs(sum - 1.0) > tolerances::kMassSum) {
    fail(ErrorCode::InvalidDistribution, "masses must sum to 1, got " + fmt(sum));
  }
}

double PiecewiseConstantDensity::integral() const {
  double s = 0.0;
  for (std::size_t i = 0; i < heights.size(); ++i) {
    s += heights[i] * (breakpoints[i + 1] - breakpoints[i]);
  }
  return s;
}

double PiecewiseConstantDensity::value(double y) const {
  if (breakpoints.empty() || y < breakpoints.front() || y >= breakpoints.back()) return 0.0;
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), y);
  const std::size_t i = static_cast<std::size_t>(it - breakpoints.begin());
  if (i == 0 || i > heights.size()) return 0.0;
  return heights[i - 1];
}

PiecewiseConstantDensity output_density(const DiscreteInputDistribution& dist,
                                        const ChannelGeometry& geom) {
  validate(dist);
  const double b = geom.b;
  std::vector<double> pts;
  pts.reserve(2 * dist.size() + 2);
  pts.push_back(-b);
  pts.push_back(1.0 + b);
  for (double x : dist.positions) {
    pts.push_back(x - b);
    pts.push_back(x + b);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> bp;
  bp.reserve(pts.size());
  for (double p : pts) {
    if (bp.empty() || p - bp.back() > tolerances::kSliver) bp.push_back(p);
  }

  PiecewiseConstantDensity py;
  py.breakpoints = std::move(bp);
  py.heights.resize(py.breakpoints.size() - 1);
  for (std::size_t s = 0; s < py.heights.size(); ++s) {
    const double mid = 0.5 * (py.breakpoints[s] + py.breakpoints[s + 1]);
    double covered = 0.0;
    for (std::size_t j = 0; j < dist.size(); ++j) {
      if (std::abs(mid - dist.positions[j]) < b) covered += dist.masses[j];
    }
    py.heights[s] = geom.r * covered;
  }
  return py;
}

double marginal_information_density(double x, const PiecewiseConstantDensity& py,
                                    const ChannelGeometry& geom) {
  const double b = geom.b;
  const double lo = x - b, hi = x + b;
  if (lo < py.breakpoints.front() - tolerances::kSliver ||
      hi > py.breakpoints.back() + tolerances::kSliver) {
    return kInf;  // the window reaches beyond the covered interval, density 0 there
  }
  const auto begin = py.breakpoints.begin();
  std::size_t s = 0;
  {
    const auto it = std::upper_bound(begin, py.breakpoints.end(), lo);
    s = (it == begin) ? 0 : static_cast<std::size_t>(it - begin) - 1;
  }
  double acc = 0.0;
  const double log2b = std::log(2.0 * b);
  for (; s < py.heights.size() && py.breakpoints[s] < hi; ++s) {
    const double a = std::max(lo, py.breakpoints[s]);
    const double e = std::min(hi, py.breakpoints[s + 1]);
    const double w = e - a;
    if (w <= 0.0) continue;
    const double h = py.heights[s];
    if (h <= 0.0) {
      if (w > tolerances::kSliver) return kInf;
      continue;
    }
    acc += w * (log2b + std::log(h));
  }
  return -acc / (2.0 * b);
}

double marginal_information_density(double x, const DiscreteInputDistribution& dist,
                                    const ChannelGeometry& geom) {
  return marginal_information_density(x, output_density(dist, geom), geom);
}

double mutual_information(const DiscreteInputDistribution& dist, const ChannelGeometry& geom) {
  const PiecewiseConstantDensity py = output_density(dist, geom);
  double info = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    const double m = dist.masses[j];
    if (m <= 0.0) continue;
    const double ij = marginal_information_density(dist.positions[j], py, geom);
    if (!std::isfinite(ij)) {
      fail(ErrorCode::DegenerateInput,
           "infinite information density at supported x=" + fmt(dist.positions[j]));
    }
    info += m * ij;
  }
  return info;
}

double mutual_information_via_entropy(const DiscreteInputDistribution& dist,
                                      const ChannelGeometry& geom) {
  return differential_entropy(output_density(dist, geom)) - std::log(2.0 * geom.b);
}

double entropy(const std::vector<double>& masses) {
  double h = 0.0;
  for (double m : masses) {
    if (m < 0.0) fail(ErrorCode::NegativeMass, "entropy of a negative mass " + fmt(m));
    h -= xlogx(m);
  }
  return h;
}

double expected_cost(const DiscreteInputDistribution& dist, const CostFunction& cost) {
  double c = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    c += dist.masses[j] * cost(dist.positions[j]);
  }
  return c;
}

double differential_entropy(const PiecewiseConstantDensity& py) {
  double h = 0.0;
  for (std::size_t s = 0; s < py.heights.size(); ++s) {
    const double w = py.breakpoints[s + 1] - py.breakpoints[s];
    h -= w * xlogx(py.heights[s]);
  }
  return h;
}

}  // namespace unifcap
