#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "unifcap/errors.hpp"

namespace unifcap {

namespace tolerances {
inline constexpr double kIntegerSnap = 1e-9;   // width of the snap-to-integer band for r
inline constexpr double kMassSum = 1e-12;      // probability normalization slack
inline constexpr double kEndpoint = 1e-12;     // cost endpoint normalization slack
inline constexpr double kCurvature = 1e-10;    // second-difference sign tolerance
inline constexpr double kSliver = 1e-12;       // ignorable interval width in exact overlap sums
}  // namespace tolerances

/// Geometry of the additive uniform noise channel Y = X + N, N ~ Uniform(-b, b),
/// parametrized by the inverse noise width r = 1/(2b). Values of r within
/// `eps_int` of an integer >= 1 are snapped to it, so the integer formulas apply.
struct ChannelGeometry {
  double r = 1.0;          // inverse noise width (snapped when near-integer)
  double b = 0.5;          // noise half width, b = 1/(2r)
  int n = 2;               // floor(r) + 1
  double rho = 0.0;        // r - floor(r); 0 when is_integer
  bool is_integer = true;

  /// Number of mass points of the unconstrained optimizer (n or 2n).
  int mass_point_count() const { return is_integer ? n : 2 * n; }
};

ChannelGeometry make_geometry(double r, double eps_int = tolerances::kIntegerSnap);

enum class Curvature { StrictlyConcave, Linear, ConvexOnInterval };

const char* to_string(Curvature c);

/// Normalized cost c: [0,1] -> [0,1], strictly increasing, c(0)=0, c(1)=1,
/// with a declared curvature class. Built-in power family c(x) = x^alpha, or a
/// user table interpolated linearly with central-difference derivatives.
class CostFunction {
 public:
  static CostFunction power(double alpha);
  /// Two-column table (x ascending from 0 to 1, c(x) from 0 to 1). The
  /// curvature class is inferred from second divided differences.
  static CostFunction from_table(std::vector<double> xs, std::vector<double> values);

  double operator()(double x) const { return eval_(x); }
  double derivative(double x) const { return deriv_(x); }

  Curvature curvature() const { return curvature_; }
  /// Interval on which the cost is strictly convex (meaningful for ConvexOnInterval).
  std::pair<double, double> convex_interval() const { return convex_interval_; }
  bool concave_or_linear() const { return curvature_ != Curvature::ConvexOnInterval; }

  /// Exponent of the power family, if that is how this cost was built.
  std::optional<double> alpha() const { return alpha_; }
  const std::string& family() const { return family_; }

 private:
  CostFunction() = default;
  void validate() const;

  std::function<double(double)> eval_;
  std::function<double(double)> deriv_;
  Curvature curvature_ = Curvature::Linear;
  std::pair<double, double> convex_interval_{0.0, 0.0};
  std::optional<double> alpha_;
  std::string family_ = "power";
};

/// Finitely supported input distribution: ascending positions in [0,1] with
/// nonnegative masses summing to one.
struct DiscreteInputDistribution {
  std::vector<double> positions;
  std::vector<double> masses;

  std::size_t size() const { return positions.size(); }
};

DiscreteInputDistribution make_distribution(std::vector<double> positions,
                                            std::vector<double> masses);
void validate(const DiscreteInputDistribution& dist);

/// Piecewise constant density on [breakpoints.front(), breakpoints.back()].
struct PiecewiseConstantDensity {
  std::vector<double> breakpoints;  // ascending, one more entry than heights
  std::vector<double> heights;      // nonnegative

  double integral() const;
  double value(double y) const;  // 0 outside the covered interval
};

/// Probabilities on a uniform grid of cell centers spanning [lo, hi], the
/// first center sitting at lo and the last at hi.
struct GriddedDensity {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> probs;

  double cell_width() const { return (hi - lo) / static_cast<double>(probs.size() - 1); }
  double center(std::size_t i) const { return lo + static_cast<double>(i) * cell_width(); }
};

/// Exact convolution of the discrete input with the uniform noise kernel.
/// Breakpoints always span [-b, 1+b]; uncovered stretches get zero height.
PiecewiseConstantDensity output_density(const DiscreteInputDistribution& dist,
                                        const ChannelGeometry& geom);

/// Marginal information density i(x; p_X) = -(1/2b) Int_{x-b}^{x+b} log(2b p_Y) dy,
/// evaluated in closed form over the density segments. Returns +infinity when the
/// window overlaps a zero-density set of positive measure.
double marginal_information_density(double x, const PiecewiseConstantDensity& py,
                                    const ChannelGeometry& geom);
double marginal_information_density(double x, const DiscreteInputDistribution& dist,
                                    const ChannelGeometry& geom);

/// Mutual information sum_j m_j i(x_j; p_X). Throws DegenerateInput if any
/// positive-mass point has infinite information density.
double mutual_information(const DiscreteInputDistribution& dist, const ChannelGeometry& geom);

/// Same quantity through the entropy route h(Y) - log(2b).
double mutual_information_via_entropy(const DiscreteInputDistribution& dist,
                                      const ChannelGeometry& geom);

/// Discrete entropy -sum m_j log m_j with the 0 log 0 = 0 convention.
double entropy(const std::vector<double>& masses);

double expected_cost(const DiscreteInputDistribution& dist, const CostFunction& cost);

/// Differential entropy of a piecewise constant density.
double differential_entropy(const PiecewiseConstantDensity& py);

}  // namespace unifcap
