#pragma once

#include <cstddef>
#include <vector>

#include "unifcap/analytic.hpp"
#include "unifcap/channel.hpp"

namespace unifcap {

/// Certification of a candidate optimizer against the equality/inequality
/// optimality conditions: the information density must equal the affine bound
/// on the support and stay below it everywhere else.
struct KKTReport {
  double mutual_information = 0.0;
  double lambda = 0.0;
  double max_equality_residual = 0.0;    // over support points
  double max_inequality_violation = 0.0; // over the dense grid (0 when satisfied)
  double worst_x = 0.0;                  // location of the largest violation
  bool pass = false;
  double tol_eq = 1e-8;
  double tol_ineq = 1e-8;
  bool relative = false;
};

/// Checks the affine optimality conditions on the support and on a dense grid
/// (uniform grid_size points plus every kink location of the information
/// density). In relative mode residuals are divided by
/// max(1, |I| + lambda * max(cbar, 1-cbar)).
KKTReport kkt_report(const DiscreteInputDistribution& dist, double lambda,
                     const ChannelGeometry& geom, const CostFunction& cost, double cbar,
                     std::size_t grid_size = 10001, double tol_eq = 1e-8, double tol_ineq = 1e-8,
                     bool relative = false);

/// Per-segment linearity diagnostics of the information density on the master
/// grid, with measured slopes compared against the closed forms
/// r log(m_j / m_{j+1}) (integer grid) and
/// r log((m_{j-1}+m_j) / (m_{j+1}+m_{j+2})) (non-integer grid, zero-padded).
struct LinearityReport {
  struct Segment {
    double x_lo = 0.0;
    double x_hi = 0.0;
    double max_second_difference = 0.0;
    double measured_slope = 0.0;
    double formula_slope = 0.0;
    double slope_deviation = 0.0;
    bool slope_defined = false;  // false when a mass sum in the formula vanishes
  };
  std::vector<Segment> segments;
  double max_second_difference = 0.0;
  double max_slope_deviation = 0.0;  // over defined slopes
};

LinearityReport check_piecewise_linear(const DiscreteInputDistribution& dist,
                                       const ChannelGeometry& geom,
                                       std::size_t refinement = 1000);

/// Mutual information by brute-force Riemann integration of the output entropy
/// on a fine uniform grid; independent of the closed-form segment route.
double mi_quadrature_oracle(const DiscreteInputDistribution& dist, const ChannelGeometry& geom,
                            std::size_t fine_grid = 1000000);

/// |d<c>/dlambda + Var(c)| for the integer-grid Boltzmann family, with the
/// derivative taken by central differences (step 1e-5).
double cost_derivative_check(double lambda, const ChannelGeometry& geom, const CostFunction& cost);

/// Deviation between the unconstrained solutions at r = m + delta and r = m:
/// largest pairwise mass-sum mismatch plus largest position-pair spread.
double integer_limit_check(int m, double delta);

}  // namespace unifcap
