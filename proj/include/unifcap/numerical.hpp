#pragma once

#include <cstddef>
#include <vector>

#include "unifcap/channel.hpp"

namespace unifcap {

/// Discretization of the channel: input cell centers spanning [0,1] with the
/// endpoints on the grid, output cells partitioning [-b, 1+b], transition
/// probabilities from the exact overlap of the noise window with each output
/// cell (rows are stochastic by construction). Rows are represented implicitly
/// by their covered cell span.
struct DiscretizedChannel {
  ChannelGeometry geom;
  int g_in = 0;
  int g_out = 0;
  double in_width = 0.0;   // input center spacing, 1 / (g_in - 1)
  double out_lo = 0.0;
  double out_width = 0.0;

  double input_center(int i) const { return double(i) * in_width; }
  double output_edge(int m) const { return out_lo + double(m) * out_width; }

  struct RowSpan {
    int lo = 0;           // first covered output cell
    int hi = 0;           // last covered output cell
    double cov_lo = 0.0;  // covered length inside cell lo
    double cov_hi = 0.0;  // covered length inside cell hi (0 when lo == hi)
  };
  RowSpan row_span(int i) const;

  /// W[m|i], the probability that input cell i lands in output cell m.
  double w(int m, int i) const;
  /// Dense transition row for input cell i (test and inspection use).
  std::vector<double> row(int i) const;
  double row_sum(int i) const;
};

DiscretizedChannel discretize(const ChannelGeometry& geom, int g_in, int g_out);

struct BAConfig {
  int g_in = 2001;
  int g_out = 4001;
  double inner_tol = 1e-10;          // optimality bracket gap, nats
  double increment_tol = 1e-10;      // per-iteration objective increment, nats
  double increment_gap_guard = 1e-4; // increment stop only fires below this gap
  long max_inner_iterations = 200000;
  double outer_cost_tol = 1e-7;      // |achieved cost - budget|
  double lambda_cap = 1e8;
};

struct BAResult {
  GriddedDensity input;       // probabilities on the input cells
  double lambda = 0.0;
  double capacity_nats = 0.0; // mutual information of the discretized channel
  double achieved_cost = 0.0;
  long iterations = 0;
  bool converged = false;
  double final_gap = 0.0;     // optimality bracket gap at the last iterate
};

/// Alternating-maximization optimizer of I(p) - lambda <c> for fixed lambda,
/// from the uniform start. Stops when the optimality bracket gap
/// max_i (D_i - lambda c_i) - sum_i p_i (D_i - lambda c_i) falls below the
/// inner tolerance (the plain capacity bracket when lambda = 0).
BAResult ba_fixed_lambda(const DiscretizedChannel& chan, const CostFunction& cost, double lambda,
                         const BAConfig& config = {});

/// Same optimizer from an explicit strictly positive start (the optimum is
/// unique, so any such start reaches it; zero entries would stay zero).
BAResult ba_fixed_lambda(const DiscretizedChannel& chan, const CostFunction& cost, double lambda,
                         const BAConfig& config, std::vector<double> initial);

/// Constrained capacity: returns the unconstrained optimizer when it already
/// meets the budget, otherwise bisects the multiplier on a doubling bracket
/// until the achieved cost matches the budget.
BAResult ba_solve(const DiscretizedChannel& chan, const CostFunction& cost, double cbar,
                  const BAConfig& config = {});

/// Support structure of a gridded solution. Occupancy is judged on a short
/// local mass window (gridded optimizers of smooth densities load cells in a
/// beat pattern set by the grid ratio), maximal occupied runs become clusters,
/// and the below-threshold runs between them are the gaps. All constants are
/// heuristics and exposed as parameters.
struct SupportClusters {
  struct Cluster {
    double position = 0.0;  // mass-weighted mean of the raw cell masses
    double mass = 0.0;
    int first_cell = 0;
    int last_cell = 0;
  };
  std::vector<Cluster> clusters;
  std::vector<int> gap_widths;     // interior below-threshold run lengths, in cells
  int largest_interior_gap = 0;
  double clustered_mass = 0.0;
  int significant_clusters = 0;    // clusters at or above the mass floor
  bool full_support = false;       // no interior gap wider than 3 cells
  bool discrete = false;           // at most 2n significant clusters, >= 0.999 mass
};

/// mass_threshold < 0 selects the default 0.01 / G_in; the threshold applies
/// to the total mass within smooth_halfwidth cells of each cell.
SupportClusters extract_support(const BAResult& result, const DiscretizedChannel& chan,
                                double mass_threshold = -1.0, int smooth_halfwidth = 2,
                                double cluster_mass_floor = 1e-4);

}  // namespace unifcap
