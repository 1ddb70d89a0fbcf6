#pragma once

#include <string>
#include <utility>
#include <vector>

#include "unifcap/channel.hpp"

namespace unifcap {

/// Cumulative cost-difference exponents driving the combined masses of the
/// non-integer regimes. Entry 0 corresponds to index j = k+1 and is zero.
struct Exponents {
  int k = 0;
  std::vector<double> dhat;  // indices j = k+1 .. n+1
  std::vector<double> dbar;  // indices j = k+1 .. n
};

/// Combined masses of the overlapping output segments for support S_k, with
/// the probability split between the left point set (m_less) and the rest.
struct CombinedMasses {
  int k = 0;
  std::vector<double> mhat;  // indices j = k+1 .. n+1
  std::vector<double> mbar;  // indices j = k+1 .. n
  double m_less = 0.0;
  double m_greater = 1.0;
};

/// Budget thresholds at which the support loses its next even-indexed point,
/// with the multiplier values where they occur. Empty for integer geometry,
/// linear cost, or n < 2.
struct Thresholds {
  double cbar_star = 1.0;
  std::vector<double> theta;            // theta[k], strictly decreasing in k
  std::vector<double> lambda_at_theta;  // lambda_k, strictly increasing in k
};

struct Regime {
  enum class Kind { CaseI, CaseIIa, CaseIIb, CaseIII };
  Kind kind = Kind::CaseI;
  int k = 0;  // support index, meaningful for CaseIIb

  std::string label() const;
  bool operator==(const Regime&) const = default;
};

/// KKT certification summary, filled in by the verification module.
struct KKTSummary {
  bool evaluated = false;
  bool pass = false;
  double mutual_information = 0.0;
  double equality_residual = 0.0;
  double inequality_violation = 0.0;
  double worst_x = 0.0;
};

struct AnalyticSolution {
  Regime regime;
  DiscreteInputDistribution distribution;
  double lambda_star = 0.0;
  double capacity_nats = 0.0;
  Thresholds thresholds;
  KKTSummary diagnostics;
};

/// Root-finding configuration shared by the threshold and multiplier solvers.
struct RootConfig {
  double lambda_cap = 1e8;       // bracket doubling stops here
  double threshold_tol = 1e-13;  // relative tolerance on the partition-sum equation
  double cost_tol = 1e-11;       // absolute tolerance on the budget match
};

/// Positions of the unconstrained optimizer (the master grid for every regime).
std::vector<double> unconstrained_positions(const ChannelGeometry& geom);

/// Capacity-achieving input when the cost constraint is inactive.
DiscreteInputDistribution unconstrained_solution(const ChannelGeometry& geom);

/// Critical budget: expected cost of the unconstrained optimizer.
double cbar_star(const ChannelGeometry& geom, const CostFunction& cost);

/// Boltzmann masses on the integer grid at multiplier lambda.
DiscreteInputDistribution integer_masses(double lambda, const ChannelGeometry& geom,
                                         const CostFunction& cost);

Exponents exponents(int k, const ChannelGeometry& geom, const CostFunction& cost);

/// Probability split (M<_k, M>_k) between the left point set and the rest.
std::pair<double, double> normalization_split(int k, double lambda, const ChannelGeometry& geom,
                                              const CostFunction& cost);

CombinedMasses combined_masses(int k, double lambda, const ChannelGeometry& geom,
                               const CostFunction& cost);

/// Point masses of the right set reconstructed from the combined masses via the
/// alternating cumulative sums. Throws InfeasibleSupport when a reconstructed
/// mass falls below -1e-12 (the support must shrink, k must grow).
std::vector<double> back_transform(const CombinedMasses& cm);

/// Smallest multiplier > lambda_{k-1} at which mass m_{2k+2} vanishes; +infinity
/// for linear cost.
double lambda_threshold(int k, const ChannelGeometry& geom, const CostFunction& cost,
                        const RootConfig& cfg = {});

Thresholds thresholds(const ChannelGeometry& geom, const CostFunction& cost,
                      const RootConfig& cfg = {});

Regime classify(const ChannelGeometry& geom, const CostFunction& cost, double cbar);
Regime classify(const ChannelGeometry& geom, const CostFunction& cost, double cbar,
                const Thresholds& th);

/// Distribution with support S_k evaluated at an arbitrary multiplier (left
/// Boltzmann masses plus the back-transformed right set).
DiscreteInputDistribution support_k_distribution(int k, double lambda, const ChannelGeometry& geom,
                                                 const CostFunction& cost);

double solve_lambda_star(const ChannelGeometry& geom, const CostFunction& cost, double cbar,
                         const Regime& regime, const Thresholds& th, const RootConfig& cfg = {});

AnalyticSolution solve(const ChannelGeometry& geom, const CostFunction& cost, double cbar);
AnalyticSolution solve(const ChannelGeometry& geom, const CostFunction& cost, double cbar,
                       const Thresholds& th, const RootConfig& cfg = {});

/// Closed-form capacity in nats for the regime of the given solution.
double capacity_analytic(const AnalyticSolution& solution, const ChannelGeometry& geom);

/// Masses aligned onto the unconstrained master grid (zeros at removed points).
/// Positions must match grid points within 1e-9.
std::vector<double> align_to_grid(const DiscreteInputDistribution& dist,
                                  const ChannelGeometry& geom);

/// Combined masses (mhat, mbar) reconstructed from a full master-grid mass
/// vector via the pairwise-sum convention.
std::pair<std::vector<double>, std::vector<double>> combine_full_masses(
    const std::vector<double>& full, const ChannelGeometry& geom);

/// Deterministic budget sweep covering every support band plus the inactive
/// region; used by the verification suite and the CLI sweeps.
std::vector<double> sweep_budgets(const ChannelGeometry& geom, const CostFunction& cost,
                                  int count = 12);

}  // namespace unifcap
