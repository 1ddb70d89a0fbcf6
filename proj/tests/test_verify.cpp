#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "unifcap/analytic.hpp"
#include "unifcap/channel.hpp"
#include "unifcap/verify.hpp"

using namespace unifcap;

namespace {

DiscreteInputDistribution perturb(const DiscreteInputDistribution& d, std::size_t j, double eps) {
  std::vector<double> m = d.masses;
  m[j] += eps;
  double z = 0.0;
  for (double v : m) z += v;
  for (double& v : m) v /= z;
  return make_distribution(d.positions, std::move(m));
}

}  // namespace

TEST_CASE("first-case optimizer meets the optimality conditions with equality everywhere") {
  const ChannelGeometry g = make_geometry(4.0);
  const auto u = unconstrained_solution(g);
  const KKTReport rep = kkt_report(u, 0.0, g, CostFunction::power(0.7), 0.9, 2001);
  CHECK(rep.pass);
  CHECK(rep.max_equality_residual <= 1e-12);
  CHECK(rep.max_inequality_violation <= 1e-12);
  CHECK(rep.mutual_information == doctest::Approx(std::log(5.0)).epsilon(1e-13));

  // the affine bound is attained on the whole interval, not just the support
  const auto py = output_density(u, g);
  for (double x : {0.1, 0.33, 0.71}) {
    CHECK(marginal_information_density(x, py, g) ==
          doctest::Approx(rep.mutual_information).epsilon(1e-12));
  }
}

TEST_CASE("integer Boltzmann solutions: equality on support, strict slack between points") {
  const ChannelGeometry g = make_geometry(4.0);
  const CostFunction c = CostFunction::power(0.7);
  const double cbar = 0.35;
  const AnalyticSolution sol = solve(g, c, cbar);
  const KKTReport rep = kkt_report(sol.distribution, sol.lambda_star, g, c, cbar);
  CHECK(rep.pass);
  CHECK(rep.max_equality_residual <= 1e-10);

  const auto py = output_density(sol.distribution, g);
  for (int j = 0; j + 1 < 5; ++j) {
    const double x = 0.5 * (sol.distribution.positions[j] + sol.distribution.positions[j + 1]);
    const double slack = rep.mutual_information + sol.lambda_star * (c(x) - cbar) -
                         marginal_information_density(x, py, g);
    CHECK(slack > 1e-4);
  }
}

TEST_CASE("a perturbed solution fails certification") {
  const ChannelGeometry g = make_geometry(4.0);
  const CostFunction c = CostFunction::power(0.7);
  const AnalyticSolution sol = solve(g, c, 0.35);
  const auto bad = perturb(sol.distribution, 2, 0.05);
  const KKTReport rep = kkt_report(bad, sol.lambda_star, g, c, 0.35);
  CHECK(!rep.pass);
}

TEST_CASE("relative tolerance mode rescales the residuals") {
  const ChannelGeometry g = make_geometry(4.0);
  const CostFunction c = CostFunction::power(0.5);
  const AnalyticSolution sol = solve(g, c, 0.1);
  const KKTReport abs_rep =
      kkt_report(sol.distribution, sol.lambda_star, g, c, 0.1, 10001, 1e-8, 1e-8, false);
  const KKTReport rel_rep =
      kkt_report(sol.distribution, sol.lambda_star, g, c, 0.1, 10001, 1e-8, 1e-8, true);
  CHECK(abs_rep.pass);
  CHECK(rel_rep.pass);
  const double scale =
      std::max(1.0, std::abs(rel_rep.mutual_information) + rel_rep.lambda * std::max(0.1, 0.9));
  CHECK(rel_rep.max_equality_residual ==
        doctest::Approx(abs_rep.max_equality_residual / scale).epsilon(1e-9));
}

TEST_CASE("information density is piecewise linear with the closed-form slopes") {
  // integer grid with equal masses: all slopes vanish
  const ChannelGeometry g4 = make_geometry(4.0);
  const LinearityReport flat = check_piecewise_linear(unconstrained_solution(g4), g4, 200);
  CHECK(flat.max_second_difference <= 1e-10);
  for (const auto& s : flat.segments) {
    CHECK(s.slope_defined);
    CHECK(std::abs(s.formula_slope) <= 1e-12);
    CHECK(s.slope_deviation <= 1e-10);
  }

  // integer grid, tilted masses
  const CostFunction c7 = CostFunction::power(0.7);
  const AnalyticSolution s4 = solve(g4, c7, 0.3);
  const LinearityReport tilted = check_piecewise_linear(s4.distribution, g4, 500);
  CHECK(tilted.max_second_difference <= 1e-8);
  CHECK(tilted.max_slope_deviation <= 1e-8);

  // non-integer unconstrained grid: the density is flat, slopes vanish
  const ChannelGeometry g24 = make_geometry(2.4);
  const LinearityReport u24 = check_piecewise_linear(unconstrained_solution(g24), g24, 500);
  CHECK(u24.max_second_difference <= 1e-8);
  CHECK(u24.max_slope_deviation <= 1e-8);

  // S_3 support of r=6.2: removed points produce two-piece segments whose
  // slopes still follow the zero-padded pairwise-sum formula
  const ChannelGeometry g62 = make_geometry(6.2);
  const CostFunction c5 = CostFunction::power(0.5);
  const Thresholds th = thresholds(g62, c5);
  const AnalyticSolution s62 = solve(g62, c5, 0.5 * (th.theta[3] + th.theta[2]), th);
  const LinearityReport rep62 = check_piecewise_linear(s62.distribution, g62, 500);
  CHECK(rep62.max_second_difference <= 1e-8);
  CHECK(rep62.max_slope_deviation <= 1e-8);
  // the kink at the last removed point separates two different slopes
  const auto& seg5 = rep62.segments[5];  // [x_6, x_7]
  const auto& seg4 = rep62.segments[4];  // [x_5, x_6]
  CHECK(std::abs(seg5.measured_slope - seg4.measured_slope) > 1e-3);
}

TEST_CASE("quadrature oracle agrees with the closed-form information") {
  const ChannelGeometry g4 = make_geometry(4.0);
  const auto u4 = unconstrained_solution(g4);
  CHECK(std::abs(mi_quadrature_oracle(u4, g4, 1000000) - std::log(5.0)) <= 1e-9);

  const ChannelGeometry g3 = make_geometry(3.0);
  CHECK(std::abs(mi_quadrature_oracle(make_distribution({0.5}, {1.0}), g3, 200000)) <= 1e-12);

  const ChannelGeometry g44 = make_geometry(4.4);
  const auto u44 = unconstrained_solution(g44);
  const double expect = 0.4 * std::log(6.0) + 0.6 * std::log(5.0);
  CHECK(std::abs(mi_quadrature_oracle(u44, g44, 1000000) - expect) <= 1e-6);
  CHECK(std::abs(mi_quadrature_oracle(u44, g44, 1000000) -
                 mutual_information(u44, g44)) <= 1e-6);
}

TEST_CASE("budget derivative identity") {
  const ChannelGeometry g = make_geometry(4.0);
  // variance of the linear cost over the uniform five-point grid is 1/8
  const auto u = integer_masses(0.0, g, CostFunction::power(1.0));
  double mean = 0.0, second = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    mean += u.masses[j] * u.positions[j];
    second += u.masses[j] * u.positions[j] * u.positions[j];
  }
  CHECK(second - mean * mean == doctest::Approx(0.125).epsilon(1e-13));

  CHECK(cost_derivative_check(0.0, g, CostFunction::power(1.0)) <= 1e-6);
  CHECK(cost_derivative_check(1.0, g, CostFunction::power(0.7)) <= 1e-6);
  CHECK(cost_derivative_check(50.0, g, CostFunction::power(0.7)) <= 1e-6);
  CHECK_THROWS_AS((void)cost_derivative_check(1.0, make_geometry(4.4), CostFunction::power(0.7)),
                  Error);
}

TEST_CASE("integer limit of the unconstrained solution") {
  CHECK(integer_limit_check(4, 1e-6) <= 1e-4);
  CHECK(integer_limit_check(2, 1e-6) <= 1e-4);
  CHECK(integer_limit_check(4, 0.0) == 0.0);  // inside the snap band
  CHECK(integer_limit_check(4, 1e-6) > 0.0);
  CHECK_THROWS_AS((void)integer_limit_check(0, 1e-6), Error);
  CHECK_THROWS_AS((void)integer_limit_check(4, 1e-3), Error);
}

TEST_CASE("removed points keep strictly positive slack inside a band") {
  const ChannelGeometry g = make_geometry(3.9);
  const CostFunction c = CostFunction::power(0.5);
  const Thresholds th = thresholds(g, c);
  const auto grid = unconstrained_positions(g);
  for (int k = 1; k <= 2; ++k) {
    const double cbar = 0.5 * (th.theta[k] + th.theta[k - 1]);
    const AnalyticSolution sol = solve(g, c, cbar, th);
    REQUIRE(sol.regime.k == k);
    const auto py = output_density(sol.distribution, g);
    const double info = mutual_information(sol.distribution, g);
    for (int j = 1; j <= k; ++j) {
      const double x = grid[2 * j - 1];  // removed point x_{2j}
      const double slack = info + sol.lambda_star * (c(x) - cbar) -
                           marginal_information_density(x, py, g);
      CHECK(slack > 0.0);
      CHECK(slack > -1e-8);  // the certified bound, with margin
    }
  }
}
