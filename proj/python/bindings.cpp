#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "unifcap/analytic.hpp"
#include "unifcap/channel.hpp"
#include "unifcap/numerical.hpp"
#include "unifcap/verify.hpp"

namespace py = pybind11;
using namespace unifcap;

namespace {

void translate_error(const Error& e) {
  switch (e.code()) {
    case ErrorCode::NonPositiveR:
    case ErrorCode::InvalidDistribution:
    case ErrorCode::InvalidCost:
    case ErrorCode::NegativeMass:
    case ErrorCode::InvalidK:
    case ErrorCode::InvalidBudget:
    case ErrorCode::WrongRegime:
    case ErrorCode::GridTooCoarse:
      PyErr_SetString(PyExc_ValueError, e.what());
      break;
    default:
      PyErr_SetString(PyExc_RuntimeError, e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_unifcap, m) {
  m.doc() = "Capacity-achieving inputs of the additive uniform noise channel "
            "under peak-amplitude and average-cost constraints";
  m.attr("__version__") = UNIFCAP_VERSION;

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      translate_error(e);
    }
  });

  py::class_<ChannelGeometry>(m, "ChannelGeometry")
      .def_readonly("r", &ChannelGeometry::r)
      .def_readonly("b", &ChannelGeometry::b)
      .def_readonly("n", &ChannelGeometry::n)
      .def_readonly("rho", &ChannelGeometry::rho)
      .def_readonly("is_integer", &ChannelGeometry::is_integer)
      .def_property_readonly("mass_point_count", &ChannelGeometry::mass_point_count)
      .def("__repr__", [](const ChannelGeometry& g) {
        return "ChannelGeometry(r=" + std::to_string(g.r) + ", n=" + std::to_string(g.n) +
               ", rho=" + std::to_string(g.rho) + ")";
      });

  py::enum_<Curvature>(m, "Curvature")
      .value("StrictlyConcave", Curvature::StrictlyConcave)
      .value("Linear", Curvature::Linear)
      .value("ConvexOnInterval", Curvature::ConvexOnInterval);

  py::class_<CostFunction>(m, "CostFunction")
      .def_static("power", &CostFunction::power, py::arg("alpha"))
      .def_static("from_table", &CostFunction::from_table, py::arg("xs"), py::arg("values"))
      .def("__call__", &CostFunction::operator(), py::arg("x"))
      .def("derivative", &CostFunction::derivative, py::arg("x"))
      .def_property_readonly("curvature", &CostFunction::curvature)
      .def_property_readonly("alpha", [](const CostFunction& c) { return c.alpha(); })
      .def_property_readonly("family", &CostFunction::family);

  py::class_<DiscreteInputDistribution>(m, "DiscreteInputDistribution")
      .def(py::init([](std::vector<double> x, std::vector<double> mass) {
             return make_distribution(std::move(x), std::move(mass));
           }),
           py::arg("positions"), py::arg("masses"))
      .def_readonly("positions", &DiscreteInputDistribution::positions)
      .def_readonly("masses", &DiscreteInputDistribution::masses)
      .def("__len__", &DiscreteInputDistribution::size);

  py::class_<PiecewiseConstantDensity>(m, "PiecewiseConstantDensity")
      .def_readonly("breakpoints", &PiecewiseConstantDensity::breakpoints)
      .def_readonly("heights", &PiecewiseConstantDensity::heights)
      .def("integral", &PiecewiseConstantDensity::integral)
      .def("__call__", &PiecewiseConstantDensity::value, py::arg("y"));

  py::class_<GriddedDensity>(m, "GriddedDensity")
      .def_readonly("lo", &GriddedDensity::lo)
      .def_readonly("hi", &GriddedDensity::hi)
      .def_readonly("probs", &GriddedDensity::probs)
      .def("center", &GriddedDensity::center, py::arg("i"));

  py::class_<Exponents>(m, "Exponents")
      .def_readonly("k", &Exponents::k)
      .def_readonly("dhat", &Exponents::dhat)
      .def_readonly("dbar", &Exponents::dbar);

  py::class_<CombinedMasses>(m, "CombinedMasses")
      .def_readonly("k", &CombinedMasses::k)
      .def_readonly("mhat", &CombinedMasses::mhat)
      .def_readonly("mbar", &CombinedMasses::mbar)
      .def_readonly("m_less", &CombinedMasses::m_less)
      .def_readonly("m_greater", &CombinedMasses::m_greater);

  py::class_<Thresholds>(m, "Thresholds")
      .def_readonly("cbar_star", &Thresholds::cbar_star)
      .def_readonly("theta", &Thresholds::theta)
      .def_readonly("lambda_at_theta", &Thresholds::lambda_at_theta);

  py::class_<Regime>(m, "Regime")
      .def_readonly("k", &Regime::k)
      .def_property_readonly("label", &Regime::label)
      .def("__repr__", [](const Regime& r) { return "Regime(" + r.label() + ")"; });

  py::class_<KKTSummary>(m, "KKTSummary")
      .def_readonly("evaluated", &KKTSummary::evaluated);

  py::class_<AnalyticSolution>(m, "AnalyticSolution")
      .def_readonly("regime", &AnalyticSolution::regime)
      .def_readonly("distribution", &AnalyticSolution::distribution)
      .def_readonly("lambda_star", &AnalyticSolution::lambda_star)
      .def_readonly("capacity_nats", &AnalyticSolution::capacity_nats)
      .def_readonly("thresholds", &AnalyticSolution::thresholds);

  py::class_<KKTReport>(m, "KKTReport")
      .def_readonly("mutual_information", &KKTReport::mutual_information)
      .def_readonly("max_equality_residual", &KKTReport::max_equality_residual)
      .def_readonly("max_inequality_violation", &KKTReport::max_inequality_violation)
      .def_readonly("worst_x", &KKTReport::worst_x)
      .def_property_readonly("passed", [](const KKTReport& r) { return r.pass; });

  py::class_<LinearityReport>(m, "LinearityReport")
      .def_readonly("max_second_difference", &LinearityReport::max_second_difference)
      .def_readonly("max_slope_deviation", &LinearityReport::max_slope_deviation);

  py::class_<DiscretizedChannel>(m, "DiscretizedChannel")
      .def_readonly("g_in", &DiscretizedChannel::g_in)
      .def_readonly("g_out", &DiscretizedChannel::g_out)
      .def_readonly("in_width", &DiscretizedChannel::in_width)
      .def("input_center", &DiscretizedChannel::input_center, py::arg("i"))
      .def("w", &DiscretizedChannel::w, py::arg("m"), py::arg("i"))
      .def("row", &DiscretizedChannel::row, py::arg("i"))
      .def("row_sum", &DiscretizedChannel::row_sum, py::arg("i"));

  py::class_<BAConfig>(m, "BAConfig")
      .def(py::init<>())
      .def_readwrite("g_in", &BAConfig::g_in)
      .def_readwrite("g_out", &BAConfig::g_out)
      .def_readwrite("inner_tol", &BAConfig::inner_tol)
      .def_readwrite("increment_tol", &BAConfig::increment_tol)
      .def_readwrite("increment_gap_guard", &BAConfig::increment_gap_guard)
      .def_readwrite("max_inner_iterations", &BAConfig::max_inner_iterations)
      .def_readwrite("outer_cost_tol", &BAConfig::outer_cost_tol)
      .def_readwrite("lambda_cap", &BAConfig::lambda_cap);

  py::class_<BAResult>(m, "BAResult")
      .def_readonly("input", &BAResult::input)
      .def_readonly("lambda_", &BAResult::lambda)
      .def_readonly("capacity_nats", &BAResult::capacity_nats)
      .def_readonly("achieved_cost", &BAResult::achieved_cost)
      .def_readonly("iterations", &BAResult::iterations)
      .def_readonly("converged", &BAResult::converged)
      .def_readonly("final_gap", &BAResult::final_gap);

  py::class_<SupportClusters::Cluster>(m, "SupportCluster")
      .def_readonly("position", &SupportClusters::Cluster::position)
      .def_readonly("mass", &SupportClusters::Cluster::mass)
      .def_readonly("first_cell", &SupportClusters::Cluster::first_cell)
      .def_readonly("last_cell", &SupportClusters::Cluster::last_cell);

  py::class_<SupportClusters>(m, "SupportClusters")
      .def_readonly("clusters", &SupportClusters::clusters)
      .def_readonly("gap_widths", &SupportClusters::gap_widths)
      .def_readonly("largest_interior_gap", &SupportClusters::largest_interior_gap)
      .def_readonly("clustered_mass", &SupportClusters::clustered_mass)
      .def_readonly("significant_clusters", &SupportClusters::significant_clusters)
      .def_readonly("full_support", &SupportClusters::full_support)
      .def_readonly("discrete", &SupportClusters::discrete);

  py::class_<RootConfig>(m, "RootConfig")
      .def(py::init<>())
      .def_readwrite("lambda_cap", &RootConfig::lambda_cap)
      .def_readwrite("threshold_tol", &RootConfig::threshold_tol)
      .def_readwrite("cost_tol", &RootConfig::cost_tol);

  m.def("make_geometry", &make_geometry, py::arg("r"),
        py::arg("eps_int") = tolerances::kIntegerSnap);
  m.def("output_density", &output_density, py::arg("dist"), py::arg("geom"));
  m.def(
      "marginal_information_density",
      [](double x, const DiscreteInputDistribution& d, const ChannelGeometry& g) {
        return marginal_information_density(x, d, g);
      },
      py::arg("x"), py::arg("dist"), py::arg("geom"));
  m.def("mutual_information", &mutual_information, py::arg("dist"), py::arg("geom"));
  m.def("mutual_information_via_entropy", &mutual_information_via_entropy, py::arg("dist"),
        py::arg("geom"));
  m.def("entropy", &entropy, py::arg("masses"));
  m.def("expected_cost", &expected_cost, py::arg("dist"), py::arg("cost"));
  m.def("differential_entropy", &differential_entropy, py::arg("density"));

  m.def("unconstrained_solution", &unconstrained_solution, py::arg("geom"));
  m.def("cbar_star", &cbar_star, py::arg("geom"), py::arg("cost"));
  m.def("integer_masses", &integer_masses, py::arg("lambda_"), py::arg("geom"), py::arg("cost"));
  m.def("exponents", &exponents, py::arg("k"), py::arg("geom"), py::arg("cost"));
  m.def("normalization_split", &normalization_split, py::arg("k"), py::arg("lambda_"),
        py::arg("geom"), py::arg("cost"));
  m.def("combined_masses", &combined_masses, py::arg("k"), py::arg("lambda_"), py::arg("geom"),
        py::arg("cost"));
  m.def("back_transform", &back_transform, py::arg("combined"));
  m.def("lambda_threshold", &lambda_threshold, py::arg("k"), py::arg("geom"), py::arg("cost"),
        py::arg("config") = RootConfig{});
  m.def("thresholds", &thresholds, py::arg("geom"), py::arg("cost"),
        py::arg("config") = RootConfig{});
  m.def(
      "classify",
      [](const ChannelGeometry& g, const CostFunction& c, double cbar) {
        return classify(g, c, cbar);
      },
      py::arg("geom"), py::arg("cost"), py::arg("cbar"));
  m.def("support_k_distribution", &support_k_distribution, py::arg("k"), py::arg("lambda_"),
        py::arg("geom"), py::arg("cost"));
  m.def(
      "solve",
      [](const ChannelGeometry& g, const CostFunction& c, double cbar) {
        return solve(g, c, cbar);
      },
      py::arg("geom"), py::arg("cost"), py::arg("cbar"));
  m.def("capacity_analytic", &capacity_analytic, py::arg("solution"), py::arg("geom"));
  m.def("align_to_grid", &align_to_grid, py::arg("dist"), py::arg("geom"));
  m.def("sweep_budgets", &sweep_budgets, py::arg("geom"), py::arg("cost"), py::arg("count") = 12);

  m.def("discretize", &discretize, py::arg("geom"), py::arg("g_in"), py::arg("g_out"));
  m.def(
      "ba_fixed_lambda",
      [](const DiscretizedChannel& chan, const CostFunction& c, double lambda,
         const BAConfig& cfg) { return ba_fixed_lambda(chan, c, lambda, cfg); },
      py::arg("chan"), py::arg("cost"), py::arg("lambda_"), py::arg("config") = BAConfig{});
  m.def("ba_solve", &ba_solve, py::arg("chan"), py::arg("cost"), py::arg("cbar"),
        py::arg("config") = BAConfig{});
  m.def("extract_support", &extract_support, py::arg("result"), py::arg("chan"),
        py::arg("mass_threshold") = -1.0, py::arg("smooth_halfwidth") = 2,
        py::arg("cluster_mass_floor") = 1e-4);

  m.def("kkt_report", &kkt_report, py::arg("dist"), py::arg("lambda_"), py::arg("geom"),
        py::arg("cost"), py::arg("cbar"), py::arg("grid_size") = 10001, py::arg("tol_eq") = 1e-8,
        py::arg("tol_ineq") = 1e-8, py::arg("relative") = false);
  m.def("check_piecewise_linear", &check_piecewise_linear, py::arg("dist"), py::arg("geom"),
        py::arg("refinement") = 1000);
  m.def("mi_quadrature_oracle", &mi_quadrature_oracle, py::arg("dist"), py::arg("geom"),
        py::arg("fine_grid") = 1000000);
  m.def("cost_derivative_check", &cost_derivative_check, py::arg("lambda_"), py::arg("geom"),
        py::arg("cost"));
  m.def("integer_limit_check", &integer_limit_check, py::arg("m"), py::arg("delta"));
}
