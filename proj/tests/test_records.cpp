#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "unifcap/records.hpp"

using namespace unifcap;

namespace {

SolutionRecord sample_record() {
  SolutionRecord r;
  r.version = "0.1.0";
  r.solver = "analytic";
  r.r = 4.4;
  r.cbar = 0.5377770071344681;
  r.cost_family = "power";
  r.alpha = 0.7;
  r.units = "bits";
  r.regime = "IIb(1)";
  r.positions = {0.0, 0.2272727272727273, 1.0 / 3.0, 1.0};
  r.masses = {0.5, 0.25, 0.125, 0.125};
  r.lambda_star = 1.234567890123456789;
  r.capacity_nats = std::log(5.0);
  r.capacity_bits = std::log2(5.0);
  r.expected_cost = 0.5377770071344681;
  r.cbar_star = 0.61;
  r.theta = {0.5086308488605577, 0.09316911065176953};
  r.lambda_at_theta = {0.7739111407208843, 4.462234882310444};
  r.kkt_evaluated = true;
  r.kkt_pass = true;
  r.kkt_mutual_information = 1.2055998590345;
  r.kkt_equality_residual = 4.44e-16;
  r.kkt_inequality_violation = 0.0;
  r.kkt_worst_x = 0.97;
  return r;
}

}  // namespace

TEST_CASE("solution records survive a JSON round trip bit-for-bit") {
  const SolutionRecord r = sample_record();
  const std::string text = r.to_json();
  const SolutionRecord back = SolutionRecord::from_json(text);
  CHECK(back == r);
  CHECK(back.to_json() == text);
}

TEST_CASE("records with numerical-solver fields round trip too") {
  SolutionRecord r = sample_record();
  r.solver = "ba";
  r.ba_present = true;
  r.ba_iterations = 123456;
  r.ba_converged = true;
  r.ba_achieved_cost = 0.3499999999999;
  r.g_in = 2001;
  r.g_out = 4001;
  r.ba_cluster_positions = {0.0, 0.41666666666};
  r.ba_cluster_masses = {0.6, 0.4};
  r.ba_largest_gap_cells = 831;
  r.ba_full_support = false;
  r.ba_discrete = true;
  const SolutionRecord back = SolutionRecord::from_json(r.to_json());
  CHECK(back == r);
}

TEST_CASE("csv output carries lossless doubles and hash-prefixed headers") {
  CsvWriter w({"cbar", "capacity_bits"}, "unifcap 0.1.0 capacity --r 4", true);
  w.add_row({0.1, 1.0 / 3.0});
  w.add_row({0.2, std::log2(5.0)});
  const std::string text = w.str();
  CHECK(text.find("# unifcap 0.1.0 capacity --r 4\n") == 0);
  CHECK(text.find("# cbar,capacity_bits\n") != std::string::npos);
  CHECK(text.find(format_double(1.0 / 3.0)) != std::string::npos);
  // lossless: parsing the printed value recovers the double exactly
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(std::stod(format_double(std::log2(5.0))) == std::log2(5.0));

  CsvWriter bare({"a"}, "provenance", false);
  bare.add_row({1.0});
  CHECK(bare.str().find("provenance") == std::string::npos);

  // identical writers yield byte-identical output
  CsvWriter w2({"cbar", "capacity_bits"}, "unifcap 0.1.0 capacity --r 4", true);
  w2.add_row({0.1, 1.0 / 3.0});
  w2.add_row({0.2, std::log2(5.0)});
  CHECK(w2.str() == text);
}

TEST_CASE("annotated rows add a trailing column") {
  CsvWriter w({"cbar", "m_1"}, "p", false);
  w.add_row({0.5, 0.25});
  w.add_row({0.4, 0.0}, "theta_0");
  const std::string text = w.str();
  CHECK(text.find("# cbar,m_1,annotation\n") != std::string::npos);
  CHECK(text.find(",theta_0\n") != std::string::npos);
}
