#pragma once

#include <optional>
#include <string>
#include <vector>

#include "unifcap/analytic.hpp"
#include "unifcap/numerical.hpp"

namespace unifcap {

/// Flat, JSON-round-trippable record of one solved instance: the solution
/// fields, a KKT summary, and enough provenance to reproduce the run.
struct SolutionRecord {
  std::string tool = "unifcap";
  std::string version;
  std::string solver;  // "analytic" | "ba"

  // config echo
  double r = 0.0;
  double cbar = 0.0;
  std::string cost_family;  // "power" | "table"
  double alpha = 0.0;       // power family exponent (0 when table)
  std::string cost_table_path;
  std::string units = "bits";
  int g_in = 0;  // 0 when the numerical solver was not involved
  int g_out = 0;

  // solution
  std::string regime;
  std::vector<double> positions;
  std::vector<double> masses;
  double lambda_star = 0.0;
  double capacity_nats = 0.0;
  double capacity_bits = 0.0;
  double expected_cost = 0.0;

  // thresholds (analytic route)
  double cbar_star = 0.0;
  std::vector<double> theta;
  std::vector<double> lambda_at_theta;

  // KKT summary (analytic route)
  bool kkt_evaluated = false;
  bool kkt_pass = false;
  double kkt_mutual_information = 0.0;
  double kkt_equality_residual = 0.0;
  double kkt_inequality_violation = 0.0;
  double kkt_worst_x = 0.0;

  // numerical-solver extras
  bool ba_present = false;
  long ba_iterations = 0;
  bool ba_converged = false;
  double ba_achieved_cost = 0.0;
  std::vector<double> ba_cluster_positions;
  std::vector<double> ba_cluster_masses;
  int ba_largest_gap_cells = 0;
  bool ba_full_support = false;
  bool ba_discrete = false;

  std::string to_json() const;  // pretty, lossless doubles
  static SolutionRecord from_json(const std::string& text);

  bool operator==(const SolutionRecord&) const = default;
};

/// Deterministic CSV writer: '#'-prefixed header lines, comma separator,
/// 17-significant-digit numbers (lossless double round trip).
class CsvWriter {
 public:
  CsvWriter(std::vector<std::string> columns, std::string provenance, bool with_provenance);

  void add_row(const std::vector<double>& values, const std::string& annotation = "");
  std::string str() const;
  bool has_annotations() const { return has_annotations_; }

 private:
  std::vector<std::string> columns_;
  std::string provenance_;
  bool with_provenance_;
  bool has_annotations_ = false;
  std::vector<std::pair<std::vector<double>, std::string>> rows_;
};

std::string format_double(double v);  // %.17g

}  // namespace unifcap
