#include "unifcap/records.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace unifcap {

namespace {

using nlohmann::json;

json doubles_to_json(const std::vector<double>& v) { return json(v); }

std::vector<double> doubles_from_json(const json& j) {
  return j.get<std::vector<double>>();
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string SolutionRecord::to_json() const {
  json j;
  j["tool"] = tool;
  j["version"] = version;
  j["solver"] = solver;
  j["config"] = {
      {"r", r},
      {"cbar", cbar},
      {"cost_family", cost_family},
      {"alpha", alpha},
      {"cost_table_path", cost_table_path},
      {"units", units},
      {"g_in", g_in},
      {"g_out", g_out},
  };
  j["regime"] = regime;
  j["positions"] = doubles_to_json(positions);
  j["masses"] = doubles_to_json(masses);
  j["lambda_star"] = lambda_star;
  j["capacity_nats"] = capacity_nats;
  j["capacity_bits"] = capacity_bits;
  j["expected_cost"] = expected_cost;
  j["thresholds"] = {
      {"cbar_star", cbar_star},
      {"theta", doubles_to_json(theta)},
      {"lambda", doubles_to_json(lambda_at_theta)},
  };
  j["kkt"] = {
      {"evaluated", kkt_evaluated},
      {"pass", kkt_pass},
      {"mutual_information", kkt_mutual_information},
      {"equality_residual", kkt_equality_residual},
      {"inequality_violation", kkt_inequality_violation},
      {"worst_x", kkt_worst_x},
  };
  j["ba"] = {
      {"present", ba_present},
      {"iterations", ba_iterations},
      {"converged", ba_converged},
      {"achieved_cost", ba_achieved_cost},
      {"cluster_positions", doubles_to_json(ba_cluster_positions)},
      {"cluster_masses", doubles_to_json(ba_cluster_masses)},
      {"largest_gap_cells", ba_largest_gap_cells},
      {"full_support", ba_full_support},
      {"discrete", ba_discrete},
  };
  return j.dump(2);
}

SolutionRecord SolutionRecord::from_json(const std::string& text) {
  const json j = json::parse(text);
  SolutionRecord r;
  r.tool = j.at("tool").get<std::string>();
  r.version = j.at("version").get<std::string>();
  r.solver = j.at("solver").get<std::string>();
  const json& cfg = j.at("config");
  r.r = cfg.at("r").get<double>();
  r.cbar = cfg.at("cbar").get<double>();
  r.cost_family = cfg.at("cost_family").get<std::string>();
  r.alpha = cfg.at("alpha").get<double>();
  r.cost_table_path = cfg.at("cost_table_path").get<std::string>();
  r.units = cfg.at("units").get<std::string>();
  r.g_in = cfg.at("g_in").get<int>();
  r.g_out = cfg.at("g_out").get<int>();
  r.regime = j.at("regime").get<std::string>();
  r.positions = doubles_from_json(j.at("positions"));
  r.masses = doubles_from_json(j.at("masses"));
  r.lambda_star = j.at("lambda_star").get<double>();
  r.capacity_nats = j.at("capacity_nats").get<double>();
  r.capacity_bits = j.at("capacity_bits").get<double>();
  r.expected_cost = j.at("expected_cost").get<double>();
  const json& th = j.at("thresholds");
  r.cbar_star = th.at("cbar_star").get<double>();
  r.theta = doubles_from_json(th.at("theta"));
  r.lambda_at_theta = doubles_from_json(th.at("lambda"));
  const json& kkt = j.at("kkt");
  r.kkt_evaluated = kkt.at("evaluated").get<bool>();
  r.kkt_pass = kkt.at("pass").get<bool>();
  r.kkt_mutual_information = kkt.at("mutual_information").get<double>();
  r.kkt_equality_residual = kkt.at("equality_residual").get<double>();
  r.kkt_inequality_violation = kkt.at("inequality_violation").get<double>();
  r.kkt_worst_x = kkt.at("worst_x").get<double>();
  const json& ba = j.at("ba");
  r.ba_present = ba.at("present").get<bool>();
  r.ba_iterations = ba.at("iterations").get<long>();
  r.ba_converged = ba.at("converged").get<bool>();
  r.ba_achieved_cost = ba.at("achieved_cost").get<double>();
  r.ba_cluster_positions = doubles_from_json(ba.at("cluster_positions"));
  r.ba_cluster_masses = doubles_from_json(ba.at("cluster_masses"));
  r.ba_largest_gap_cells = ba.at("largest_gap_cells").get<int>();
  r.ba_full_support = ba.at("full_support").get<bool>();
  r.ba_discrete = ba.at("discrete").get<bool>();
  return r;
}

CsvWriter::CsvWriter(std::vector<std::string> columns, std::string provenance,
                     bool with_provenance)
    : columns_(std::move(columns)),
      provenance_(std::move(provenance)),
      with_provenance_(with_provenance) {}

void CsvWriter::add_row(const std::vector<double>& values, const std::string& annotation) {
  if (!annotation.empty()) has_annotations_ = true;
  rows_.emplace_back(values, annotation);
}

std::string CsvWriter::str() const {
  std::ostringstream os;
  if (with_provenance_) os << "# " << provenance_ << "\n";
  os << "#";
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    os << (c == 0 ? " " : ",") << columns_[c];
  }
  if (has_annotations_) os << ",annotation";
  os << "\n";
  for (const auto& [values, annotation] : rows_) {
    for (std::size_t c = 0; c < values.size(); ++c) {
      if (c > 0) os << ",";
      os << format_double(values[c]);
    }
    if (has_annotations_) os << "," << annotation;
    os << "\n";
  }
  return os.str();
}

}  // namespace unifcap
