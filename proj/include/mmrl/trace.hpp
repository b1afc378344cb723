#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mmrl {

/// One recorded iterate. `iter` counts the updates applied so far.
struct TraceRow {
  long iter = 0;
  Eigen::VectorXd weight;
  Eigen::VectorXd values;  ///< V^{pi_t} per objective
  double min_value = 0.0;
  double scalar_soft_value = 0.0;  ///< <w_t, V_tau^{pi_t}>
  std::optional<double> nash_gap;
  std::optional<double> log_policy_gap;
  std::optional<double> w_gap;
  std::optional<double> q_gap;
  double wall_ms = 0.0;
};

struct IterationTrace {
  int num_objectives = 0;
  std::vector<TraceRow> rows;
};

enum class TraceField { nash_gap, log_policy_gap, w_gap, q_gap, min_value, scalar_soft_value };

std::optional<double> field_value(const TraceRow& row, TraceField field);
TraceField parse_trace_field(const std::string& name);
std::string to_string(TraceField field);

}  // namespace mmrl
