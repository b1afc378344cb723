#include "mmrl/trace.hpp"

#include "mmrl/error.hpp"

namespace mmrl {

std::optional<double> field_value(const TraceRow& row, TraceField field) {
  switch (field) {
    case TraceField::nash_gap:
      return row.nash_gap;
    case TraceField::log_policy_gap:
      return row.log_policy_gap;
    case TraceField::w_gap:
      return row.w_gap;
    case TraceField::q_gap:
      return row.q_gap;
    case TraceField::min_value:
      return row.min_value;
    case TraceField::scalar_soft_value:
      return row.scalar_soft_value;
  }
  return std::nullopt;
}

TraceField parse_trace_field(const std::string& name) {
  if (name == "nash_gap") return TraceField::nash_gap;
  if (name == "log_policy_gap") return TraceField::log_policy_gap;
  if (name == "w_gap") return TraceField::w_gap;
  if (name == "q_gap") return TraceField::q_gap;
  if (name == "min_value") return TraceField::min_value;
  if (name == "scalar_soft_value") return TraceField::scalar_soft_value;
  throw InvalidArgument("unknown trace field '" + name + "'");
}

std::string to_string(TraceField field) {
  switch (field) {
    case TraceField::nash_gap:
      return "nash_gap";
    case TraceField::log_policy_gap:
      return "log_policy_gap";
    case TraceField::w_gap:
      return "w_gap";
    case TraceField::q_gap:
      return "q_gap";
    case TraceField::min_value:
      return "min_value";
    case TraceField::scalar_soft_value:
      return "scalar_soft_value";
  }
  return "?";
}

}  // namespace mmrl
