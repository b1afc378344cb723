#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "mmrl/equilibrium.hpp"
#include "mmrl/metrics.hpp"
#include "mmrl/oracle.hpp"
#include "mmrl/momdp.hpp"
#include "mmrl/policy_eval.hpp"
#include "mmrl/solvers.hpp"
#include "mmrl/trace.hpp"

namespace mmrl::io {

using Json = nlohmann::json;

/// {"gamma", "mu": [S], "transition": [S][A][S], "rewards": [K][S][A], "meta"}
Json to_json(const MomdpInstance& instance);
MomdpInstance instance_from_json(const Json& j);

Json to_json(const Policy& policy);
Json to_json(const Equilibrium& eq);
Equilibrium equilibrium_from_json(const Json& j);
Json to_json(const EvalReport& report);
Json to_json(const GapReport& report);
Json to_json(const Reformulation& r);

/// Every SolverConfig field except the initial iterates.
Json to_json(const SolverConfig& config);
/// Missing keys keep the values already in `config`.
void merge_json(const Json& j, SolverConfig& config);

/// 16 hex digits of FNV-1a over the canonical JSON dump.
std::string instance_hash(const MomdpInstance& instance);
std::string fnv1a_hex(const std::string& bytes);

/// Round-trip-exact double formatting.
std::string format_double(double x);

void write_trace_csv(std::ostream& out, const IterationTrace& trace);
/// Throws InvalidArgument on a malformed header or row.
IterationTrace read_trace_csv(std::istream& in);

Json read_json_file(const std::filesystem::path& path);
/// Writes `text` to `path` via a temporary file and rename.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace mmrl::io
