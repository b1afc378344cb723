#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mmrl/io.hpp"
#include "mmrl/momdp.hpp"
#include "mmrl/solvers.hpp"
#include "mmrl/trace.hpp"

namespace mmrl::experiment {

struct InstanceSpec {
  int num_states = 2;
  int num_actions = 2;
  int num_objectives = 2;
  int count = 50;
  std::uint64_t seed_base = 0;
};

struct SweepConfig {
  std::vector<InstanceSpec> instances;
  std::vector<SolverConfig> solvers;
  double gamma = 0.95;
  double reward_min = 1.0;
  double reward_max = 20.0;
  bool reference = false;  ///< solve the equilibrium first and record the gaps
  std::uint64_t master_seed = 0;
  std::filesystem::path out_dir = "sweep";
  int workers = 0;  ///< 0 means worker_count()
};

/// Sizes (2,2,2), (3,3,6), (4,4,4), 50 instances each, ERAM with
/// gamma=0.95, tau=tau_w=0.05, eta=0.01, lambda=1e-4, T=20000.
SweepConfig default_sweep();
/// Same hyperparameters with ARAM on (2,2,10) and (4,4,10).
SweepConfig aram_sweep();

/// JSON form used by `sweep --config`. Keys absent from `j` keep the
/// values of `base`.
SweepConfig sweep_from_json(const io::Json& j, SweepConfig base = default_sweep());
io::Json to_json(const SweepConfig& config);

/// MMRL_WORKERS when set, else the hardware concurrency (at least 1).
int worker_count();

/// One cell of the grid.
struct RunSpec {
  std::size_t index = 0;  ///< position in grid order; fixes the run's substream
  InstanceSpec size;
  std::uint64_t instance_seed = 0;
  std::size_t solver_index = 0;
  SolverConfig solver;
  std::string id;   ///< relative path stem, e.g. "2x2x2/eram-0/inst-7"
  std::string key;  ///< content hash of everything the run depends on
};

std::vector<RunSpec> expand(const SweepConfig& config);

struct ManifestEntry {
  std::string id;
  std::string key;
  std::string status;  ///< "ok" or "failed"
  std::string error;
};

/// Last entry per key wins.
std::map<std::string, ManifestEntry> read_manifest(const std::filesystem::path& out_dir);

struct SweepOutcome {
  std::size_t executed = 0;
  std::size_t skipped = 0;
  std::vector<ManifestEntry> failed;
};

/// Runs every grid cell whose key is not already recorded as ok in the
/// manifest. Appends to the manifest under an exclusive file lock.
/// `on_done` is called (serialized) after each executed run.
SweepOutcome run_sweep(const SweepConfig& config,
                       const std::function<void(const ManifestEntry&)>& on_done = {});

/// Metadata sidecar of a solver run.
io::Json run_metadata(const MomdpInstance& instance, const SolverConfig& config, const Equilibrium* reference);

/// A trace together with the grouping labels taken from its sidecar.
struct LabeledTrace {
  std::string group;  ///< e.g. "2x2x2 eram"
  int num_states = 0, num_actions = 0, num_objectives = 0;
  std::string algorithm;
  IterationTrace trace;
};

/// Reads `<csv>` and, if present, `<csv minus .csv>.meta.json`.
LabeledTrace load_trace(const std::filesystem::path& csv);
/// Every ok run listed in a sweep manifest, in grid order.
std::vector<LabeledTrace> load_sweep(const std::filesystem::path& out_dir);

struct Moments {
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
  double median = 0.0;
};

struct SummaryRow {
  std::string group;
  int num_states = 0, num_actions = 0, num_objectives = 0;
  std::string algorithm;
  long iter = 0;
  int count = 0;
  std::map<TraceField, Moments> fields;  ///< only fields present in every trace
};

/// Rows per group and per checkpoint shared by all traces of the group.
std::vector<SummaryRow> summarize(const std::vector<LabeledTrace>& traces);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

struct ChartOptions {
  std::string title;
  std::string y_label;
  bool log_y = false;
  int width = 760;
  int height = 460;
};

/// Self-contained SVG with one mean curve and one mean +/- std band per group.
std::string render_chart(const std::vector<SummaryRow>& rows, TraceField field, const ChartOptions& options);

}  // namespace mmrl::experiment
