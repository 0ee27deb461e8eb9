#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace mmot {

// Batch front-end. A scenario is a single self-describing JSON file naming
// the marginals (inline, file reference, or seeded generator), the cost, an
// ordered stage list from {solve, entropic, splitting, twist, decompose,
// verify}, and optional tolerance overrides. Reports embed the tolerance
// values in effect, and identical scenarios produce byte-identical reports.

struct ScenarioSummary {
  std::string name;
  std::string instance_hash;
  std::optional<double> primal;
  std::optional<double> gap;
  std::optional<std::size_t> m_observed;
  std::optional<std::size_t> k;
  std::optional<std::string> verdict;  // "consistent" | "inconsistent"
  int exit_code = 0;                   // 0 ok, 2 inconsistent verdict
};

struct SweepRow {
  std::size_t resolution = 0;
  std::size_t m_observed = 0;
  std::size_t k = 0;
  double max_gradient_spread = 0.0;
};

struct SweepResult {
  std::string name;
  std::vector<SweepRow> rows;
  std::string csv_path;
};

// Runs one scenario, writing per-stage reports plus summary.json under
// out_dir (empty: "<scenario stem>_out" in the working directory).
ScenarioSummary run_scenario_file(const std::string& scenario_path,
                                  const std::string& out_dir);

// Re-runs a generator-based scenario at each resolution through the fixed
// solve -> splitting -> twist -> decompose pipeline and emits one summary
// row per resolution (sweep.csv + sweep.json). Marginals that are not
// generator specs are a configuration error.
SweepResult sweep_scenario_file(const std::string& scenario_path,
                                const std::vector<std::size_t>& resolutions,
                                const std::string& out_dir);

// Runs every *.json scenario in a directory, each into out_root/<stem>,
// with jobs parallel workers. Returns 1 if any scenario errored, else 2 if
// any verdict was inconsistent, else 0.
int run_scenario_directory(const std::string& dir, const std::string& out_root,
                           int jobs);

}  // namespace mmot
