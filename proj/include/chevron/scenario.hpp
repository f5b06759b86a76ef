#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chevron/config.hpp"
#include "chevron/diagnostics.hpp"
#include "chevron/exec.hpp"
#include "chevron/initial_data.hpp"
#include "chevron/io.hpp"

namespace chevron {

/// Per-step monitor values, recorded after every accepted step (index 0 is the start).
struct StepSeries {
  std::vector<double> t;
  std::vector<double> sup_ratio;
  std::vector<double> min_modulus;
  std::vector<StateLabel> label;
};

struct RunOutcome {
  std::string name;  ///< directory name, unique within a scenario
  double sweep_value = 0.0;
  std::size_t n_nodes = 0;
  bool completed = false;
  std::string error;  ///< empty when the run finished
  RunArtifacts artifacts;
  StepSeries series;
  State final_state;
};

struct ScenarioResult {
  int exit_code = 0;  ///< 0 all checks passed, 2 ledger violation, 1 error
  std::vector<RunOutcome> runs;
  std::optional<RatioSweep> ratio;            ///< q sweep
  std::vector<EnergySweepRow> initial_energy;  ///< q sweep
  std::vector<RhoDistance> rho_distances;     ///< rho sweep, final step of every run
  std::vector<std::filesystem::path> files;
};

/// Built-in profile or the configured snapshot file, plus seeded noise on interior psi nodes.
State make_initial_state(const Scenario& scenario, const ValidatedParams& params, std::size_t n_nodes,
                         std::uint64_t seed);

/// Applied field at the end time of a step: +E before switch_time, -E after (switch only).
double applied_field(const Scenario& scenario, double t);

/// One flow run with the scenario's field schedule. Never throws for flow
/// failures; they end up in RunOutcome::error.
RunOutcome simulate(const Scenario& scenario, const PhysicalParams& params, std::size_t n_nodes,
                    std::uint64_t seed, Exec exec);

/// Runs the scenario and writes every artifact under scenario.output_dir.
/// Throws ConfigError before any run when the scenario is invalid.
ScenarioResult run_scenario(const Scenario& scenario);

/// Label sequence with consecutive repeats removed, e.g. UP MIXED DOWN.
std::vector<StateLabel> label_transitions(const std::vector<StateLabel>& labels);

}  // namespace chevron
