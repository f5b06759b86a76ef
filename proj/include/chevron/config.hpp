#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chevron/params.hpp"

namespace chevron {

enum class ScenarioKind { relax, switch_field, q_sweep, rho_sweep };

std::string_view to_string(ScenarioKind kind);
/// Accepts the config spelling (q_sweep) and the CLI spelling (q-sweep).
std::optional<ScenarioKind> parse_scenario_kind(std::string_view text);

struct Scenario {
  ScenarioKind kind = ScenarioKind::relax;
  PhysicalParams params;
  FlowConfig flow;
  /// E flips from +E_field to -E_field for steps ending after this time (switch only).
  double switch_time = 0.0;
  /// q values or rho values (sweeps only).
  std::vector<double> sweep_values;
  /// q-sweep elements use at least enough nodes for h q <= sweep_max_hq.
  double sweep_max_hq = 0.25;
  std::string output_dir = "out";
  std::size_t snapshot_every = 10;
  double melt_threshold = 0.25;
  /// Field snapshot CSV used instead of the built-in initial profile; empty for the profile.
  std::string initial_state;
  /// Amplitude of seeded noise added to interior psi nodes of the initial state.
  double perturbation = 0.0;
  std::uint64_t seed = 0;
};

/// key = value lines, '#' starts a comment. Unknown keys and malformed values
/// raise ConfigError(ParseError) with the line; the parsed scenario is then
/// validated and failures raise ConfigError(ValidationError) naming the field.
Scenario parse_config(std::string_view text);
Scenario load_config(const std::filesystem::path& path);

/// Throws ConfigError(ValidationError).
void validate(const Scenario& scenario);

/// Text that parse_config maps back to the same scenario; reals use 17 significant digits.
std::string serialize_config(const Scenario& scenario);

/// Applies one key = value assignment, as a config line would.
void apply_setting(Scenario& scenario, std::string_view key, std::string_view value, std::size_t line = 0);

}  // namespace chevron
