#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "chevron/diagnostics.hpp"
#include "chevron/energy.hpp"
#include "chevron/fields.hpp"
#include "chevron/flow.hpp"

namespace chevron {

/// Everything a finished (or interrupted) run produced, in memory.
struct RunArtifacts {
  std::vector<std::size_t> snapshot_steps;
  std::vector<double> snapshot_times;
  std::vector<EnergyBreakdown> snapshot_energies;
  std::vector<DiagnosticsRecord> diagnostics;  ///< one per snapshot
  std::vector<State> snapshots;
  DissipationLedger ledger;
  LedgerCheck check;
};

// CSV writers. Reals use 17 significant digits so files reload exactly.
// All throw Error(IoError) when the file cannot be written.

/// Columns x, n1, n2, n3, re_psi, im_psi, abs_psi.
void write_field_csv(const std::filesystem::path& path, const State& state);
/// Reads a field snapshot. The grid is rebuilt from the x column, which must
/// be uniform on [-L, L]. Boundary slopes are left at zero.
/// Throws ParseError on malformed content and IoError on unreadable files.
State read_field_csv(const std::filesystem::path& path);

/// Columns m, t, energy_before, energy_after, movement_n, movement_psi,
/// dissipation_residual, inner_iters, grad_norm_final.
void write_ledger_csv(const std::filesystem::path& path, const DissipationLedger& ledger);

/// Columns t, perp, par, cpar, penal, reg, nematic, electro, total.
void write_energy_csv(const std::filesystem::path& path, const std::vector<double>& t,
                      const std::vector<EnergyBreakdown>& energies);

/// Columns t, sup_ratio, min_modulus, melt_lo, melt_hi, tip_x, state_label,
/// natural_bc_residual. Absent values are empty cells.
void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

/// Line plots: energy vs t, min |psi| vs t, tilt profiles and n3 profiles at
/// up to five evenly chosen snapshots. Output bytes depend only on the input.
/// Throws MissingArtifact when there is no snapshot.
std::vector<std::filesystem::path> emit_plots(const RunArtifacts& run, const std::filesystem::path& dir);

}  // namespace chevron
