#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chevron/energy.hpp"
#include "chevron/error.hpp"
#include "chevron/exec.hpp"
#include "chevron/fields.hpp"
#include "chevron/params.hpp"
#include "chevron/variation.hpp"

namespace chevron {

struct StepStats {
  std::size_t m = 0;
  double t = 0.0;
  double field = 0.0;  ///< E used by this step's functional
  std::size_t inner_iters = 0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double movement_n = 0.0;    ///< sum w |n - n_prev|^2 / (2 tau)
  double movement_psi = 0.0;  ///< sum w |psi - psi_prev|^2 / (2 tau)
  double grad_norm_final = 0.0;
  /// energy_before - (movement_n + movement_psi + energy_after)
  double dissipation_residual = 0.0;
};

struct DissipationLedger {
  double initial_energy = 0.0;
  double cumulative_movement = 0.0;
  std::vector<StepStats> steps;

  void record(const StepStats& s);
};

struct LedgerCheck {
  bool ok = true;
  std::optional<std::size_t> first_violation;  ///< step index m
  std::string message;
};

/// Checks every step's residual and the cumulative inequality
/// sum_k movement_k + F(m) <= F(0) + m rel_tol |F(0)|.
/// The cumulative sum restarts whenever the applied field changes, with F(0)
/// replaced by the energy entering that segment under the new field.
LedgerCheck check_ledger(const DissipationLedger& ledger, double rel_tol = 1e-10);

/// Objective value and projected, masked gradient at a state.
struct ObjectiveValue {
  double value = 0.0;
  /// Size of the roundoff scale in `value` (sum of absolute contributions).
  double magnitude = 0.0;
  GradientPair gradient;
};

using Objective = std::function<ObjectiveValue(const State&)>;

enum class InnerMethod {
  /// Steepest descent with Barzilai-Borwein trial steps.
  gradient_bb,
  /// Limited-memory BFGS directions in the tangent space; same line search.
  lbfgs,
};

struct InnerOptions {
  InnerMethod method = InnerMethod::lbfgs;
  std::size_t memory = 12;
  double tol = 1e-8;
  std::size_t max_iters = 20000;
  double initial_step = 1.0;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-16;
  double max_step = 1e12;
  /// L-BFGS only: seed the recursion with the inverse of a banded Hessian
  /// probed at the start point instead of a scalar.
  bool precondition = true;
};

struct InnerResult {
  State state;
  ObjectiveValue last;
  std::size_t iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  /// Stopped above tol because a one-ulp move of the state changes the
  /// gradient by more than its norm.
  bool at_resolution_floor = false;
  std::vector<double> history;  ///< objective value of every accepted iterate, start included
};

class LineSearchStalled : public Error {
 public:
  LineSearchStalled(State reached, std::size_t iterations, double grad_norm);

  const State& state() const noexcept { return state_; }
  std::size_t iterations() const noexcept { return iterations_; }
  double grad_norm() const noexcept { return grad_norm_; }

 private:
  State state_;
  std::size_t iterations_;
  double grad_norm_;
};

/// Descent on (spheres)^N x free psi nodes with Armijo backtracking along the
/// retraction n <- (n + a d) / |n + a d|, psi <- psi + a d. Every accepted
/// iterate decreases the objective. Fixed psi nodes never move because their
/// gradient entries are zero.
///
/// When a trial's energy change is below the roundoff scale of the objective,
/// the change is estimated as alpha/2 (phi'(0) + phi'(alpha)) along the
/// retraction path instead, which is exact for quadratics and lets the
/// iteration reach gradient tolerances far below sqrt(eps) |J|.
///
/// A backtracking failure ends the iteration quietly when the gradient norm is
/// already within the gradient change of a one-ulp state move; otherwise it
/// throws LineSearchStalled.
InnerResult inner_minimize(const Objective& objective, State start, const InnerOptions& options);

/// The step functional J(n, psi) = movement/(2 tau) + F(n, psi) anchored at `prev`.
class StepObjective {
 public:
  StepObjective(const State& prev, double tau, const PhysicalParams& params, const Discretization& disc,
                Exec exec = Exec::serial);

  ObjectiveValue operator()(const State& s) const;
  /// (movement_n, movement_psi) of `s` relative to the anchor.
  std::pair<double, double> movement(const State& s) const;

 private:
  const State& prev_;
  double tau_;
  PhysicalParams params_;
  const Discretization& disc_;
  Exec exec_;
};

/// One minimizing-movement step. The returned state satisfies
/// J(next) <= J(prev) = F(prev) even if the inner solver stops early.
/// Throws LineSearchStalled.
std::pair<State, StepStats> rothe_step(const State& prev, double tau, const PhysicalParams& params,
                                       const FlowConfig& config, Exec exec = Exec::serial);
std::pair<State, StepStats> rothe_step(const State& prev, double tau, const PhysicalParams& params,
                                       const FlowConfig& config, const Discretization& disc,
                                       Exec exec = Exec::serial);

struct Snapshot {
  std::size_t m = 0;
  State state;
  EnergyBreakdown energy;
};

struct FlowOptions {
  /// Keep every k-th state (plus the first and last); 0 keeps only those two.
  std::size_t snapshot_every = 10;
  /// Applied field as a function of the step's end time; the params value when empty.
  std::function<double(double)> field;
  /// Called after every accepted step.
  std::function<void(const State&, const StepStats&)> observer;
  Exec exec = Exec::serial;
};

struct FlowResult {
  std::vector<Snapshot> snapshots;
  DissipationLedger ledger;
  State final_state;
  LedgerCheck check;
};

/// Thrown when a step fails; carries everything computed up to that point.
class FlowInterrupted : public Error {
 public:
  FlowInterrupted(FlowResult partial, const std::string& reason);
  const FlowResult& partial() const noexcept { return partial_; }

 private:
  FlowResult partial_;
};

/// M = config.resolved_steps() sequential rothe steps from `initial`.
FlowResult run_flow(const State& initial, const PhysicalParams& params, const FlowConfig& config,
                    const FlowOptions& options = {});

}  // namespace chevron
