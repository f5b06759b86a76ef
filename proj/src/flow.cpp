#include "chevron/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>

#include "band_preconditioner.hpp"
#include "tangent.hpp"

namespace chevron {

namespace {

using detail::as_tangent;
using detail::axpy;
using detail::BandPreconditioner;
using detail::scaled;
using detail::Tangent;
using detail::tdot;

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Size of the gradient change caused by moving every free coordinate by one
// ulp. A gradient below this cannot be reduced further in double precision.
double resolution_floor(const Objective& f, const State& x, const Tangent& g, std::span<const double> w) {
  State y = x;
  auto nudge = [](double v, std::size_t i) { return std::nextafter(v, i % 2 ? HUGE_VAL : -HUGE_VAL); };
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < n; ++i) {
    Vec3& d = y.director.values[i];
    d = {nudge(d.x, i), nudge(d.y, i + 1), nudge(d.z, i)};
    if (i == 0 || i + 1 == n) continue;
    Complex& z = y.psi.values[i];
    z = {nudge(z.real(), i), nudge(z.imag(), i + 1)};
  }
  Tangent diff = as_tangent(f(y).gradient);
  for (std::size_t i = 0; i < n; ++i) {
    diff.dir[i] = tangent_part(diff.dir[i] - g.dir[i], x.director.values[i]);
    diff.psi[i] -= g.psi[i];
  }
  return std::sqrt(tdot(diff, diff, w));
}

void project_onto(Tangent& t, const State& x) {
  for (std::size_t i = 0; i < t.dir.size(); ++i) t.dir[i] = tangent_part(t.dir[i], x.director.values[i]);
}

// n <- normalize(n + alpha d), psi <- psi + alpha d on nodes the direction moves.
State retract(const State& x, const Tangent& d, double alpha) {
  State out = x;
  for (std::size_t i = 0; i < x.grid.size(); ++i) {
    if (d.dir[i] != Vec3{}) out.director.values[i] = normalized(x.director.values[i] + d.dir[i] * alpha);
    if (d.psi[i] != Complex{}) out.psi.values[i] = x.psi.values[i] + alpha * d.psi[i];
  }
  return out;
}

// phi'(alpha) along the retraction path, from the (tangent) gradient at the trial point.
double path_slope(const State& x, const Tangent& d, const Tangent& g_trial, double alpha,
                  std::span<const double> w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double r = norm(x.director.values[i] + d.dir[i] * alpha);
    acc += w[i] * (dot(g_trial.dir[i], d.dir[i]) / r + std::real(std::conj(g_trial.psi[i]) * d.psi[i]));
  }
  return acc;
}

struct CurvaturePair {
  Tangent s, y;
  double rho;
};

// Two-loop recursion: returns -H g.
Tangent lbfgs_direction(const Tangent& g, const std::vector<CurvaturePair>& pairs,
                        const BandPreconditioner* seed, std::span<const double> w) {
  Tangent q = g;
  std::vector<double> a(pairs.size());
  for (std::size_t k = pairs.size(); k-- > 0;) {
    a[k] = pairs[k].rho * tdot(pairs[k].s, q, w);
    axpy(-a[k], pairs[k].y, q);
  }
  Tangent r;
  if (seed) {
    r = seed->apply(q, w);
  } else {
    const auto& last = pairs.back();
    r = scaled(q, tdot(last.s, last.y, w) / tdot(last.y, last.y, w));
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double b = pairs[k].rho * tdot(pairs[k].y, r, w);
    axpy(a[k] - b, pairs[k].s, r);
  }
  return scaled(r, -1.0);
}

}  // namespace

void DissipationLedger::record(const StepStats& s) {
  cumulative_movement += s.movement_n + s.movement_psi;
  steps.push_back(s);
}

LedgerCheck check_ledger(const DissipationLedger& ledger, double rel_tol) {
  LedgerCheck out;
  double seg_start_energy = ledger.initial_energy;
  double seg_movement = 0.0;
  std::size_t seg_steps = 0;
  for (std::size_t k = 0; k < ledger.steps.size(); ++k) {
    const StepStats& s = ledger.steps[k];
    if (k > 0 && s.field != ledger.steps[k - 1].field) {
      seg_start_energy = s.energy_before;
      seg_movement = 0.0;
      seg_steps = 0;
    }
    ++seg_steps;
    seg_movement += s.movement_n + s.movement_psi;
    const double scale = std::abs(seg_start_energy);
    std::ostringstream why;
    if (!(s.dissipation_residual >= -rel_tol * scale)) {
      why << "step " << s.m << ": dissipation residual " << s.dissipation_residual << " below tolerance";
    } else if (!(s.energy_after <= s.energy_before + 1e-12 * std::abs(s.energy_before))) {
      why << "step " << s.m << ": energy increased";
    } else if (!(seg_movement + s.energy_after <=
                 seg_start_energy + static_cast<double>(seg_steps) * rel_tol * scale)) {
      why << "step " << s.m << ": cumulative dissipation inequality violated";
    } else {
      continue;
    }
    out.ok = false;
    out.first_violation = s.m;
    out.message = why.str();
    return out;
  }
  return out;
}

namespace {
std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}
}  // namespace

LineSearchStalled::LineSearchStalled(State reached, std::size_t iterations, double grad_norm)
    : Error(ErrorKind::LineSearchStalled,
            "no Armijo step above the minimum step size after " + std::to_string(iterations) +
                " iterations (gradient norm " + sci(grad_norm) + ")"),
      state_(std::move(reached)),
      iterations_(iterations),
      grad_norm_(grad_norm) {}

InnerResult inner_minimize(const Objective& objective, State start, const InnerOptions& o) {
  const auto w = start.grid.weights();
  InnerResult r;
  State x = std::move(start);
  ObjectiveValue cur = objective(x);
  Tangent g = as_tangent(cur.gradient);
  double gn = std::sqrt(tdot(g, g, w));
  r.history.push_back(cur.value);
  double bb_step = o.initial_step;
  std::vector<CurvaturePair> pairs;
  std::optional<BandPreconditioner> seed;
  if (o.method == InnerMethod::lbfgs && o.precondition && gn > o.tol) {
    seed = BandPreconditioner::build(objective, x, g, 1.0 / o.initial_step);
  }
  // First step, and restarts after a non-descent direction.
  auto fresh_direction = [&](Tangent& d, double& alpha) {
    if (seed) {
      d = scaled(seed->apply(g, w), -1.0);
      project_onto(d, x);
      alpha = 1.0;
    } else {
      d = scaled(g, -1.0);
      alpha = bb_step;
    }
  };

  // Measured once the energy change first drops into roundoff; below it the
  // gradient is noise and further iterations only wander.
  std::optional<double> floor;

  while (true) {
    if (gn <= o.tol) {
      r.converged = true;
      break;
    }
    if (floor && gn <= *floor) {
      r.at_resolution_floor = true;
      break;
    }
    if (r.iterations >= o.max_iters) break;

    Tangent d;
    double alpha = 1.0;
    if (o.method == InnerMethod::lbfgs && !pairs.empty()) {
      d = lbfgs_direction(g, pairs, seed ? &*seed : nullptr, w);
      project_onto(d, x);
      if (!(tdot(g, d, w) < 0.0)) {
        pairs.clear();
        fresh_direction(d, alpha);
      }
    } else {
      fresh_direction(d, alpha);
    }
    const double slope0 = tdot(g, d, w);

    State trial;
    ObjectiveValue tv;
    Tangent gt;
    bool floored = false;
    while (true) {
      trial = retract(x, d, alpha);
      tv = objective(trial);
      gt = as_tangent(tv.gradient);
      double change = tv.value - cur.value;
      const double noise = 64.0 * kEps * std::max(cur.magnitude, tv.magnitude);
      if (noise > 0.0 && std::abs(change) <= noise) {
        change = 0.5 * alpha * (slope0 + path_slope(x, d, gt, alpha, w));
        if (!floor) floor = resolution_floor(objective, x, g, w);
      }
      if (change < 0.0 && change <= o.armijo_c * alpha * slope0) break;
      alpha *= o.backtrack;
      if (alpha * std::sqrt(tdot(d, d, w)) < o.min_step * std::max(gn, 1.0)) {
        if (!floor) floor = resolution_floor(objective, x, g, w);
        if (gn <= *floor) {
          floored = true;
          break;
        }
        throw LineSearchStalled(std::move(x), r.iterations, gn);
      }
    }
    if (floored) {
      r.at_resolution_floor = true;
      break;
    }

    // Step and gradient change, expressed in the tangent space at the new point.
    Tangent s{std::vector<Vec3>(w.size()), std::vector<Complex>(w.size())};
    Tangent y = gt;
    for (std::size_t i = 0; i < w.size(); ++i) {
      s.dir[i] = tangent_part(trial.director.values[i] - x.director.values[i], trial.director.values[i]);
      s.psi[i] = trial.psi.values[i] - x.psi.values[i];
      y.dir[i] -= tangent_part(g.dir[i], trial.director.values[i]);
      y.psi[i] -= g.psi[i];
    }
    const double sy = tdot(s, y, w);
    const double ss = tdot(s, s, w);
    if (sy > 1e-12 * ss && ss > 0.0) {
      bb_step = std::clamp(ss / sy, o.min_step, o.max_step);
      if (o.method == InnerMethod::lbfgs) {
        if (pairs.size() == o.memory) pairs.erase(pairs.begin());
        pairs.push_back({std::move(s), std::move(y), 1.0 / sy});
      }
    } else {
      bb_step = std::clamp(2.0 * alpha, o.min_step, o.max_step);
    }

    x = std::move(trial);
    cur = std::move(tv);
    g = std::move(gt);
    gn = std::sqrt(tdot(g, g, w));
    r.history.push_back(cur.value);
    ++r.iterations;
  }
  r.state = std::move(x);
  r.last = std::move(cur);
  r.grad_norm = gn;
  return r;
}

StepObjective::StepObjective(const State& prev, double tau, const PhysicalParams& params,
                             const Discretization& disc, Exec exec)
    : prev_(prev), tau_(tau), params_(params), disc_(disc), exec_(exec) {}

std::pair<double, double> StepObjective::movement(const State& s) const {
  double mn = 0.0, mp = 0.0;
  const auto& w = disc_.weights;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Vec3 dn = s.director.values[i] - prev_.director.values[i];
    mn += w[i] * dot(dn, dn);
    mp += w[i] * std::norm(s.psi.values[i] - prev_.psi.values[i]);
  }
  return {mn / (2.0 * tau_), mp / (2.0 * tau_)};
}

ObjectiveValue StepObjective::operator()(const State& s) const {
  EnergyPartials partials;
  const EnergyEvaluation e = evaluate_energy(s, disc_, params_, &partials, exec_);
  const auto [mn, mp] = movement(s);
  ObjectiveValue out;
  out.value = e.breakdown.total + mn + mp;
  out.magnitude = e.magnitude + mn + mp;
  out.gradient = gradient_from_partials(s, partials, disc_.weights);
  add_movement_gradient(prev_, s, tau_, out.gradient);
  return out;
}

std::pair<State, StepStats> rothe_step(const State& prev, double tau, const PhysicalParams& params,
                                       const FlowConfig& config, const Discretization& disc, Exec exec) {
  const StepObjective objective(prev, tau, params, disc, exec);
  InnerOptions opts;
  opts.tol = config.inner_tol;
  opts.max_iters = config.inner_max_iters;
  opts.initial_step = tau;
  InnerResult inner = inner_minimize(std::cref(objective), prev, opts);

  State next = std::move(inner.state);
  next.t = prev.t + tau;
  StepStats st;
  st.t = next.t;
  st.field = params.E_field;
  st.inner_iters = inner.iterations;
  st.grad_norm_final = inner.grad_norm;
  st.energy_before = evaluate_energy(prev, disc, params, nullptr, exec).breakdown.total;
  st.energy_after = evaluate_energy(next, disc, params, nullptr, exec).breakdown.total;
  std::tie(st.movement_n, st.movement_psi) = objective.movement(next);
  st.dissipation_residual = st.energy_before - (st.movement_n + st.movement_psi + st.energy_after);
  return {std::move(next), st};
}

std::pair<State, StepStats> rothe_step(const State& prev, double tau, const PhysicalParams& params,
                                       const FlowConfig& config, Exec exec) {
  const Discretization disc(prev.grid);
  return rothe_step(prev, tau, params, config, disc, exec);
}

FlowInterrupted::FlowInterrupted(FlowResult partial, const std::string& reason)
    : Error(ErrorKind::LineSearchStalled, reason), partial_(std::move(partial)) {}

FlowResult run_flow(const State& initial, const PhysicalParams& params, const FlowConfig& config,
                    const FlowOptions& options) {
  validate(config);
  const Discretization disc(initial.grid);
  const std::size_t steps = config.resolved_steps();
  auto field_at = [&](double t) { return options.field ? options.field(t) : params.E_field; };

  FlowResult result;
  PhysicalParams p = params;
  p.E_field = field_at(initial.t + config.tau);
  const EnergyBreakdown e0 = evaluate_energy(initial, disc, p, nullptr, options.exec).breakdown;
  result.ledger.initial_energy = e0.total;
  result.snapshots.push_back({0, initial, e0});

  State current = initial;
  for (std::size_t m = 1; m <= steps; ++m) {
    p.E_field = field_at(current.t + config.tau);
    try {
      auto [next, stats] = rothe_step(current, config.tau, p, config, disc, options.exec);
      stats.m = m;
      result.ledger.record(stats);
      current = std::move(next);
      if (options.observer) options.observer(current, stats);
    } catch (const LineSearchStalled& err) {
      result.final_state = current;
      result.check = check_ledger(result.ledger);
      throw FlowInterrupted(std::move(result), "step " + std::to_string(m) + ": " + err.what());
    }
    const bool keep = m == steps || (options.snapshot_every != 0 && m % options.snapshot_every == 0);
    if (keep) {
      result.snapshots.push_back(
          {m, current, evaluate_energy(current, disc, p, nullptr, options.exec).breakdown});
    }
  }
  result.final_state = std::move(current);
  result.check = check_ledger(result.ledger);
  return result;
}

}  // namespace chevron
