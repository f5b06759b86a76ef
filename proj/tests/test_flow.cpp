#include <omp.h>

#include <cmath>
#include <limits>

#include "chevron/energy.hpp"
#include "chevron/flow.hpp"
#include "chevron/initial_data.hpp"
#include "doctest.h"
#include "support/random_state.hpp"

using namespace chevron;
using testing_support::random_params;
using testing_support::random_state;

namespace {

double l2_distance(const State& a, const State& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    const double w = a.grid.weight(i);
    const Vec3 d = a.director.values[i] - b.director.values[i];
    acc += w * (dot(d, d) + std::norm(a.psi.values[i] - b.psi.values[i]));
  }
  return std::sqrt(acc);
}

// Objective whose value is the movement alone, anchored at `prev`.
Objective movement_only(const State& prev, double tau) {
  return [&prev, tau](const State& s) {
    ObjectiveValue out;
    const std::size_t n = s.grid.size();
    out.gradient.d_director.assign(n, Vec3{});
    out.gradient.d_psi.assign(n, Complex{});
    for (std::size_t i = 0; i < n; ++i) {
      const double w = s.grid.weight(i);
      const Vec3 dn = s.director.values[i] - prev.director.values[i];
      const Complex dp = s.psi.values[i] - prev.psi.values[i];
      out.value += w * (dot(dn, dn) + std::norm(dp)) / (2 * tau);
      out.gradient.d_director[i] = tangent_part(dn, s.director.values[i]) * (1.0 / tau);
      if (i > 0 && i + 1 < n) out.gradient.d_psi[i] = dp / (2 * tau);
    }
    out.magnitude = out.value;
    return out;
  };
}

State small_relaxed_state(const PhysicalParams& p, std::size_t n, double tol) {
  const State start = build_initial_state(validate(p), make_grid(p.L, n));
  const Discretization disc(start.grid);
  const Objective energy = [&](const State& s) {
    EnergyPartials partials;
    const auto e = evaluate_energy(s, disc, p, &partials);
    return ObjectiveValue{e.breakdown.total, e.magnitude, gradient_from_partials(s, partials, disc.weights)};
  };
  InnerOptions o;
  o.tol = tol;
  o.max_iters = 200000;
  o.initial_step = 1e-3;
  auto r = inner_minimize(energy, start, o);
  REQUIRE(r.converged);
  return r.state;
}

PhysicalParams gentle_params() {
  PhysicalParams p;
  p.q = 5.0;
  p.b = 0.2;
  p.theta = 0.5;
  return p;
}

}  // namespace

TEST_CASE("movement-only objective returns the anchor in one step") {
  const State prev = random_state(make_grid(1.0, 17), 1);
  State start = prev;
  for (std::size_t i = 1; i + 1 < 17; ++i) start.psi.values[i] += Complex(0.3 * std::sin(double(i)), -0.2);
  const double tau = 0.01;
  InnerOptions o;
  o.tol = 1e-12;
  o.initial_step = tau;
  // The scalar seed's first step is exactly tau times the gradient.
  o.precondition = false;
  const auto r = inner_minimize(movement_only(prev, tau), start, o);
  CHECK(r.iterations == 1);
  CHECK(r.converged);
  for (std::size_t i = 0; i < 17; ++i) {
    CHECK(std::abs(r.state.psi.values[i] - prev.psi.values[i]) <= 1e-15);
    CHECK(r.state.director.values[i] == prev.director.values[i]);
  }
  // The probed Hessian is exact up to difference roundoff, so one correction at most.
  o.precondition = true;
  const auto rp = inner_minimize(movement_only(prev, tau), start, o);
  CHECK(rp.converged);
  CHECK(rp.iterations <= 2);
  CHECK(l2_distance(rp.state, prev) <= 1e-12);

  // With a displaced director the sphere geometry needs a few more iterations.
  for (auto& n : start.director.values) n = normalized(n + Vec3{0.1, -0.05, 0.02});
  const auto r2 = inner_minimize(movement_only(prev, tau), start, o);
  CHECK(r2.converged);
  CHECK(l2_distance(r2.state, prev) <= 1e-12);
}

TEST_CASE("one-dimensional convex surrogate") {
  State s = random_state(make_grid_unchecked(1.0, 3), 2);
  s.psi.values[1] = Complex(-3.0, 0.0);
  const double h = s.grid.spacing();
  const Objective f = [h](const State& x) {
    const Complex z = x.psi.values[1];
    ObjectiveValue out;
    out.value = (z.real() - 0.25) * (z.real() - 0.25) + 4.0 * z.imag() * z.imag();
    out.magnitude = std::abs(out.value);
    out.gradient.d_director.assign(3, Vec3{});
    out.gradient.d_psi.assign(3, Complex{});
    out.gradient.d_psi[1] = Complex(2.0 * (z.real() - 0.25), 8.0 * z.imag()) / (2.0 * h);
    return out;
  };
  InnerOptions o;
  o.tol = 1e-12;
  for (auto method : {InnerMethod::gradient_bb, InnerMethod::lbfgs}) {
    o.method = method;
    const auto r = inner_minimize(f, s, o);
    CHECK(r.converged);
    CHECK(std::abs(r.state.psi.values[1].real() - 0.25) <= 1e-8);
  }
}

TEST_CASE("accepted iterates strictly decrease the step functional") {
  const auto p = random_params(4);
  const State prev = random_state(make_grid(p.L, 24), 4);
  const Discretization disc(prev.grid);
  const StepObjective J(prev, 1e-2, p, disc);
  InnerOptions o;
  o.tol = 1e-4;
  o.max_iters = 3000;
  o.initial_step = 1e-2;
  for (auto method : {InnerMethod::gradient_bb, InnerMethod::lbfgs}) {
    o.method = method;
    const auto r = inner_minimize(std::cref(J), prev, o);
    REQUIRE(r.history.size() >= 2);
    for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] < r.history[k - 1]);
    CHECK(r.state.director.max_unit_defect() <= 1e-12);
    CHECK(r.state.psi.pins_hold());
  }
}

TEST_CASE("a single step never dissipates more than it has") {
  FlowConfig cfg;
  cfg.inner_tol = 1e-7;
  cfg.inner_max_iters = 4000;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto p = random_params(seed + 30);
    const State prev = random_state(make_grid(p.L, 24), seed);
    const auto [next, st] = rothe_step(prev, 1e-2, p, cfg);
    CHECK(st.dissipation_residual >= -1e-10 * std::abs(st.energy_before));
    CHECK(st.energy_after <= st.energy_before + 1e-12 * std::abs(st.energy_before));
    CHECK(next.director.max_unit_defect() <= 1e-12);
    CHECK(next.psi.values.front() == prev.psi.values.front());
    CHECK(next.psi.values.back() == prev.psi.values.back());
    CHECK(next.t == prev.t + 1e-2);
  }
}

TEST_CASE("early stopping keeps the descent guarantee") {
  FlowConfig cfg;
  cfg.inner_tol = 1e-14;
  cfg.inner_max_iters = 5;
  const auto p = random_params(77);
  const State prev = random_state(make_grid(p.L, 24), 77);
  const auto [next, st] = rothe_step(prev, 1e-2, p, cfg);
  CHECK(st.inner_iters == 5);
  CHECK(st.dissipation_residual >= 0.0);
}

TEST_CASE("small step matches a fixed-step descent oracle") {
  PhysicalParams p = gentle_params();
  p.q = 2.0;
  p.E_field = 0.3;
  const State prev = random_state(make_grid_unchecked(p.L, 8), 5, 0.8);
  const Discretization disc(prev.grid);
  const double tau = 1e-2;
  FlowConfig cfg;
  cfg.inner_tol = 1e-11;
  const auto [next, st] = rothe_step(prev, tau, p, cfg, disc);

  // Plain projected descent with a fixed step far below the stability limit.
  const StepObjective J(prev, tau, p, disc);
  State x = prev;
  const auto w = prev.grid.weights();
  const double step = 5e-6;
  for (int it = 0; it < 1000000; ++it) {
    const auto v = J(x);
    if (metric_norm(v.gradient, w) < 1e-12) break;
    for (std::size_t i = 0; i < 8; ++i) {
      x.director.values[i] = normalized(x.director.values[i] - v.gradient.d_director[i] * step);
      x.psi.values[i] -= 2.0 * step * v.gradient.d_psi[i];
    }
  }
  const double oracle_after = evaluate_energy(x, disc, p).breakdown.total;
  CHECK(std::abs(st.energy_after - oracle_after) <= 1e-8);
}

TEST_CASE("an equilibrium does not move") {
  const PhysicalParams p = gentle_params();
  const State eq = small_relaxed_state(p, 33, 1e-10);
  FlowConfig cfg;
  cfg.inner_tol = 1e-8;
  cfg.tau = 1e-2;
  cfg.T = 0.05;
  cfg.n_nodes = 33;
  const auto [next, st] = rothe_step(eq, cfg.tau, p, cfg);
  CHECK(l2_distance(next, eq) <= cfg.tau * cfg.inner_tol);

  const auto flow = run_flow(eq, p, cfg);
  CHECK(flow.check.ok);
  const double f0 = flow.ledger.initial_energy;
  for (const auto& s : flow.ledger.steps) {
    CHECK(s.movement_n + s.movement_psi <= 1e-12);
    CHECK(std::abs(s.energy_after - f0) <= 1e-12 * std::abs(f0));
  }
}

TEST_CASE("short relaxation keeps every invariant") {
  PhysicalParams base;
  base.q = 10.0;
  const ValidatedParams p = validate(base);
  const State s0 = build_initial_state(p, make_grid(1.0, 65));
  FlowConfig cfg;
  cfg.tau = 1e-3;
  cfg.T = 0.0195;
  cfg.n_nodes = 65;
  double worst_defect = 0.0;
  bool pins = true;
  FlowOptions opt;
  opt.snapshot_every = 5;
  opt.observer = [&](const State& s, const StepStats&) {
    worst_defect = std::max(worst_defect, s.director.max_unit_defect());
    pins = pins && s.psi.values.front() == s0.psi.values.front() && s.psi.values.back() == s0.psi.values.back();
  };
  const auto r = run_flow(s0, p, cfg, opt);
  CHECK(r.check.ok);
  CHECK(r.ledger.steps.size() == 20);
  CHECK(worst_defect <= 1e-12);
  CHECK(pins);
  CHECK(r.final_state.t == doctest::Approx(0.02));
  REQUIRE(r.snapshots.size() == 5);
  CHECK(r.snapshots.front().m == 0);
  CHECK(r.snapshots.back().m == 20);
  CHECK(r.snapshots[1].m == 5);
  for (const auto& st : r.ledger.steps) CHECK(st.energy_after <= r.ledger.initial_energy);
}

TEST_CASE("runs are deterministic across execution modes") {
  omp_set_num_threads(3);
  PhysicalParams base;
  base.q = 10.0;
  base.E_field = 0.5;
  const ValidatedParams p = validate(base);
  const State s0 = build_initial_state(p, make_grid(1.0, 49));
  FlowConfig cfg;
  cfg.tau = 1e-3;
  cfg.T = 0.0045;
  FlowOptions serial;
  FlowOptions parallel;
  parallel.exec = Exec::parallel;
  const auto a = run_flow(s0, p, cfg, serial);
  const auto b = run_flow(s0, p, cfg, serial);
  const auto c = run_flow(s0, p, cfg, parallel);
  REQUIRE(a.ledger.steps.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    for (const auto* other : {&b, &c}) {
      const auto& x = a.ledger.steps[k];
      const auto& y = other->ledger.steps[k];
      CHECK(x.energy_after == y.energy_after);
      CHECK(x.movement_n == y.movement_n);
      CHECK(x.movement_psi == y.movement_psi);
      CHECK(x.inner_iters == y.inner_iters);
    }
  }
}

TEST_CASE("ledger checks") {
  DissipationLedger ok;
  ok.initial_energy = 10.0;
  ok.record({1, 0.1, 0.0, 3, 10.0, 9.0, 0.5, 0.5, 0.0, 0.0});
  ok.record({2, 0.2, 0.0, 3, 9.0, 8.5, 0.25, 0.25, 0.0, 0.0});
  CHECK(check_ledger(ok).ok);
  CHECK(ok.cumulative_movement == 1.5);

  DissipationLedger bad = ok;
  bad.record({3, 0.3, 0.0, 3, 8.5, 8.4, 0.1, 0.1, 0.0, -0.1});
  const auto c = check_ledger(bad);
  CHECK_FALSE(c.ok);
  REQUIRE(c.first_violation.has_value());
  CHECK(*c.first_violation == 3);
  CHECK_FALSE(c.message.empty());

  // A field switch starts a new segment anchored at the energy entering it.
  DissipationLedger sw = ok;
  sw.record({3, 0.3, -1.0, 3, 12.0, 11.0, 0.5, 0.5, 0.0, 0.0});
  CHECK(check_ledger(sw).ok);
  DissipationLedger no_switch = sw;
  no_switch.steps.back().field = 0.0;
  CHECK_FALSE(check_ledger(no_switch).ok);
}

TEST_CASE("inconsistent objective stalls the line search") {
  const State s = random_state(make_grid(1.0, 17), 3);
  const Objective liar = [](const State& x) {
    ObjectiveValue out;
    out.value = 1.0;
    for (const auto& z : x.psi.values) out.value += std::norm(z);
    out.magnitude = 0.0;  // claims exact values, so no roundoff allowance applies
    out.gradient.d_director.assign(x.grid.size(), Vec3{});
    out.gradient.d_psi.assign(x.grid.size(), Complex{});
    for (std::size_t i = 1; i + 1 < x.grid.size(); ++i) out.gradient.d_psi[i] = -x.psi.values[i];
    return out;
  };
  InnerOptions o;
  try {
    (void)inner_minimize(liar, s, o);
    FAIL("expected LineSearchStalled");
  } catch (const LineSearchStalled& e) {
    CHECK(e.kind() == ErrorKind::LineSearchStalled);
    CHECK(e.state().grid.size() == 17);
  }
}

TEST_CASE("tolerances below rounding resolution end at the floor") {
  PhysicalParams p;
  p.q = 25.0;
  const ValidatedParams vp = validate(p);
  const State s0 = build_initial_state(vp, make_grid(p.L, 129));
  const Discretization disc(s0.grid);
  const StepObjective objective(s0, 1e-3, p, disc);
  InnerOptions o;
  o.tol = 1e-14;
  o.initial_step = 1e-3;
  const InnerResult r = inner_minimize(std::cref(objective), s0, o);
  CHECK_FALSE(r.converged);
  CHECK(r.at_resolution_floor);
  CHECK(r.grad_norm > o.tol);
  CHECK(r.grad_norm < 1e-6);
  CHECK(r.iterations < o.max_iters);
  // Below the value's roundoff, acceptance rests on the slope estimate, so raw values may tie or wobble by ulps.
  double worst_rise = 0.0;
  for (std::size_t k = 1; k < r.history.size(); ++k) worst_rise = std::max(worst_rise, r.history[k] - r.history[k - 1]);
  CHECK(worst_rise <= 64.0 * std::numeric_limits<double>::epsilon() * std::abs(r.history.front()));
  CHECK(r.history.back() < r.history.front());
}
