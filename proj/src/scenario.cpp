#include "chevron/scenario.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include "json.hpp"

#include "chevron/error.hpp"

namespace chevron {

namespace {

std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform in [-1, 1), identical on every platform.
double symmetric_uniform(std::uint64_t& state) {
  return static_cast<double>(splitmix(state) >> 11) * 0x1.0p-52 - 1.0;
}

// Keyed on the swept value, not its position, so reordering a sweep reproduces each run.
std::uint64_t element_seed(std::uint64_t seed, double value) {
  std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (std::bit_cast<std::uint64_t>(value) | 1ULL));
  return splitmix(s);
}

// Shortest round-trip spelling, so distinct values never share a directory.
std::string value_tag(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

double min_of(const std::vector<double>& v) {
  double m = INFINITY;
  for (double x : v) m = std::min(m, x);
  return m;
}

std::vector<std::filesystem::path> write_run(const RunOutcome& run, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  const auto& a = run.artifacts;
  write_ledger_csv(dir / "ledger.csv", a.ledger);
  write_energy_csv(dir / "energy.csv", a.snapshot_times, a.snapshot_energies);
  write_diagnostics_csv(dir / "diagnostics.csv", a.diagnostics);
  files.insert(files.end(), {dir / "ledger.csv", dir / "energy.csv", dir / "diagnostics.csv"});

  std::string series = "t,sup_ratio,min_modulus,state_label\n";
  char buf[128];
  for (std::size_t k = 0; k < run.series.t.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,", run.series.t[k], run.series.sup_ratio[k],
                  run.series.min_modulus[k]);
    series += buf;
    series += to_string(run.series.label[k]);
    series += '\n';
  }
  write_text(dir / "series.csv", series);
  files.push_back(dir / "series.csv");

  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    std::snprintf(buf, sizeof buf, "field_m%06zu.csv", a.snapshot_steps[k]);
    write_field_csv(dir / "snapshots" / buf, a.snapshots[k]);
    files.push_back(dir / "snapshots" / buf);
  }
  if (!a.snapshots.empty()) {
    const auto plots = emit_plots(a, dir / "plots");
    files.insert(files.end(), plots.begin(), plots.end());
  }
  return files;
}

nlohmann::json run_summary(const RunOutcome& run) {
  nlohmann::json j;
  const auto& a = run.artifacts;
  j["name"] = run.name;
  j["sweep_value"] = run.sweep_value;
  j["n_nodes"] = run.n_nodes;
  j["completed"] = run.completed;
  j["error"] = run.error;
  j["steps"] = a.ledger.steps.size();
  j["initial_energy"] = a.ledger.initial_energy;
  j["final_energy"] = a.ledger.steps.empty() ? a.ledger.initial_energy : a.ledger.steps.back().energy_after;
  j["ledger_ok"] = a.check.ok;
  j["ledger_message"] = a.check.message;
  j["max_sup_ratio"] = max_of(run.series.sup_ratio);
  j["min_modulus_over_time"] = run.series.min_modulus.empty() ? 1.0 : min_of(run.series.min_modulus);
  std::vector<std::string> labels;
  for (auto l : label_transitions(run.series.label)) labels.emplace_back(to_string(l));
  j["state_label_transitions"] = labels;
  return j;
}

}  // namespace

std::vector<StateLabel> label_transitions(const std::vector<StateLabel>& labels) {
  std::vector<StateLabel> out;
  for (auto l : labels) {
    if (out.empty() || out.back() != l) out.push_back(l);
  }
  return out;
}

double applied_field(const Scenario& s, double t) {
  if (s.kind == ScenarioKind::switch_field && t > s.switch_time) return -s.params.E_field;
  return s.params.E_field;
}

State make_initial_state(const Scenario& s, const ValidatedParams& params, std::size_t n_nodes,
                         std::uint64_t seed) {
  State state;
  if (s.initial_state.empty()) {
    state = build_initial_state(params, make_grid(params->L, n_nodes));
  } else {
    state = read_field_csv(s.initial_state);
    if (std::abs(state.grid.half_width() - params->L) > 1e-9 * params->L) {
      throw Error(ErrorKind::ValidationError, "initial_state spans a different interval than L");
    }
    pin_boundary_from_values(state.psi, params);
  }
  if (s.perturbation > 0.0) {
    std::uint64_t rng = seed;
    for (std::size_t i = 1; i + 1 < state.grid.size(); ++i) {
      const double re = symmetric_uniform(rng);
      const double im = symmetric_uniform(rng);
      state.psi.values[i] += s.perturbation * Complex(re, im);
    }
  }
  return state;
}

RunOutcome simulate(const Scenario& s, const PhysicalParams& params, std::size_t n_nodes, std::uint64_t seed,
                    Exec exec) {
  RunOutcome run;
  run.n_nodes = n_nodes;
  const ValidatedParams vp = validate(params);
  const State initial = make_initial_state(s, vp, n_nodes, seed);
  run.n_nodes = initial.grid.size();

  FlowConfig cfg = s.flow;
  cfg.n_nodes = initial.grid.size();
  FlowOptions opt;
  opt.exec = exec;
  opt.snapshot_every = s.snapshot_every;
  if (s.kind == ScenarioKind::switch_field) opt.field = [&s](double t) { return applied_field(s, t); };

  auto monitor = [&](const State& st) {
    const auto d = diagnose(st, params, s.melt_threshold);
    run.series.t.push_back(st.t);
    run.series.sup_ratio.push_back(d.sup_ratio);
    run.series.min_modulus.push_back(d.min_modulus);
    run.series.label.push_back(d.state_label);
  };
  monitor(initial);
  opt.observer = [&](const State& st, const StepStats&) { monitor(st); };

  auto collect = [&](const FlowResult& r) {
    auto& a = run.artifacts;
    a.ledger = r.ledger;
    a.check = r.check;
    for (const auto& snap : r.snapshots) {
      a.snapshot_steps.push_back(snap.m);
      a.snapshot_times.push_back(snap.state.t);
      a.snapshot_energies.push_back(snap.energy);
      a.diagnostics.push_back(diagnose(snap.state, params, s.melt_threshold));
      a.snapshots.push_back(snap.state);
    }
    run.final_state = r.final_state;
  };
  try {
    collect(run_flow(initial, params, cfg, opt));
    run.completed = true;
  } catch (const FlowInterrupted& e) {
    collect(e.partial());
    run.error = e.what();
  } catch (const Error& e) {
    run.error = e.what();
  }
  return run;
}

ScenarioResult run_scenario(const Scenario& s) {
  validate(s);
  ScenarioResult result;
  const std::filesystem::path out = s.output_dir;
  nlohmann::json summary;
  summary["kind"] = std::string(to_string(s.kind));

  const bool sweep = s.kind == ScenarioKind::q_sweep || s.kind == ScenarioKind::rho_sweep;
  if (!sweep) {
    const Exec exec = omp_get_max_threads() > 1 ? Exec::parallel : Exec::serial;
    RunOutcome run = simulate(s, s.params, s.flow.n_nodes, element_seed(s.seed, 0.0), exec);
    run.name = "run";
    result.runs.push_back(std::move(run));
  } else {
    const std::size_t count = s.sweep_values.size();
    result.runs.resize(count);
    const auto n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < n; ++k) {
      const double v = s.sweep_values[k];
      PhysicalParams p = s.params;
      RunOutcome run;
      try {
        std::size_t nodes = s.flow.n_nodes;
        if (s.kind == ScenarioKind::q_sweep) {
          p.q = v;
          nodes = resolved_node_count(p.L, v, s.sweep_max_hq, s.flow.n_nodes);
        } else {
          p.rho = v;
        }
        run = simulate(s, p, nodes, element_seed(s.seed, v), Exec::serial);
      } catch (const std::exception& e) {
        run.error = e.what();
      }
      run.sweep_value = v;
      run.name = std::string(s.kind == ScenarioKind::q_sweep ? "q_" : "rho_") + value_tag(v);
      result.runs[k] = std::move(run);
    }
  }

  for (const auto& run : result.runs) {
    const auto dir = sweep ? out / run.name : out;
    const auto files = write_run(run, dir);
    result.files.insert(result.files.end(), files.begin(), files.end());
    summary["runs"].push_back(run_summary(run));
  }

  if (s.kind == ScenarioKind::q_sweep) {
    std::vector<RatioSeries> series;
    std::vector<double> completed_q;
    for (const auto& run : result.runs) {
      if (!run.completed) continue;
      series.push_back({run.sweep_value, run.series.sup_ratio});
      completed_q.push_back(run.sweep_value);
    }
    result.ratio = ratio_sweep(series);
    result.initial_energy = initial_energy_sweep(s.params, completed_q, s.flow.n_nodes, s.sweep_max_hq);
    std::string table = "q,n_nodes,initial_energy,max_sup_ratio\n";
    char buf[160];
    for (std::size_t k = 0; k < result.ratio->q.size(); ++k) {
      const auto& row = *std::find_if(result.initial_energy.begin(), result.initial_energy.end(),
                                      [&](const EnergySweepRow& r) { return r.q == result.ratio->q[k]; });
      std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g\n", row.q, row.n_nodes, row.energy.total,
                    result.ratio->max_ratio[k]);
      table += buf;
    }
    write_text(out / "q_sweep.csv", table);
    result.files.push_back(out / "q_sweep.csv");
    std::vector<double> qs, f;
    for (const auto& r : result.initial_energy) {
      qs.push_back(r.q);
      f.push_back(r.energy.total);
    }
    const auto energy_slope = loglog_slope(qs, f);
    summary["ratio_slope"] = result.ratio->slope ? nlohmann::json(*result.ratio->slope) : nlohmann::json();
    summary["initial_energy_slope"] = energy_slope ? nlohmann::json(*energy_slope) : nlohmann::json();
  } else if (s.kind == ScenarioKind::rho_sweep) {
    std::vector<State> finals;
    std::vector<double> rhos;
    for (const auto& run : result.runs) {
      if (!run.completed) continue;
      finals.push_back(run.final_state);
      rhos.push_back(run.sweep_value);
    }
    result.rho_distances = rho_cauchy_check(finals, rhos);
    std::string table = "rho_a,rho_b,director_h1,psi_h2,total\n";
    char buf[160];
    bool decreasing = true;
    for (std::size_t k = 0; k < result.rho_distances.size(); ++k) {
      const auto& d = result.rho_distances[k];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", d.rho_a, d.rho_b, d.director_h1, d.psi_h2,
                    d.total());
      table += buf;
      if (k > 0 && !(d.total() < result.rho_distances[k - 1].total())) decreasing = false;
    }
    write_text(out / "rho_sweep.csv", table);
    result.files.push_back(out / "rho_sweep.csv");
    summary["rho_distances_strictly_decreasing"] = decreasing;
  }

  bool any_error = false, any_violation = false;
  for (const auto& run : result.runs) {
    any_error = any_error || !run.completed;
    any_violation = any_violation || !run.artifacts.check.ok;
  }
  result.exit_code = any_error ? 1 : any_violation ? 2 : 0;
  summary["exit_code"] = result.exit_code;
  write_text(out / "config.txt", serialize_config(s));
  write_text(out / "summary.json", summary.dump(2) + "\n");
  result.files.push_back(out / "config.txt");
  result.files.push_back(out / "summary.json");
  return result;
}

}  // namespace chevron
