// chevron: run relaxation, field-switching and sweep scenarios.
//
// Exit status: 0 when every run finished and passed the dissipation check,
// 2 when a run finished with a ledger violation (files are still written),
// 1 on any error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chevron/config.hpp"
#include "chevron/error.hpp"
#include "chevron/scenario.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> snapshot_every;
  std::vector<std::string> settings;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "key = value scenario file")->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--seed", o.seed, "seed for initial perturbations");
  sub->add_option("--snapshot-every", o.snapshot_every, "keep every K-th step as a snapshot");
  sub->add_option("--set", o.settings, "override one config entry, key=value (repeatable)");
}

int run(chevron::ScenarioKind kind, const Options& o) {
  using namespace chevron;
  Scenario s = o.config.empty() ? parse_config("") : load_config(o.config);
  s.kind = kind;
  for (const auto& kv : o.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError(ErrorKind::ParseError, 0, kv, "--set expects key=value");
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t");
      const auto e = v.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    apply_setting(s, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  if (o.out) s.output_dir = *o.out;
  if (o.seed) s.seed = *o.seed;
  if (o.snapshot_every) s.snapshot_every = *o.snapshot_every;
  validate(s);

  const ScenarioResult r = run_scenario(s);
  for (const auto& run : r.runs) {
    const auto& a = run.artifacts;
    std::printf("%-24s steps=%zu  F0=%.10g  F=%.10g  ledger=%s%s%s\n", run.name.c_str(), a.ledger.steps.size(),
                a.ledger.initial_energy,
                a.ledger.steps.empty() ? a.ledger.initial_energy : a.ledger.steps.back().energy_after,
                a.check.ok ? "ok" : "VIOLATED", run.error.empty() ? "" : "  error: ", run.error.c_str());
    if (!a.check.ok) std::printf("  %s\n", a.check.message.c_str());
  }
  if (r.ratio && r.ratio->slope) std::printf("sup-ratio log-log slope vs q: %.4f\n", *r.ratio->slope);
  for (const auto& d : r.rho_distances) {
    std::printf("rho %g -> %g: H1(n) %.6g  H2(psi) %.6g\n", d.rho_a, d.rho_b, d.director_h1, d.psi_h2);
  }
  std::printf("wrote %zu files under %s\n", r.files.size(), s.output_dir.c_str());
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smectic-C chevron gradient-flow simulator"};
  app.require_subcommand(1);
  Options opts;
  struct Sub {
    const char* name;
    const char* help;
    chevron::ScenarioKind kind;
  };
  const Sub subs[] = {
      {"relax", "relax the well-prepared chevron at a fixed field", chevron::ScenarioKind::relax},
      {"switch", "apply +E, reverse it at switch_time, continue to T", chevron::ScenarioKind::switch_field},
      {"q-sweep", "independent relaxations over sweep_values as q", chevron::ScenarioKind::q_sweep},
      {"rho-sweep", "independent relaxations over sweep_values as rho", chevron::ScenarioKind::rho_sweep},
  };
  std::optional<chevron::ScenarioKind> chosen;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, opts);
    sub->callback([&chosen, kind = s.kind] { chosen = kind; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return run(*chosen, opts);
  } catch (const chevron::ConfigError& e) {
    std::cerr << "config error";
    if (e.line()) std::cerr << " (line " << e.line() << ")";
    if (!e.field().empty()) std::cerr << " [" << e.field() << "]";
    std::cerr << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
