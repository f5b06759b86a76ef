#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chevron/config.hpp"
#include "chevron/error.hpp"
#include "chevron/scenario.hpp"
#include "doctest.h"

using namespace chevron;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("chevron_io_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

Scenario tiny(ScenarioKind kind, const fs::path& out) {
  Scenario s = parse_config("q = 10\nn_nodes = 33\ntau = 1e-3\nT = 0.0045\nsnapshot_every = 2\n");
  s.kind = kind;
  s.output_dir = out.string();
  return s;
}

void check_ledger_file(const fs::path& p, double initial_energy) {
  const auto rows = lines_of(p);
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0] == "m,t,energy_before,energy_after,movement_n,movement_psi,dissipation_residual,inner_iters,grad_norm_final");
  DissipationLedger ledger;
  ledger.initial_energy = initial_energy;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    std::istringstream row(rows[k]);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    REQUIRE(v.size() == 9);
    StepStats st;
    st.m = static_cast<std::size_t>(v[0]);
    st.t = v[1];
    st.energy_before = v[2];
    st.energy_after = v[3];
    st.movement_n = v[4];
    st.movement_psi = v[5];
    st.dissipation_residual = v[6];
    ledger.record(st);
  }
  CHECK(check_ledger(ledger).ok);
}

}  // namespace

TEST_CASE("empty config gives the preset") {
  const Scenario s = parse_config("# nothing but a comment\n\n");
  const PhysicalParams preset;
  for (const auto& f : physical_fields()) CHECK(s.params.*f.member == preset.*f.member);
  CHECK(s.kind == ScenarioKind::relax);
  CHECK(s.flow.n_nodes == 257);
  CHECK(s.melt_threshold == 0.25);
}

TEST_CASE("unknown key names its line") {
  try {
    (void)parse_config("q = 50\n# tilt\nthetta = 0.4\n");
    FAIL("expected ParseError");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("thetta") != std::string::npos);
  }
  try {
    (void)parse_config("q = fifty\n");
    FAIL("expected ParseError");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(e.line() == 1);
  }
  CHECK_THROWS_AS(parse_config("just words\n"), ConfigError);
}

TEST_CASE("out-of-range values name their field") {
  auto field_of = [](const std::string& text) {
    try {
      (void)parse_config(text);
    } catch (const ConfigError& e) {
      CHECK(e.kind() == ErrorKind::ValidationError);
      return e.field();
    }
    return std::string("<accepted>");
  };
  CHECK(field_of("rho = 1.5\n") == "rho");
  CHECK(field_of("a_perp = -1\n") == "a_perp");
  CHECK(field_of("theta = 0.1\n") == "theta");
  CHECK(field_of("tau = 0\n") == "tau");
  CHECK(field_of("n_nodes = 8\n") == "n_nodes");
  CHECK(field_of("melt_threshold = 1\n") == "melt_threshold");
  CHECK(field_of("kind = switch\nswitch_time = 0.5\nT = 0.2\n") == "switch_time");
  CHECK(field_of("kind = q_sweep\n") == "sweep_values");
  CHECK(field_of("kind = rho_sweep\nsweep_values = 0.1, 1.2\n") == "sweep_values");
  CHECK(field_of("kind = q_sweep\nsweep_values = 25, 50, 25\n") == "sweep_values");
  CHECK(field_of("kind = switch\nswitch_time = 0.05\n") == "<accepted>");
}

TEST_CASE("config round trip") {
  const std::string text =
      "kind = rho_sweep\nq = 37.5\nb = 0.123456789012345\ntheta = 0.61\nE_field = -2.5\nrho = 0.004\n"
      "tau = 0.0005\nT = 0.01\nn_steps = 25\ninner_tol = 1e-9\ninner_max_iters = 777\nn_nodes = 99\n"
      "sweep_values = 0.01, 0.001,1e-4\noutput_dir = some/dir\nsnapshot_every = 3\nmelt_threshold = 0.3\n"
      "perturbation = 0.01\nseed = 42\nsweep_max_hq = 0.5\n";
  const Scenario a = parse_config(text);
  const Scenario b = parse_config(serialize_config(a));
  CHECK(serialize_config(b) == serialize_config(a));
  for (const auto& f : physical_fields()) CHECK(a.params.*f.member == b.params.*f.member);
  CHECK(a.flow.n_steps == 25);
  CHECK(b.flow.n_steps == 25);
  CHECK(b.flow.inner_max_iters == 777);
  CHECK(b.sweep_values == std::vector<double>{0.01, 0.001, 1e-4});
  CHECK(b.output_dir == "some/dir");
  CHECK(b.seed == 42);
  CHECK(b.kind == ScenarioKind::rho_sweep);
  CHECK(b.sweep_max_hq == 0.5);
}

TEST_CASE("load_config reads files") {
  const fs::path dir = scratch("load");
  fs::create_directories(dir);
  write_text(dir / "c.cfg", "q = 20 # inline comment\n");
  CHECK(load_config(dir / "c.cfg").params.q == 20.0);
  CHECK_THROWS_AS(load_config(dir / "missing.cfg"), Error);
}

TEST_CASE("field snapshots reload exactly") {
  const fs::path dir = scratch("field");
  const ValidatedParams p = validate(PhysicalParams{});
  State s = build_initial_state(p, make_grid(1.0, 40));
  s.psi.values[5] = Complex(0.1234567890123, -0.98765432109876);
  write_field_csv(dir / "f.csv", s);
  const State r = read_field_csv(dir / "f.csv");
  REQUIRE(r.grid == s.grid);
  for (std::size_t i = 0; i < 40; ++i) {
    CHECK(r.psi.values[i] == s.psi.values[i]);
    CHECK(norm(r.director.values[i] - s.director.values[i]) <= 1e-16);
  }
  CHECK(lines_of(dir / "f.csv")[0] == "x,n1,n2,n3,re_psi,im_psi,abs_psi");

  write_text(dir / "bad.csv", "x,n1,n2,n3,re_psi,im_psi,abs_psi\n-1,0,0,1,1,0,1\n0,0,0,1,oops,0,1\n");
  try {
    (void)read_field_csv(dir / "bad.csv");
    FAIL("expected ParseError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("table writers") {
  const fs::path dir = scratch("tables");
  DiagnosticsRecord with{0.5, 0.3, 0.1, 0.25, MeltInterval{-0.2, 0.1}, {}, 0.0, StateLabel::mixed, 1e-3};
  DiagnosticsRecord without;
  write_diagnostics_csv(dir / "d.csv", {with, without});
  const auto rows = lines_of(dir / "d.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "t,sup_ratio,min_modulus,melt_lo,melt_hi,tip_x,state_label,natural_bc_residual");
  CHECK(rows[1].find(",MIXED,") != std::string::npos);
  CHECK(rows[2].find(",,,,UP,") == std::string::npos);
  CHECK(rows[2].find(",,,MIXED,") != std::string::npos);

  EnergyBreakdown e;
  e.total = 1.5;
  write_energy_csv(dir / "e.csv", {0.0, 0.1}, {e, e});
  const auto erows = lines_of(dir / "e.csv");
  REQUIRE(erows.size() == 3);
  CHECK(erows[0] == "t,perp,par,cpar,penal,reg,nematic,electro,total");
  CHECK_THROWS_AS(write_text("/proc/definitely/not/writable.txt", "x"), Error);
}

TEST_CASE("plots") {
  RunArtifacts empty;
  try {
    (void)emit_plots(empty, scratch("noplot"));
    FAIL("expected MissingArtifact");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingArtifact);
  }

  const ValidatedParams p = validate(PhysicalParams{});
  RunArtifacts one;
  one.snapshots.push_back(build_initial_state(p, make_grid(1.0, 65)));
  one.snapshot_steps.push_back(0);
  one.snapshot_times.push_back(0.0);
  one.snapshot_energies.push_back(energy_breakdown(one.snapshots[0], p));
  one.diagnostics.push_back(diagnose(one.snapshots[0], p));
  const auto files = emit_plots(one, scratch("oneplot"));
  CHECK(files.size() == 4);
  for (const auto& f : files) {
    const auto text = slurp(f);
    CHECK(text.rfind("<svg", 0) == 0);
    CHECK(text.find("</svg>") != std::string::npos);
    CHECK(text.find("nan") == std::string::npos);
  }
}

TEST_CASE("plots are byte-identical to the golden files") {
  Scenario s = tiny(ScenarioKind::relax, scratch("golden"));
  s.perturbation = 0.02;
  s.seed = 7;
  const auto r = run_scenario(s);
  REQUIRE(r.exit_code == 0);
  const fs::path golden = fs::path(CHEVRON_TEST_DATA) / "golden";
  const bool update = std::getenv("CHEVRON_UPDATE_GOLDEN") != nullptr;
  for (const char* name : {"energy.svg", "min_modulus.svg", "tilt_profiles.svg", "n3_profiles.svg"}) {
    const auto produced = slurp(fs::path(s.output_dir) / "plots" / name);
    if (update) write_text(golden / name, produced);
    CHECK_MESSAGE(produced == slurp(golden / name), name);
  }
  // A second run reproduces the same bytes.
  Scenario again = s;
  again.output_dir = scratch("golden2").string();
  (void)run_scenario(again);
  CHECK(slurp(fs::path(again.output_dir) / "plots/tilt_profiles.svg") ==
        slurp(fs::path(s.output_dir) / "plots/tilt_profiles.svg"));
}

TEST_CASE("relax scenario writes a valid ledger") {
  const Scenario s = tiny(ScenarioKind::relax, scratch("relax"));
  const auto r = run_scenario(s);
  CHECK(r.exit_code == 0);
  REQUIRE(r.runs.size() == 1);
  const fs::path out = s.output_dir;
  for (const char* f : {"ledger.csv", "energy.csv", "diagnostics.csv", "series.csv", "summary.json", "config.txt",
                        "snapshots/field_m000000.csv", "snapshots/field_m000005.csv"}) {
    CHECK_MESSAGE(fs::exists(out / f), f);
  }
  check_ledger_file(out / "ledger.csv", r.runs[0].artifacts.ledger.initial_energy);
  CHECK(lines_of(out / "diagnostics.csv").size() == 1 + r.runs[0].artifacts.snapshots.size());
  CHECK(parse_config(slurp(out / "config.txt")).flow.n_nodes == 33);
}

TEST_CASE("switch scenario reverses the field") {
  Scenario s = tiny(ScenarioKind::switch_field, scratch("switch"));
  s.params.E_field = 3.0;
  s.switch_time = 0.002;
  CHECK(applied_field(s, 0.001) == 3.0);
  CHECK(applied_field(s, 0.002) == 3.0);
  CHECK(applied_field(s, 0.003) == -3.0);
  const auto r = run_scenario(s);
  CHECK(r.exit_code == 0);
  const auto& steps = r.runs[0].artifacts.ledger.steps;
  REQUIRE(steps.size() == 5);
  CHECK(steps[1].field == 3.0);
  CHECK(steps[2].field == -3.0);
  CHECK(r.runs[0].series.min_modulus.size() == 6);
  CHECK(lines_of(fs::path(s.output_dir) / "series.csv").size() == 7);
}

TEST_CASE("sweep results do not depend on the order of values") {
  Scenario a = tiny(ScenarioKind::q_sweep, scratch("qa"));
  a.sweep_values = {10.0, 14.0};
  a.sweep_max_hq = 1.0;
  a.perturbation = 0.01;
  Scenario b = a;
  b.output_dir = scratch("qb").string();
  b.sweep_values = {14.0, 10.0};
  const auto ra = run_scenario(a);
  const auto rb = run_scenario(b);
  CHECK(ra.exit_code == 0);
  CHECK(rb.exit_code == 0);
  REQUIRE(ra.ratio.has_value());
  CHECK(ra.ratio->slope.has_value());
  for (const auto& x : ra.runs) {
    for (const auto& y : rb.runs) {
      if (x.sweep_value != y.sweep_value) continue;
      CHECK(x.n_nodes == y.n_nodes);
      CHECK(x.artifacts.ledger.steps.back().energy_after == y.artifacts.ledger.steps.back().energy_after);
    }
  }
  CHECK(fs::exists(fs::path(a.output_dir) / "q_sweep.csv"));
  // Directories are named by value, so both orders produce the same tree.
  for (const char* d : {"q_10", "q_14"}) {
    CHECK(slurp(fs::path(a.output_dir) / d / "ledger.csv") == slurp(fs::path(b.output_dir) / d / "ledger.csv"));
  }
}

TEST_CASE("rho sweep reports the distance table") {
  Scenario s = tiny(ScenarioKind::rho_sweep, scratch("rho"));
  s.sweep_values = {1e-2, 1e-3};
  const auto r = run_scenario(s);
  CHECK(r.exit_code == 0);
  REQUIRE(r.rho_distances.size() == 1);
  CHECK(r.rho_distances[0].total() > 0.0);
  CHECK(lines_of(fs::path(s.output_dir) / "rho_sweep.csv").size() == 2);
}

TEST_CASE("initial state from a snapshot file") {
  const fs::path dir = scratch("init");
  Scenario s = tiny(ScenarioKind::relax, dir / "out");
  const ValidatedParams p = validate(s.params);
  const State built = make_initial_state(s, p, 33, 0);
  write_field_csv(dir / "start.csv", built);
  s.initial_state = (dir / "start.csv").string();
  const State loaded = make_initial_state(s, p, 33, 0);
  CHECK(std::abs(total_energy(loaded, p) - total_energy(built, p)) <= 1e-10 * std::abs(total_energy(built, p)));

  s.initial_state.clear();
  s.perturbation = 0.05;
  const State a = make_initial_state(s, p, 33, 11);
  const State b = make_initial_state(s, p, 33, 11);
  const State c = make_initial_state(s, p, 33, 12);
  CHECK(a.psi.values == b.psi.values);
  CHECK(a.psi.values != c.psi.values);
  CHECK(a.psi.values.front() == built.psi.values.front());
  CHECK(a.psi.values.back() == built.psi.values.back());
}

TEST_CASE("label transitions collapse repeats") {
  using L = StateLabel;
  const auto t = label_transitions({L::up, L::up, L::mixed, L::mixed, L::down, L::down, L::mixed});
  CHECK(t == std::vector<L>{L::up, L::mixed, L::down, L::mixed});
}

TEST_CASE("a failing sweep element does not stop its siblings") {
  Scenario s = tiny(ScenarioKind::q_sweep, scratch("qfail"));
  s.sweep_values = {10.0, 1e9};
  s.sweep_max_hq = 1.0;
  const auto r = run_scenario(s);
  CHECK(r.exit_code == 1);
  REQUIRE(r.runs.size() == 2);
  CHECK(r.runs[0].completed);
  CHECK(r.runs[0].error.empty());
  CHECK_FALSE(r.runs[1].completed);
  CHECK(r.runs[1].error.find("InvalidParameter") != std::string::npos);
  CHECK(fs::exists(fs::path(s.output_dir) / "q_10" / "ledger.csv"));
  CHECK(fs::exists(fs::path(s.output_dir) / "summary.json"));
}

TEST_CASE("shipped scenario files load") {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(CHEVRON_TEST_DATA) / ".." / ".." / "configs")) {
    if (entry.path().extension() != ".cfg") continue;
    CHECK_NOTHROW((void)load_config(entry.path()));
    ++count;
  }
  CHECK(count == 4);
}
