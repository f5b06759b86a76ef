#include "chevron/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "chevron/error.hpp"

namespace chevron {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(std::size_t line, std::string_view key, const std::string& what) {
  std::string msg = line ? "line " + std::to_string(line) + ": " : std::string();
  throw ConfigError(ErrorKind::ParseError, line, std::string(key), msg + what);
}

double parse_real(std::string_view text, std::size_t line, std::string_view key) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    parse_fail(line, key, "expected a finite number for '" + std::string(key) + "', got '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_count(std::string_view text, std::size_t line, std::string_view key) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    parse_fail(line, key, "expected a non-negative integer for '" + std::string(key) + "', got '" + std::string(text) + "'");
  }
  return v;
}

std::vector<double> parse_list(std::string_view text, std::size_t line, std::string_view key) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (item.empty()) parse_fail(line, key, "empty entry in list '" + std::string(key) + "'");
    out.push_back(parse_real(item, line, key));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  throw ConfigError(ErrorKind::ValidationError, 0, field, field + ": " + what);
}

// Library validation messages start with the offending field name.
std::string leading_field(const std::string& message) {
  const auto colon = message.find(": ");
  const std::string body = colon == std::string::npos ? message : message.substr(colon + 2);
  return body.substr(0, body.find(' '));
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::relax: return "relax";
    case ScenarioKind::switch_field: return "switch";
    case ScenarioKind::q_sweep: return "q_sweep";
    case ScenarioKind::rho_sweep: return "rho_sweep";
  }
  return "relax";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view text) {
  if (text == "relax") return ScenarioKind::relax;
  if (text == "switch") return ScenarioKind::switch_field;
  if (text == "q_sweep" || text == "q-sweep") return ScenarioKind::q_sweep;
  if (text == "rho_sweep" || text == "rho-sweep") return ScenarioKind::rho_sweep;
  return std::nullopt;
}

void apply_setting(Scenario& s, std::string_view key, std::string_view value, std::size_t line) {
  for (const auto& f : physical_fields()) {
    if (f.name == key) {
      s.params.*f.member = parse_real(value, line, key);
      return;
    }
  }
  for (const auto& f : flow_fields()) {
    if (f.name != key) continue;
    if (f.kind == FlowField::Kind::real) {
      s.flow.*f.real_member = parse_real(value, line, key);
    } else {
      s.flow.*f.count_member = parse_count(value, line, key);
    }
    return;
  }
  if (key == "kind") {
    const auto k = parse_scenario_kind(value);
    if (!k) parse_fail(line, key, "unknown scenario kind '" + std::string(value) + "'");
    s.kind = *k;
  } else if (key == "switch_time") {
    s.switch_time = parse_real(value, line, key);
  } else if (key == "sweep_values") {
    s.sweep_values = parse_list(value, line, key);
  } else if (key == "sweep_max_hq") {
    s.sweep_max_hq = parse_real(value, line, key);
  } else if (key == "output_dir") {
    s.output_dir = std::string(value);
  } else if (key == "snapshot_every") {
    s.snapshot_every = parse_count(value, line, key);
  } else if (key == "melt_threshold") {
    s.melt_threshold = parse_real(value, line, key);
  } else if (key == "initial_state") {
    s.initial_state = std::string(value);
  } else if (key == "perturbation") {
    s.perturbation = parse_real(value, line, key);
  } else if (key == "seed") {
    s.seed = parse_count(value, line, key);
  } else {
    parse_fail(line, key, "unknown key '" + std::string(key) + "'");
  }
}

void validate(const Scenario& s) {
  try {
    (void)validate(s.params);
    validate(s.flow);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::RealizabilityViolated) invalid("theta", e.what());
    invalid(leading_field(e.what()), e.what());
  }
  if (!(s.melt_threshold > 0.0 && s.melt_threshold < 1.0)) invalid("melt_threshold", "must lie in (0, 1)");
  if (!(s.perturbation >= 0.0)) invalid("perturbation", "must be >= 0");
  if (s.output_dir.empty()) invalid("output_dir", "must not be empty");
  switch (s.kind) {
    case ScenarioKind::switch_field:
      if (!(s.switch_time > 0.0 && s.switch_time < s.flow.T)) invalid("switch_time", "must lie in (0, T)");
      break;
    case ScenarioKind::q_sweep:
      if (s.sweep_values.empty()) invalid("sweep_values", "q sweep needs at least one value");
      for (double q : s.sweep_values) {
        if (!(q >= 1.0)) invalid("sweep_values", "every q must be >= 1");
      }
      if (!(s.sweep_max_hq > 0.0)) invalid("sweep_max_hq", "must be > 0");
      break;
    case ScenarioKind::rho_sweep:
      if (s.sweep_values.empty()) invalid("sweep_values", "rho sweep needs at least one value");
      for (double r : s.sweep_values) {
        if (!(r >= 0.0 && r < 1.0)) invalid("sweep_values", "every rho must satisfy 0 <= rho < 1");
      }
      break;
    case ScenarioKind::relax:
      break;
  }
  if (!s.sweep_values.empty()) {
    std::vector<double> sorted = s.sweep_values;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      invalid("sweep_values", "values must be distinct");
    }
  }
}

Scenario parse_config(std::string_view text) {
  Scenario s;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) parse_fail(line_no, line, "expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) parse_fail(line_no, key, "missing key");
    apply_setting(s, key, value, line_no);
  }
  validate(s);
  return s;
}

Scenario load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const Scenario& s) {
  std::ostringstream out;
  out << "kind = " << to_string(s.kind) << '\n';
  for (const auto& f : physical_fields()) out << f.name << " = " << format_real(s.params.*f.member) << '\n';
  for (const auto& f : flow_fields()) {
    out << f.name << " = ";
    if (f.kind == FlowField::Kind::real) {
      out << format_real(s.flow.*f.real_member);
    } else {
      out << s.flow.*f.count_member;
    }
    out << '\n';
  }
  out << "switch_time = " << format_real(s.switch_time) << '\n';
  if (!s.sweep_values.empty()) {
    out << "sweep_values = ";
    for (std::size_t i = 0; i < s.sweep_values.size(); ++i) out << (i ? ", " : "") << format_real(s.sweep_values[i]);
    out << '\n';
  }
  out << "sweep_max_hq = " << format_real(s.sweep_max_hq) << '\n';
  out << "output_dir = " << s.output_dir << '\n';
  out << "snapshot_every = " << s.snapshot_every << '\n';
  out << "melt_threshold = " << format_real(s.melt_threshold) << '\n';
  if (!s.initial_state.empty()) out << "initial_state = " << s.initial_state << '\n';
  out << "perturbation = " << format_real(s.perturbation) << '\n';
  out << "seed = " << s.seed << '\n';
  return out.str();
}

}  // namespace chevron
