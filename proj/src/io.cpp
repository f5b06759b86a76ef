#include "chevron/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chevron/error.hpp"

namespace chevron {

namespace {

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_for_write(path);
  out << text;
  finish(out, path);
}

void write_field_csv(const std::filesystem::path& path, const State& s) {
  auto out = open_for_write(path);
  out << "x,n1,n2,n3,re_psi,im_psi,abs_psi\n";
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const Vec3& n = s.director.values[i];
    const Complex z = s.psi.values[i];
    out << real(s.grid.node(i)) << ',' << real(n.x) << ',' << real(n.y) << ',' << real(n.z) << ','
        << real(z.real()) << ',' << real(z.imag()) << ',' << real(std::abs(z)) << '\n';
  }
  finish(out, path);
}

State read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line.rfind("x,n1,n2,n3,re_psi,im_psi", 0) != 0) {
    throw ConfigError(ErrorKind::ParseError, 1, "header", "field snapshot header not recognized");
  }
  std::vector<double> x;
  std::vector<Vec3> n;
  std::vector<Complex> psi;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() < 6) throw ConfigError(ErrorKind::ParseError, line_no, "row", "expected at least 6 columns");
    double v[6];
    for (int k = 0; k < 6; ++k) {
      char* end = nullptr;
      v[k] = std::strtod(cells[k].c_str(), &end);
      if (end == cells[k].c_str() || !std::isfinite(v[k])) {
        throw ConfigError(ErrorKind::ParseError, line_no, "row", "non-numeric cell '" + cells[k] + "'");
      }
    }
    x.push_back(v[0]);
    n.push_back(Vec3{v[1], v[2], v[3]});
    psi.emplace_back(v[4], v[5]);
  }
  if (x.size() < 2) throw ConfigError(ErrorKind::ParseError, line_no, "rows", "need at least two rows");
  const double L = -x.front();
  if (!(L > 0.0) || std::abs(x.back() - L) > 1e-9 * L) {
    throw ConfigError(ErrorKind::ParseError, 0, "x", "x column must span a symmetric interval [-L, L]");
  }
  State s;
  s.grid = make_grid(L, x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x[i] - s.grid.node(i)) > 1e-9 * L) {
      throw ConfigError(ErrorKind::ParseError, i + 2, "x", "x column is not a uniform grid");
    }
  }
  s.director.values = std::move(n);
  s.director.renormalize();
  s.psi.values = std::move(psi);
  s.psi.pin_left = s.psi.values.front();
  s.psi.pin_right = s.psi.values.back();
  s.psi.slope_left = s.psi.slope_right = Complex{};
  return s;
}

void write_ledger_csv(const std::filesystem::path& path, const DissipationLedger& ledger) {
  auto out = open_for_write(path);
  out << "m,t,energy_before,energy_after,movement_n,movement_psi,dissipation_residual,inner_iters,grad_norm_final\n";
  for (const auto& s : ledger.steps) {
    out << s.m << ',' << real(s.t) << ',' << real(s.energy_before) << ',' << real(s.energy_after) << ','
        << real(s.movement_n) << ',' << real(s.movement_psi) << ',' << real(s.dissipation_residual) << ','
        << s.inner_iters << ',' << real(s.grad_norm_final) << '\n';
  }
  finish(out, path);
}

void write_energy_csv(const std::filesystem::path& path, const std::vector<double>& t,
                      const std::vector<EnergyBreakdown>& energies) {
  auto out = open_for_write(path);
  out << "t,perp,par,cpar,penal,reg,nematic,electro,total\n";
  for (std::size_t k = 0; k < energies.size(); ++k) {
    const auto& e = energies[k];
    out << real(t[k]) << ',' << real(e.perp) << ',' << real(e.par) << ',' << real(e.cpar) << ','
        << real(e.penalization) << ',' << real(e.regularizer) << ',' << real(e.nematic) << ','
        << real(e.electrostatic) << ',' << real(e.total) << '\n';
  }
  finish(out, path);
}

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records) {
  auto out = open_for_write(path);
  out << "t,sup_ratio,min_modulus,melt_lo,melt_hi,tip_x,state_label,natural_bc_residual\n";
  for (const auto& r : records) {
    out << real(r.t) << ',' << real(r.sup_ratio) << ',' << real(r.min_modulus) << ',';
    if (r.melt_interval) out << real(r.melt_interval->lo) << ',' << real(r.melt_interval->hi);
    else out << ',';
    out << ',';
    if (r.tip_x) out << real(*r.tip_x);
    out << ',' << to_string(r.state_label) << ',' << real(r.natural_bc_residual) << '\n';
  }
  finish(out, path);
}

}  // namespace chevron
