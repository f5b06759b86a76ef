#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "chevron/error.hpp"
#include "chevron/io.hpp"

namespace chevron {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

struct Series {
  std::string label;
  std::vector<double> x, y;
};

std::string num(const char* fmt, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

std::pair<double, double> padded_range(double lo, double hi) {
  if (!(lo <= hi)) return {0.0, 1.0};
  if (hi - lo <= 1e-12 * std::max(std::abs(lo), std::abs(hi))) {
    const double pad = std::max(std::abs(lo) * 0.05, 1e-12);
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::string line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  std::tie(xlo, xhi) = padded_range(xlo, xhi);
  std::tie(ylo, yhi) = padded_range(ylo, yhi);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xlo) / (xhi - xlo) * pw; };
  auto py = [&](double y) { return kTop + (yhi - y) / (yhi - ylo) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  svg += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         escape(title) + "</text>\n";
  svg += "<rect x=\"" + num("%.2f", kLeft) + "\" y=\"" + num("%.2f", kTop) + "\" width=\"" + num("%.2f", pw) +
         "\" height=\"" + num("%.2f", ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xlo + (xhi - xlo) * k / 4.0;
    const double yv = ylo + (yhi - ylo) * k / 4.0;
    svg += "<text x=\"" + num("%.2f", px(xv)) + "\" y=\"" + num("%.2f", kTop + ph + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + num("%.4g", xv) + "</text>\n";
    svg += "<text x=\"" + num("%.2f", kLeft - 6) + "\" y=\"" + num("%.2f", py(yv) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + num("%.4g", yv) + "</text>\n";
  }
  svg += "<text x=\"" + num("%.2f", kLeft + pw / 2) + "\" y=\"392\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         escape(xlabel) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + num("%.2f", kTop + ph / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
         num("%.2f", kTop + ph / 2) + ")\">" + escape(ylabel) + "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!first) svg += ' ';
      svg += num("%.2f", px(s.x[i])) + "," + num("%.2f", py(s.y[i]));
      first = false;
    }
    svg += "\"/>\n";
    if (!s.label.empty()) {
      const double ly = kTop + 14 + 14 * static_cast<double>(k);
      svg += "<text x=\"" + num("%.2f", kLeft + pw - 8) + "\" y=\"" + num("%.2f", ly) + "\" text-anchor=\"end\" fill=\"" +
             color + "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(s.label) + "</text>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

// Up to five snapshot indices, evenly spread and always including the last.
std::vector<std::size_t> selected(std::size_t count) {
  std::vector<std::size_t> out;
  const std::size_t k = std::min<std::size_t>(count, 5);
  for (std::size_t j = 0; j < k; ++j) {
    out.push_back(k == 1 ? count - 1 : j * (count - 1) / (k - 1));
  }
  return out;
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const RunArtifacts& run, const std::filesystem::path& dir) {
  if (run.snapshots.empty() || run.diagnostics.size() != run.snapshots.size() ||
      run.snapshot_energies.size() != run.snapshots.size()) {
    throw Error(ErrorKind::MissingArtifact, "plots need at least one snapshot with energies and diagnostics");
  }
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& svg) {
    const auto path = dir / name;
    write_text(path, svg);
    written.push_back(path);
  };

  Series energy{"", run.snapshot_times, {}};
  Series modulus{"", run.snapshot_times, {}};
  for (const auto& e : run.snapshot_energies) energy.y.push_back(e.total);
  for (const auto& d : run.diagnostics) modulus.y.push_back(d.min_modulus);
  emit("energy.svg", line_plot("Free energy", "t", "F", {energy}));
  emit("min_modulus.svg", line_plot("Minimum order-parameter modulus", "t", "min |psi|", {modulus}));

  std::vector<Series> tilt, n3;
  for (std::size_t k : selected(run.snapshots.size())) {
    const State& s = run.snapshots[k];
    const std::string label = "t = " + num("%.4g", run.snapshot_times[k]);
    const auto x = s.grid.nodes();
    tilt.push_back({label, x, run.diagnostics[k].tilt_profile});
    Series c{label, x, {}};
    for (const auto& n : s.director.values) c.y.push_back(n.z);
    n3.push_back(std::move(c));
  }
  emit("tilt_profiles.svg", line_plot("Layer tilt", "x", "tilt", tilt));
  emit("n3_profiles.svg", line_plot("Out-of-plane director component", "x", "n3", n3));
  return written;
}

}  // namespace chevron
