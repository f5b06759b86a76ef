#include "chevron/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chevron/error.hpp"
#include "chevron/initial_data.hpp"

namespace chevron {

std::string_view to_string(StateLabel label) {
  switch (label) {
    case StateLabel::up: return "UP";
    case StateLabel::down: return "DOWN";
    case StateLabel::mixed: return "MIXED";
  }
  return "MIXED";
}

StateLabel classify(const DirectorField& director) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& n : director.values) {
    lo = std::min(lo, n.z);
    hi = std::max(hi, n.z);
  }
  if (lo > 0.0) return StateLabel::up;
  if (hi < 0.0) return StateLabel::down;
  return StateLabel::mixed;
}

std::optional<double> zero_crossing_nearest_origin(std::span<const double> x, std::span<const double> v) {
  constexpr double zero = 1e-12;
  std::optional<double> best;
  std::optional<std::size_t> last;  // last index with a clearly signed value
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) <= zero) continue;
    if (last && (v[*last] > 0.0) != (v[i] > 0.0)) {
      const double x0 = x[*last], x1 = x[i];
      const double v0 = v[*last], v1 = v[i];
      const double root = x0 + (x1 - x0) * v0 / (v0 - v1);
      if (!best || std::abs(root) < std::abs(*best)) best = root;
    }
    last = i;
  }
  return best;
}

DiagnosticsRecord diagnose(const State& state, const PhysicalParams& params, double melt_threshold) {
  if (!(melt_threshold > 0.0 && melt_threshold < 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "melt_threshold must lie in (0, 1)");
  }
  const Discretization disc(state.grid);
  const auto d = psi_derivatives(state.psi, disc);
  const auto& psi = state.psi.values;
  const std::size_t n = psi.size();

  DiagnosticsRecord rec;
  rec.t = state.t;
  rec.melt_threshold = melt_threshold;
  rec.min_modulus = std::numeric_limits<double>::infinity();
  rec.tilt_profile.resize(n);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    rec.sup_ratio = std::max(rec.sup_ratio, std::abs(d.first[i]) / params.q);
    rec.min_modulus = std::min(rec.min_modulus, std::abs(psi[i]));
    s[i] = std::norm(psi[i]);
    rec.tilt_profile[i] =
        std::imag(std::conj(psi[i]) * d.first[i]) / (params.q * std::max(s[i], kTiltModulusFloor));
  }

  std::size_t best_len = 0, best_lo = 0, run = 0;
  for (std::size_t i = 0; i < n; ++i) {
    run = std::abs(psi[i]) < melt_threshold ? run + 1 : 0;
    if (run > best_len) {
      best_len = run;
      best_lo = i + 1 - run;
    }
  }
  if (best_len > 0) {
    rec.melt_interval = MeltInterval{state.grid.node(best_lo), state.grid.node(best_lo + best_len - 1)};
  }

  const auto x = state.grid.nodes();
  rec.tip_x = zero_crossing_nearest_origin(x, rec.tilt_profile);
  rec.state_label = classify(state.director);
  const auto s2 = disc.d2(std::span<const double>(s));
  rec.natural_bc_residual = std::max(std::abs(s2.front()), std::abs(s2.back()));
  return rec;
}

RatioSweep ratio_sweep(std::span<const RatioSeries> series) {
  RatioSweep out;
  for (const auto& s : series) {
    out.q.push_back(s.q);
    out.max_ratio.push_back(s.sup_ratios.empty() ? 0.0 : *std::max_element(s.sup_ratios.begin(), s.sup_ratios.end()));
  }
  out.slope = loglog_slope(out.q, out.max_ratio);
  return out;
}

RhoDistance state_distance(const State& a, const State& b) {
  if (!(a.grid == b.grid)) throw Error(ErrorKind::MismatchedGrids, "states live on different grids");
  const Discretization disc(a.grid);
  const std::size_t n = a.grid.size();
  std::vector<Vec3> dn(n);
  for (std::size_t i = 0; i < n; ++i) dn[i] = a.director.values[i] - b.director.values[i];
  const auto ddn = disc.d1(std::span<const Vec3>(dn));
  const auto da = psi_derivatives(a.psi, disc);
  const auto db = psi_derivatives(b.psi, disc);
  double h1 = 0.0, h2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = disc.weights[i];
    h1 += w * (dot(dn[i], dn[i]) + dot(ddn[i], ddn[i]));
    h2 += w * (std::norm(a.psi.values[i] - b.psi.values[i]) + std::norm(da.first[i] - db.first[i]) +
               std::norm(da.second[i] - db.second[i]));
  }
  RhoDistance r;
  r.director_h1 = std::sqrt(h1);
  r.psi_h2 = std::sqrt(h2);
  return r;
}

std::vector<RhoDistance> rho_cauchy_check(std::span<const State> states, std::span<const double> rho) {
  if (states.size() != rho.size()) throw Error(ErrorKind::InvalidParameter, "one rho per state required");
  std::vector<RhoDistance> out;
  for (std::size_t k = 0; k + 1 < states.size(); ++k) {
    RhoDistance d = state_distance(states[k], states[k + 1]);
    d.rho_a = rho[k];
    d.rho_b = rho[k + 1];
    out.push_back(d);
  }
  return out;
}

}  // namespace chevron
