#include "chevron/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chevron/error.hpp"

namespace chevron {

namespace {

// ln(cosh(u)) without overflow.
double log_cosh(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

}  // namespace

InitialProfile::InitialProfile(const PhysicalParams& p)
    : q_(p.q), b_(p.b), L_(p.L), beta_(p.layer_factor()) {
  const double n1 = std::cos(p.theta) * beta_;
  const double n3_sq = 1.0 - n1 * n1;
  if (n3_sq < 0.0) {
    throw Error(ErrorKind::RealizabilityViolated, "cos(theta) sqrt(1 + b^2) exceeds 1");
  }
  director_ = Vec3{n1, 0.0, std::sqrt(n3_sq)};
}

double InitialProfile::displacement(double x) const {
  return -b_ * log_cosh(q_ * x) / (q_ * std::tanh(q_ * L_));
}

double InitialProfile::displacement_slope(double x) const {
  return -b_ * std::tanh(q_ * x) / std::tanh(q_ * L_);
}

Complex InitialProfile::psi(double x) const {
  return std::polar(1.0, -q_ * displacement(x) / beta_);
}

Complex InitialProfile::psi_slope(double x) const {
  return Complex{0.0, -q_ * displacement_slope(x) / beta_} * psi(x);
}

State build_initial_state(const ValidatedParams& params, const Grid& grid) {
  const InitialProfile profile(params.get());
  State s;
  s.grid = grid;
  s.t = 0.0;
  const std::size_t n = grid.size();
  s.director.values.assign(n, profile.director());
  s.psi.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.psi.values[i] = profile.psi(grid.node(i));
  s.psi.pin_left = s.psi.values.front();
  s.psi.pin_right = s.psi.values.back();
  s.psi.slope_left = profile.psi_slope(-grid.half_width());
  s.psi.slope_right = profile.psi_slope(grid.half_width());
  return s;
}

void pin_boundary_from_values(OrderParameter& psi, const PhysicalParams& params) {
  const Complex a = psi.values.front();
  const Complex z = psi.values.back();
  if (std::abs(std::abs(a) - 1.0) > 1e-6 || std::abs(std::abs(z) - 1.0) > 1e-6) {
    throw Error(ErrorKind::ValidationError, "boundary values of psi must have unit modulus");
  }
  const double rate = params.q * params.b / params.layer_factor();
  psi.pin_left = a;
  psi.pin_right = z;
  psi.slope_left = Complex{0.0, -rate} * a / std::norm(a);
  psi.slope_right = Complex{0.0, rate} * z / std::norm(z);
}

std::size_t resolved_node_count(double L, double q, double max_hq, std::size_t min_nodes) {
  const double cells = std::ceil(2.0 * L * q / max_hq);
  if (!(cells < static_cast<double>(kMaxResolvedNodes))) {
    throw Error(ErrorKind::InvalidParameter, "q = " + std::to_string(q) + " needs more than " +
                                                 std::to_string(kMaxResolvedNodes) + " nodes at h q <= " +
                                                 std::to_string(max_hq));
  }
  return std::max(min_nodes, static_cast<std::size_t>(cells) + 1);
}

std::vector<EnergySweepRow> initial_energy_sweep(const PhysicalParams& base, std::span<const double> q_list,
                                                 std::size_t min_nodes, double max_hq) {
  std::vector<EnergySweepRow> rows;
  rows.reserve(q_list.size());
  for (double q : q_list) {
    PhysicalParams p = base;
    p.q = q;
    const auto valid = validate(p);
    const std::size_t n = resolved_node_count(p.L, q, max_hq, min_nodes);
    const State s = build_initial_state(valid, make_grid(p.L, n));
    rows.push_back({q, n, energy_breakdown(s, p)});
  }
  return rows;
}

std::optional<double> loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nullopt;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-300) return std::nullopt;
  return (m * sxy - sx * sy) / denom;
}

}  // namespace chevron
