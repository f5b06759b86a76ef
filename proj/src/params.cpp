#include "chevron/params.hpp"

#include <array>
#include <string>

#include "chevron/error.hpp"

namespace chevron {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0)) {
    throw Error(ErrorKind::NonPositiveCoefficient,
                std::string(name) + " must be > 0, got " + std::to_string(value));
  }
}

}  // namespace

ValidatedParams validate(const PhysicalParams& p) {
  if (!(p.L > 0.0)) throw Error(ErrorKind::InvalidParameter, "L must be > 0");
  if (!(p.q >= 1.0)) throw Error(ErrorKind::InvalidParameter, "q must be >= 1");
  if (!(p.rho >= 0.0 && p.rho < 1.0)) {
    throw Error(ErrorKind::RhoOutOfRange, "rho must satisfy 0 <= rho < 1, got " + std::to_string(p.rho));
  }
  require_positive(p.a_perp, "a_perp");
  require_positive(p.a_par, "a_par");
  require_positive(p.c_perp, "c_perp");
  require_positive(p.c_par, "c_par");
  require_positive(p.g_coef, "g_coef");
  if (!(p.K >= 0.0)) throw Error(ErrorKind::InvalidParameter, "K must be >= 0");
  if (!(p.b >= 0.0)) throw Error(ErrorKind::InvalidParameter, "b must be >= 0");
  if (!(p.theta > 0.0 && p.theta < std::numbers::pi / 2)) {
    throw Error(ErrorKind::InvalidParameter, "theta must lie in (0, pi/2)");
  }
  if (!std::isfinite(p.P_pol) || !std::isfinite(p.E_field)) {
    throw Error(ErrorKind::InvalidParameter, "P_pol and E_field must be finite");
  }
  const double realizability = std::cos(p.theta) * p.layer_factor();
  if (realizability > 1.0) {
    throw Error(ErrorKind::RealizabilityViolated,
                "cos(theta) * sqrt(1 + b^2) = " + std::to_string(realizability) + " > 1");
  }
  return ValidatedParams(p);
}

double mismatch_from_thickness(double d_b, double d_s) {
  if (!(d_b > 0.0) || !(d_b <= d_s)) {
    throw Error(ErrorKind::InvalidThickness, "need 0 < d_b <= d_s");
  }
  if (d_b == d_s) return 0.0;
  return std::tan(std::acos(d_b / d_s));
}

std::size_t FlowConfig::resolved_steps() const {
  if (n_steps != 0) return n_steps;
  if (!(tau > 0.0) || !(T > 0.0)) return 0;
  auto m = static_cast<std::size_t>(std::floor(T / tau));
  while (static_cast<double>(m) * tau <= T) ++m;
  return m;
}

void validate(const FlowConfig& c) {
  if (!(c.tau > 0.0)) throw Error(ErrorKind::InvalidParameter, "tau must be > 0");
  if (!(c.T > 0.0)) throw Error(ErrorKind::InvalidParameter, "T must be > 0");
  if (!(static_cast<double>(c.resolved_steps()) * c.tau > c.T)) {
    throw Error(ErrorKind::InvalidParameter, "n_steps * tau must exceed T");
  }
  if (c.n_nodes < 16) throw Error(ErrorKind::InvalidParameter, "n_nodes must be >= 16");
  if (!(c.inner_tol > 0.0)) throw Error(ErrorKind::InvalidParameter, "inner_tol must be > 0");
  if (c.inner_max_iters == 0) throw Error(ErrorKind::InvalidParameter, "inner_max_iters must be > 0");
}

std::span<const PhysicalField> physical_fields() {
  static constexpr std::array<PhysicalField, 13> fields{{
      {"L", &PhysicalParams::L},
      {"q", &PhysicalParams::q},
      {"b", &PhysicalParams::b},
      {"theta", &PhysicalParams::theta},
      {"K", &PhysicalParams::K},
      {"a_perp", &PhysicalParams::a_perp},
      {"a_par", &PhysicalParams::a_par},
      {"c_perp", &PhysicalParams::c_perp},
      {"c_par", &PhysicalParams::c_par},
      {"g_coef", &PhysicalParams::g_coef},
      {"P_pol", &PhysicalParams::P_pol},
      {"E_field", &PhysicalParams::E_field},
      {"rho", &PhysicalParams::rho},
  }};
  return fields;
}

std::span<const FlowField> flow_fields() {
  using K = FlowField::Kind;
  static constexpr std::array<FlowField, 6> fields{{
      {"tau", K::real, &FlowConfig::tau, nullptr},
      {"T", K::real, &FlowConfig::T, nullptr},
      {"n_steps", K::count, nullptr, &FlowConfig::n_steps},
      {"inner_tol", K::real, &FlowConfig::inner_tol, nullptr},
      {"inner_max_iters", K::count, nullptr, &FlowConfig::inner_max_iters},
      {"n_nodes", K::count, nullptr, &FlowConfig::n_nodes},
  }};
  return fields;
}

}  // namespace chevron
