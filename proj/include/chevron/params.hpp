#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string_view>

namespace chevron {

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Material and field constants of the one-dimensional chevron energy.
///
/// Everything is nondimensional. The defaults are a desk-scale preset, not
/// material data. `c_perp` defaults to 2 a_perp sin^2(theta), which makes the
/// perpendicular block vanish on uniformly tilted layers so the energy of the
/// well-prepared initial state stays bounded as q grows.
struct PhysicalParams {
  double L = 1.0;
  double q = 50.0;
  double b = std::tan(deg_to_rad(20.0));
  double theta = deg_to_rad(25.0);
  double K = 1.0;
  double a_perp = 1.0;
  double a_par = 1.0;
  double c_perp = 2.0 * std::pow(std::sin(deg_to_rad(25.0)), 2);
  double c_par = 1.0;
  double g_coef = 1.0;
  double P_pol = 1.0;
  double E_field = 0.0;
  double rho = 1e-3;

  /// sqrt(1 + b^2), the layer-compression factor.
  double layer_factor() const { return std::sqrt(1.0 + b * b); }
  double cos_theta() const { return std::cos(theta); }
};

/// Parameters that passed `validate`. Only `validate` can construct one.
class ValidatedParams {
 public:
  const PhysicalParams& get() const noexcept { return params_; }
  operator const PhysicalParams&() const noexcept { return params_; }  // NOLINT
  const PhysicalParams* operator->() const noexcept { return &params_; }

 private:
  explicit ValidatedParams(const PhysicalParams& p) : params_(p) {}
  friend ValidatedParams validate(const PhysicalParams& params);

  PhysicalParams params_;
};

/// Throws chevron::Error naming the first violated constraint.
ValidatedParams validate(const PhysicalParams& params);
inline ValidatedParams validate(const ValidatedParams& params) { return validate(params.get()); }

/// b = tan(arccos(d_b / d_s)). Throws InvalidThickness unless 0 < d_b <= d_s.
double mismatch_from_thickness(double d_b, double d_s);

struct FlowConfig {
  double tau = 1e-3;
  double T = 0.2;
  /// 0 selects the smallest M with M * tau > T.
  std::size_t n_steps = 0;
  double inner_tol = 1e-8;
  std::size_t inner_max_iters = 20000;
  std::size_t n_nodes = 257;

  std::size_t resolved_steps() const;
};

/// Throws InvalidParameter on tau <= 0, T <= 0, n_steps * tau <= T or n_nodes < 16.
void validate(const FlowConfig& config);

struct PhysicalField {
  std::string_view name;
  double PhysicalParams::*member;
};

struct FlowField {
  std::string_view name;
  enum class Kind { real, count } kind;
  double FlowConfig::*real_member;
  std::size_t FlowConfig::*count_member;
};

std::span<const PhysicalField> physical_fields();
std::span<const FlowField> flow_fields();

}  // namespace chevron
