#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "chevron/fields.hpp"
#include "chevron/params.hpp"

namespace chevron {

enum class StateLabel { up, down, mixed };
std::string_view to_string(StateLabel label);

struct MeltInterval {
  double lo = 0.0;
  double hi = 0.0;
};

struct DiagnosticsRecord {
  double t = 0.0;
  double sup_ratio = 0.0;    ///< max |psi'| / q
  double min_modulus = 0.0;  ///< min |psi|
  double melt_threshold = 0.25;
  std::optional<MeltInterval> melt_interval;  ///< longest run of nodes with |psi| < threshold
  std::vector<double> tilt_profile;           ///< Im(conj(psi) psi') / (q max(|psi|^2, 1e-8))
  std::optional<double> tip_x;                ///< sign change of the tilt closest to x = 0
  StateLabel state_label = StateLabel::mixed;
  double natural_bc_residual = 0.0;           ///< max over both ends of ||psi|^2''|
};

inline constexpr double kTiltModulusFloor = 1e-8;
inline constexpr double kDefaultMeltThreshold = 0.25;

/// Requires 0 < melt_threshold < 1.
DiagnosticsRecord diagnose(const State& state, const PhysicalParams& params,
                           double melt_threshold = kDefaultMeltThreshold);

/// Sign-changing zero of a sampled profile nearest to x = 0; values with
/// |v| <= 1e-12 count as zero and never start a crossing.
std::optional<double> zero_crossing_nearest_origin(std::span<const double> x, std::span<const double> v);

StateLabel classify(const DirectorField& director);

struct RatioSeries {
  double q = 0.0;
  std::vector<double> sup_ratios;  ///< sup_ratio along one trajectory
};

struct RatioSweep {
  std::vector<double> q;
  std::vector<double> max_ratio;
  std::optional<double> slope;  ///< log-log slope of max_ratio vs q; empty for < 2 distinct q
};

RatioSweep ratio_sweep(std::span<const RatioSeries> series);

struct RhoDistance {
  double rho_a = 0.0;
  double rho_b = 0.0;
  double director_h1 = 0.0;
  double psi_h2 = 0.0;
  double total() const { return director_h1 + psi_h2; }
};

/// Discrete H1 distance of the directors plus H2 distance of the order
/// parameters between consecutive states. Throws MismatchedGrids.
std::vector<RhoDistance> rho_cauchy_check(std::span<const State> states, std::span<const double> rho);

/// The two distances between a pair of states.
RhoDistance state_distance(const State& a, const State& b);

}  // namespace chevron
