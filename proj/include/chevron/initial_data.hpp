#pragma once

#include <optional>
#include <span>
#include <vector>

#include "chevron/energy.hpp"
#include "chevron/fields.hpp"
#include "chevron/params.hpp"

namespace chevron {

/// Well-prepared chevron initial data: a constant director on the tilt cone
/// and a pure-phase order parameter whose layers follow the displacement
/// g(x) = -b ln(cosh(q x)) / (q tanh(q L)), so g'(x) = -b tanh(q x) / tanh(q L).
class InitialProfile {
 public:
  explicit InitialProfile(const PhysicalParams& params);

  double displacement(double x) const;        ///< g(x), fixed by g(0) = 0
  double displacement_slope(double x) const;  ///< g'(x)
  Vec3 director() const { return director_; }
  Complex psi(double x) const;                ///< exp(-i q g(x) / sqrt(1+b^2))
  Complex psi_slope(double x) const;          ///< d/dx of psi(x)

 private:
  double q_, b_, L_, beta_;
  Vec3 director_;
};

/// Samples the profile on `grid` and pins psi and psi' at both ends.
State build_initial_state(const ValidatedParams& params, const Grid& grid);

/// Boundary slopes for an arbitrary order parameter with |psi(+-L)| = 1:
/// psi' conj(psi)(+-L) = +-i q b / sqrt(1+b^2).
void pin_boundary_from_values(OrderParameter& psi, const PhysicalParams& params);

struct EnergySweepRow {
  double q = 0.0;
  std::size_t n_nodes = 0;
  EnergyBreakdown energy;
};

inline constexpr std::size_t kMaxResolvedNodes = std::size_t{1} << 22;

/// Smallest node count with h q <= max_hq on [-L, L], at least `min_nodes`.
/// Throws InvalidParameter when that exceeds kMaxResolvedNodes.
std::size_t resolved_node_count(double L, double q, double max_hq = 0.25, std::size_t min_nodes = 65);

/// Energy of the well-prepared state for each q, on grids with h q <= max_hq.
std::vector<EnergySweepRow> initial_energy_sweep(const PhysicalParams& base, std::span<const double> q_list,
                                                 std::size_t min_nodes = 65, double max_hq = 0.25);

/// Least-squares slope of log(y) against log(x); empty for fewer than two
/// distinct points or non-positive values.
std::optional<double> loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace chevron
