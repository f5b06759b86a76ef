#pragma once

#include <optional>
#include <span>
#include <vector>

#include "chevron/flow.hpp"
#include "tangent.hpp"

namespace chevron::detail {

// Inverse of the objective's Hessian at one point, held as a banded Cholesky
// factor in the per-node coordinates (two director tangent directions, Re psi,
// Im psi). Used to seed L-BFGS; the stiff derivative terms make the scalar
// seed converge in thousands of iterations instead of tens.
class BandPreconditioner {
 public:
  /// Probes the Hessian by gradient differences and factors it, adding
  /// multiples of the mass matrix until it is positive definite. `mass_scale`
  /// sets the size of those shifts. Empty when no shift works.
  static std::optional<BandPreconditioner> build(const Objective& f, const State& x, const Tangent& g,
                                                 double mass_scale);

  /// H^{-1} W q: the Newton step for metric gradient q.
  Tangent apply(const Tangent& q, std::span<const double> w) const;

  /// Nodes coupled by the energy are at most this far apart.
  static constexpr std::size_t kReach = 4;

 private:
  std::size_t nodes_ = 0;
  std::vector<double> band_;  // lower band, column major, leading dimension kBand + 1
  std::vector<Vec3> e1_, e2_;

  static constexpr std::size_t kBand = 4 * kReach + 3;
};

}  // namespace chevron::detail
