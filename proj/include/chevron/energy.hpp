#pragma once

#include <vector>

#include "chevron/exec.hpp"
#include "chevron/fields.hpp"
#include "chevron/params.hpp"

namespace chevron {

/// Per-term values of the free energy per unit x1-length.
struct EnergyBreakdown {
  double perp = 0.0;           ///< (a_perp/q) |...|^2 block
  double par = 0.0;            ///< (a_par/q) |...|^2 block
  double cpar = 0.0;           ///< q c_par |...|^2 block
  double penalization = 0.0;   ///< g(|psi|^2-1)^2 + (|psi|^2')^2 + q^-2 (|psi|^2'')^2 + q^-6 (|psi|^2''')^2
  double regularizer = 0.0;    ///< rho q^-6 |psi'''|^2
  double nematic = 0.0;        ///< (K/2) |n'|^2
  double electrostatic = 0.0;  ///< (P E / sqrt(1+b^2)) |psi|^2 n3
  double total = 0.0;
};

/// Nodal partial derivatives of the discrete energy. For psi the entry packs
/// dE/dRe(psi_i) + i dE/dIm(psi_i). Not projected, not masked.
struct EnergyPartials {
  std::vector<Vec3> director;
  std::vector<Complex> psi;
};

struct EnergyEvaluation {
  EnergyBreakdown breakdown;
  /// Sum of |term| over all nodes and terms; the scale of roundoff in `total`.
  double magnitude = 0.0;
};

/// Trapezoid quadrature of the energy density on the grid. When `partials` is
/// non-null it receives the exact gradient of that quadrature with respect to
/// every nodal value (reverse-mode through the stencils).
/// Throws NonFiniteEnergy if any nodal integrand is not finite.
EnergyEvaluation evaluate_energy(const State& state, const Discretization& disc,
                                 const PhysicalParams& params, EnergyPartials* partials = nullptr,
                                 Exec exec = Exec::serial);

EnergyBreakdown energy_breakdown(const State& state, const PhysicalParams& params, Exec exec = Exec::serial);
double total_energy(const State& state, const PhysicalParams& params, Exec exec = Exec::serial);

}  // namespace chevron
