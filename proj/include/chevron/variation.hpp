#pragma once

#include <array>
#include <span>
#include <vector>

#include "chevron/energy.hpp"
#include "chevron/exec.hpp"
#include "chevron/fields.hpp"
#include "chevron/params.hpp"

namespace chevron {

/// Discrete first variation in the trapezoid (mass-lumped) metric.
///
/// d_director is tangent to the sphere at each node. d_psi follows the
/// Wirtinger convention: dE = sum_i w_i [ d_director_i . dn_i + 2 Re(conj(d_psi_i) dpsi_i) ],
/// with w_i = h at every free psi node. Fixed psi nodes carry exactly zero.
struct GradientPair {
  std::vector<Vec3> d_director;
  std::vector<Complex> d_psi;
};

/// v - (v . n) n nodewise.
std::vector<Vec3> project_tangent(std::span<const Vec3> v, std::span<const Vec3> director);

/// Scales raw nodal partials by the metric, projects the director part and masks psi.
GradientPair gradient_from_partials(const State& state, const EnergyPartials& partials,
                                    std::span<const double> weights);

/// Exact gradient of the discrete energy. Throws NonFiniteGradient.
GradientPair gradient(const State& state, const PhysicalParams& params, Exec exec = Exec::serial);
GradientPair gradient(const State& state, const Discretization& disc, const PhysicalParams& params,
                      Exec exec = Exec::serial);

/// Inner product in real coordinates: psi components count as (Re, Im) pairs
/// of the real gradient 2 d_psi.
double metric_dot(const GradientPair& a, const GradientPair& b, std::span<const double> weights);
double metric_norm(const GradientPair& g, std::span<const double> weights);

struct ResidualNorms {
  std::array<double, 3> director{};  ///< per-component norms of the projected residual
  double psi = 0.0;
  double total = 0.0;
};

/// Discrete Euler-Lagrange residual of the step functional
/// J(n, psi) = sum w (|n - n_prev|^2 + |psi - psi_prev|^2) / (2 tau) + F(n, psi)
/// at `state`: the norm of the projected, masked gradient of J.
ResidualNorms el_residual(const State& prev, const State& state, double tau, const PhysicalParams& params,
                          Exec exec = Exec::serial);

/// Adds the movement part of the step-functional gradient to `g`.
void add_movement_gradient(const State& prev, const State& state, double tau, GradientPair& g);

}  // namespace chevron
