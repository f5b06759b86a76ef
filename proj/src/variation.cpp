#include "chevron/variation.hpp"

#include <cmath>

#include "chevron/error.hpp"

namespace chevron {

std::vector<Vec3> project_tangent(std::span<const Vec3> v, std::span<const Vec3> director) {
  std::vector<Vec3> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = tangent_part(v[i], director[i]);
  return out;
}

GradientPair gradient_from_partials(const State& state, const EnergyPartials& partials,
                                    std::span<const double> weights) {
  const std::size_t n = state.grid.size();
  GradientPair g;
  g.d_director.resize(n);
  g.d_psi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.d_director[i] = tangent_part(partials.director[i], state.director.values[i]) * (1.0 / weights[i]);
    g.d_psi[i] = partials.psi[i] * (0.5 / weights[i]);
  }
  g.d_psi.front() = Complex{};
  g.d_psi.back() = Complex{};
  return g;
}

GradientPair gradient(const State& state, const Discretization& disc, const PhysicalParams& params,
                      Exec exec) {
  EnergyPartials partials;
  evaluate_energy(state, disc, params, &partials, exec);
  return gradient_from_partials(state, partials, disc.weights);
}

GradientPair gradient(const State& state, const PhysicalParams& params, Exec exec) {
  const Discretization disc(state.grid);
  return gradient(state, disc, params, exec);
}

double metric_dot(const GradientPair& a, const GradientPair& b, std::span<const double> w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i] * (dot(a.d_director[i], b.d_director[i]) +
                   4.0 * std::real(std::conj(a.d_psi[i]) * b.d_psi[i]));
  }
  return acc;
}

double metric_norm(const GradientPair& g, std::span<const double> w) {
  return std::sqrt(metric_dot(g, g, w));
}

void add_movement_gradient(const State& prev, const State& state, double tau, GradientPair& g) {
  const std::size_t n = state.grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 dn = (state.director.values[i] - prev.director.values[i]) * (1.0 / tau);
    g.d_director[i] += tangent_part(dn, state.director.values[i]);
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    g.d_psi[i] += (state.psi.values[i] - prev.psi.values[i]) * (0.5 / tau);
  }
}

ResidualNorms el_residual(const State& prev, const State& state, double tau, const PhysicalParams& params,
                          Exec exec) {
  if (!(prev.grid == state.grid)) throw Error(ErrorKind::MismatchedGrids, "states live on different grids");
  const Discretization disc(state.grid);
  GradientPair g = gradient(state, disc, params, exec);
  add_movement_gradient(prev, state, tau, g);
  ResidualNorms r;
  double psi_sq = 0.0;
  std::array<double, 3> dir_sq{};
  for (std::size_t i = 0; i < disc.weights.size(); ++i) {
    const double w = disc.weights[i];
    dir_sq[0] += w * g.d_director[i].x * g.d_director[i].x;
    dir_sq[1] += w * g.d_director[i].y * g.d_director[i].y;
    dir_sq[2] += w * g.d_director[i].z * g.d_director[i].z;
    psi_sq += 4.0 * w * std::norm(g.d_psi[i]);
  }
  for (std::size_t k = 0; k < 3; ++k) r.director[k] = std::sqrt(dir_sq[k]);
  r.psi = std::sqrt(psi_sq);
  r.total = std::sqrt(dir_sq[0] + dir_sq[1] + dir_sq[2] + psi_sq);
  return r;
}

}  // namespace chevron
