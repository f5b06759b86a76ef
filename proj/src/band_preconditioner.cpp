#include "band_preconditioner.hpp"

#include <lapacke.h>

#include <cmath>

namespace chevron::detail {

namespace {

std::pair<Vec3, Vec3> tangent_basis(const Vec3& n) {
  const Vec3 axis = std::abs(n.x) < 0.6 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const Vec3 e1 = normalized(tangent_part(axis, n));
  return {e1, Vec3{n.y * e1.z - n.z * e1.y, n.z * e1.x - n.x * e1.z, n.x * e1.y - n.y * e1.x}};
}

}  // namespace

std::optional<BandPreconditioner> BandPreconditioner::build(const Objective& f, const State& x, const Tangent& g,
                                                            double mass_scale) {
  // Perturbed nodes sit 2 * kReach + 1 apart so their gradient footprints never overlap.
  constexpr std::size_t kSpacing = 2 * kReach + 1;
  constexpr double kDelta = 1e-6;
  const std::size_t n = x.grid.size();
  const std::size_t dim = 4 * n;
  const auto w = x.grid.weights();

  BandPreconditioner p;
  p.nodes_ = n;
  p.e1_.resize(n);
  p.e2_.resize(n);
  for (std::size_t i = 0; i < n; ++i) std::tie(p.e1_[i], p.e2_[i]) = tangent_basis(x.director.values[i]);

  // full(a, b) for |a - b| <= kBand, stored by column b; rows are raw (mass-weighted) Hessian entries.
  std::vector<double> full(dim * (2 * kBand + 1), 0.0);
  auto at = [&](std::size_t a, std::size_t b) -> double& { return full[b * (2 * kBand + 1) + (a + kBand - b)]; };
  auto free_coord = [&](std::size_t i, int c) { return c < 2 || (i != 0 && i + 1 != n); };

  for (std::size_t color = 0; color < kSpacing; ++color) {
    for (int c = 0; c < 4; ++c) {
      State y = x;
      for (std::size_t i = color; i < n; i += kSpacing) {
        if (!free_coord(i, c)) continue;
        Vec3& d = y.director.values[i];
        if (c == 0) d = normalized(d + p.e1_[i] * kDelta);
        if (c == 1) d = normalized(d + p.e2_[i] * kDelta);
        if (c == 2) y.psi.values[i] += Complex(kDelta, 0.0);
        if (c == 3) y.psi.values[i] += Complex(0.0, kDelta);
      }
      const Tangent gy = as_tangent(f(y).gradient);
      for (std::size_t i = color; i < n; i += kSpacing) {
        if (!free_coord(i, c)) continue;
        const std::size_t col = 4 * i + static_cast<std::size_t>(c);
        const std::size_t lo = i >= kReach ? i - kReach : 0;
        const std::size_t hi = std::min(n - 1, i + kReach);
        for (std::size_t j = lo; j <= hi; ++j) {
          const Vec3 dg = gy.dir[j] - g.dir[j];
          const Complex dz = gy.psi[j] - g.psi[j];
          const double rows[4] = {dot(dg, p.e1_[j]), dot(dg, p.e2_[j]), dz.real(), dz.imag()};
          for (int r = 0; r < 4; ++r) {
            if (!free_coord(j, r)) continue;
            at(4 * j + static_cast<std::size_t>(r), col) = w[j] * rows[r] / kDelta;
          }
        }
      }
    }
  }

  // Symmetrize into LAPACK lower band storage and retry with growing mass shifts.
  // Fixed psi coordinates get a decoupled diagonal, so they solve to zero.
  const std::size_t ld = kBand + 1;
  std::vector<double> sym(dim * ld, 0.0);
  std::vector<double> mass(dim);
  for (std::size_t b = 0; b < dim; ++b) {
    const std::size_t i = b / 4;
    mass[b] = w[i];
    if (!free_coord(i, static_cast<int>(b % 4))) {
      sym[b * ld] = w[i] * mass_scale;
      continue;
    }
    for (std::size_t a = b; a < std::min(dim, b + kBand + 1); ++a) {
      sym[b * ld + (a - b)] = 0.5 * (at(a, b) + at(b, a));
    }
  }
  for (double v : sym) {
    if (!std::isfinite(v)) return std::nullopt;
  }
  double shift = 0.0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    p.band_ = sym;
    for (std::size_t b = 0; b < dim; ++b) p.band_[b * ld] += shift * mass[b];
    const lapack_int info = LAPACKE_dpbtrf(LAPACK_COL_MAJOR, 'L', static_cast<lapack_int>(dim),
                                           static_cast<lapack_int>(kBand), p.band_.data(), static_cast<lapack_int>(ld));
    if (info == 0) return p;
    shift = shift == 0.0 ? 1e-3 * mass_scale : 10.0 * shift;
  }
  return std::nullopt;
}

Tangent BandPreconditioner::apply(const Tangent& q, std::span<const double> w) const {
  const std::size_t n = nodes_;
  std::vector<double> rhs(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    rhs[4 * i + 0] = w[i] * dot(q.dir[i], e1_[i]);
    rhs[4 * i + 1] = w[i] * dot(q.dir[i], e2_[i]);
    rhs[4 * i + 2] = w[i] * q.psi[i].real();
    rhs[4 * i + 3] = w[i] * q.psi[i].imag();
  }
  LAPACKE_dpbtrs(LAPACK_COL_MAJOR, 'L', static_cast<lapack_int>(4 * n), static_cast<lapack_int>(kBand), 1,
                 band_.data(), static_cast<lapack_int>(kBand + 1), rhs.data(), static_cast<lapack_int>(4 * n));
  Tangent out{std::vector<Vec3>(n), std::vector<Complex>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.dir[i] = e1_[i] * rhs[4 * i] + e2_[i] * rhs[4 * i + 1];
    out.psi[i] = Complex(rhs[4 * i + 2], rhs[4 * i + 3]);
  }
  return out;
}

}  // namespace chevron::detail
