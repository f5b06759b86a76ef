#pragma once

#include <span>
#include <vector>

#include "chevron/fields.hpp"
#include "chevron/variation.hpp"

namespace chevron::detail {

// Tangent vector in real coordinates: psi entries are (Re, Im) displacements.
struct Tangent {
  std::vector<Vec3> dir;
  std::vector<Complex> psi;
};

inline double tdot(const Tangent& a, const Tangent& b, std::span<const double> w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i] * (dot(a.dir[i], b.dir[i]) + std::real(std::conj(a.psi[i]) * b.psi[i]));
  }
  return acc;
}

inline void axpy(double a, const Tangent& x, Tangent& y) {
  for (std::size_t i = 0; i < y.dir.size(); ++i) {
    y.dir[i] += x.dir[i] * a;
    y.psi[i] += a * x.psi[i];
  }
}

inline Tangent scaled(const Tangent& x, double a) {
  Tangent out = x;
  for (auto& v : out.dir) v *= a;
  for (auto& v : out.psi) v *= a;
  return out;
}

// Real-coordinate gradient: the psi part of dJ is 2 Re(conj(d_psi) dpsi) w.
inline Tangent as_tangent(const GradientPair& g) {
  Tangent t{g.d_director, g.d_psi};
  for (auto& v : t.psi) v *= 2.0;
  return t;
}

}  // namespace chevron::detail
