#include "chevron/energy.hpp"

#include <array>
#include <cmath>
#include <string>

#include "chevron/error.hpp"

namespace chevron {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr std::size_t kTerms = 7;

struct Coefficients {
  double q, inv_q, inv_q2, inv_q6;
  double kappa;    // 1 / sqrt(1 + b^2)
  double gamma;    // q / (1 + b^2)
  double cos_t;    // cos(theta)
  double r_perp;   // c_perp q / (2 a_perp)
  double w_perp;   // a_perp / q
  double w_par;    // a_par / q
  double w_cpar;   // q c_par
  double g;
  double w_reg;    // rho / q^6
  double half_K;
  double elec;     // P E / sqrt(1 + b^2)
};

Coefficients make_coefficients(const PhysicalParams& p) {
  Coefficients c{};
  const double beta2 = 1.0 + p.b * p.b;
  c.q = p.q;
  c.inv_q = 1.0 / p.q;
  c.inv_q2 = c.inv_q * c.inv_q;
  c.inv_q6 = c.inv_q2 * c.inv_q2 * c.inv_q2;
  c.kappa = 1.0 / std::sqrt(beta2);
  c.gamma = p.q / beta2;
  c.cos_t = std::cos(p.theta);
  c.r_perp = p.c_perp * p.q / (2.0 * p.a_perp);
  c.w_perp = p.a_perp / p.q;
  c.w_par = p.a_par / p.q;
  c.w_cpar = p.q * p.c_par;
  c.g = p.g_coef;
  c.w_reg = p.rho * c.inv_q6;
  c.half_K = 0.5 * p.K;
  c.elec = p.P_pol * p.E_field * c.kappa;
  return c;
}

template <class T>
std::span<const T> cspan(const std::vector<T>& v) {
  return {v.data(), v.size()};
}

}  // namespace

EnergyEvaluation evaluate_energy(const State& state, const Discretization& disc,
                                 const PhysicalParams& params, EnergyPartials* partials, Exec exec) {
  const std::size_t n = disc.grid.size();
  if (state.grid.size() != n || state.director.size() != n || state.psi.size() != n) {
    throw Error(ErrorKind::MismatchedGrids, "state does not match the discretization");
  }
  const auto nl = static_cast<long>(n);
  const bool par = exec == Exec::parallel;
  const Coefficients c = make_coefficients(params);
  const auto& psi = state.psi.values;
  const auto& dir = state.director.values;
  const auto& w = disc.weights;

  // Stage 1: linear derivative fields.
  const auto ext = extend_with_ghosts(state.psi, disc.grid.spacing());
  std::vector<Complex> p1(n), p2(n), p3(n);
  disc.d1_ghost.apply(cspan(ext), std::span<Complex>(p1), exec);
  disc.d2_ghost.apply(cspan(ext), std::span<Complex>(p2), exec);
  disc.d3.apply(cspan(psi), std::span<Complex>(p3), exec);

  std::vector<double> s(n);
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < nl; ++i) s[i] = std::norm(psi[i]);
  std::vector<double> s1(n), s2(n), s3(n);
  disc.d1.apply(cspan(s), std::span<double>(s1), exec);
  disc.d2.apply(cspan(s), std::span<double>(s2), exec);
  disc.d3.apply(cspan(s), std::span<double>(s3), exec);

  std::vector<Vec3> np(n);
  disc.d1.apply(cspan(dir), std::span<Vec3>(np), exec);

  // Stage 2: inner fields of the [(...) n2]' terms, then their derivatives.
  std::vector<Complex> A(n), B(n);
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < nl; ++i) {
    const double n1 = dir[i].x, n2 = dir[i].y;
    A[i] = (kI * c.kappa * n1 * psi[i] + n2 * p1[i] * c.inv_q) * n2;
    B[i] = A[i] - kI * c.cos_t * n2 * psi[i];
  }
  std::vector<Complex> Ap(n), Bp(n);
  disc.d1.apply(cspan(A), std::span<Complex>(Ap), exec);
  disc.d1.apply(cspan(B), std::span<Complex>(Bp), exec);

  // Stage 3: nodal integrand.
  std::vector<std::array<double, kTerms>> terms(n);
  std::vector<Complex> z1(n), z2(n), z3(n);
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < nl; ++i) {
    const double n1 = dir[i].x, n2 = dir[i].y, n3 = dir[i].z;
    const Complex u = psi[i];
    z1[i] = p2[i] * c.inv_q - Ap[i] - c.gamma * u + c.gamma * n1 * n1 * u -
            kI * c.kappa * n1 * n2 * p1[i] + c.r_perp * u;
    const double tilt_gap = c.kappa * n1 - c.cos_t;
    const Complex y = -c.q * c.kappa * n1 * u + kI * n2 * p1[i] + c.q * c.cos_t * u;
    z2[i] = tilt_gap * y + Bp[i];
    z3[i] = kI * c.kappa * n1 * u + n2 * p1[i] * c.inv_q - kI * c.cos_t * u;

    auto& t = terms[i];
    t[0] = c.w_perp * std::norm(z1[i]);
    t[1] = c.w_par * std::norm(z2[i]);
    t[2] = c.w_cpar * std::norm(z3[i]);
    const double dev = s[i] - 1.0;
    t[3] = c.g * dev * dev + s1[i] * s1[i] + c.inv_q2 * s2[i] * s2[i] + c.inv_q6 * s3[i] * s3[i];
    t[4] = c.w_reg * std::norm(p3[i]);
    t[5] = c.half_K * dot(np[i], np[i]);
    t[6] = c.elec * s[i] * n3;
  }

  // Fixed-order reduction.
  std::array<double, kTerms> sums{};
  double magnitude = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < kTerms; ++k) {
      if (!std::isfinite(terms[i][k])) {
        throw Error(ErrorKind::NonFiniteEnergy, "non-finite integrand at node " + std::to_string(i));
      }
      sums[k] += w[i] * terms[i][k];
      magnitude += w[i] * std::abs(terms[i][k]);
    }
  }
  EnergyEvaluation out;
  auto& e = out.breakdown;
  e.perp = sums[0];
  e.par = sums[1];
  e.cpar = sums[2];
  e.penalization = sums[3];
  e.regularizer = sums[4];
  e.nematic = sums[5];
  e.electrostatic = sums[6];
  e.total = e.perp + e.par + e.cpar + e.penalization + e.regularizer + e.nematic + e.electrostatic;
  out.magnitude = magnitude;
  if (partials == nullptr) return out;

  // Reverse pass. For a complex intermediate z the adjoint packs
  // dE/dRe z + i dE/dIm z; if dz = a du then g_u += g_z conj(a), and for a
  // real input x with dz = a dx, dE/dx += Re(conj(g_z) a).
  std::vector<Complex> g_p1(n), g_p2(n), g_p3(n), g_psi(n), g_Ap(n), g_Bp(n);
  std::vector<double> g_s(n), g_s1(n), g_s2(n), g_s3(n);
  std::vector<Vec3> g_dir(n), g_np(n);
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < nl; ++i) {
    const double n1 = dir[i].x, n2 = dir[i].y, n3 = dir[i].z;
    const Complex u = psi[i];
    const double wi = w[i];
    const Complex Z1 = 2.0 * c.w_perp * wi * z1[i];
    const Complex Z2 = 2.0 * c.w_par * wi * z2[i];
    const Complex Z3 = 2.0 * c.w_cpar * wi * z3[i];
    const double tilt_gap = c.kappa * n1 - c.cos_t;
    const Complex y = -c.q * c.kappa * n1 * u + kI * n2 * p1[i] + c.q * c.cos_t * u;

    g_Ap[i] = -Z1;
    g_Bp[i] = Z2;
    g_p2[i] = Z1 * c.inv_q;
    g_p1[i] = Z1 * std::conj(-kI * c.kappa * n1 * n2) + Z2 * std::conj(tilt_gap * kI * n2) +
              Z3 * (n2 * c.inv_q);
    g_psi[i] = Z1 * (-c.gamma + c.gamma * n1 * n1 + c.r_perp) +
               Z2 * (tilt_gap * (c.q * c.cos_t - c.q * c.kappa * n1)) +
               Z3 * std::conj(kI * (c.kappa * n1 - c.cos_t));
    g_p3[i] = 2.0 * c.w_reg * wi * p3[i];

    double gn1 = std::real(std::conj(Z1) * (2.0 * c.gamma * n1 * u - kI * c.kappa * n2 * p1[i]));
    gn1 += std::real(std::conj(Z2) * (c.kappa * y - tilt_gap * c.q * c.kappa * u));
    gn1 += std::real(std::conj(Z3) * (kI * c.kappa * u));
    double gn2 = std::real(std::conj(Z1) * (-kI * c.kappa * n1 * p1[i]));
    gn2 += std::real(std::conj(Z2) * (tilt_gap * kI * p1[i]));
    gn2 += std::real(std::conj(Z3) * (p1[i] * c.inv_q));
    const double gn3 = c.elec * s[i] * wi;
    g_dir[i] = Vec3{gn1, gn2, gn3};

    g_s[i] = (2.0 * c.g * (s[i] - 1.0) + c.elec * n3) * wi;
    g_s1[i] = 2.0 * s1[i] * wi;
    g_s2[i] = 2.0 * c.inv_q2 * s2[i] * wi;
    g_s3[i] = 2.0 * c.inv_q6 * s3[i] * wi;
    g_np[i] = np[i] * (2.0 * c.half_K * wi);
  }

  std::vector<Complex> g_A(n), g_B(n);
  disc.d1.apply_transpose(cspan(g_Ap), std::span<Complex>(g_A), exec);
  disc.d1.apply_transpose(cspan(g_Bp), std::span<Complex>(g_B), exec);

  std::vector<double> tmp1(n), tmp2(n), tmp3(n);
  disc.d1.apply_transpose(cspan(g_s1), std::span<double>(tmp1), exec);
  disc.d2.apply_transpose(cspan(g_s2), std::span<double>(tmp2), exec);
  disc.d3.apply_transpose(cspan(g_s3), std::span<double>(tmp3), exec);

  std::vector<Complex> g_psi3(n);
  disc.d3.apply_transpose(cspan(g_p3), std::span<Complex>(g_psi3), exec);
  std::vector<Vec3> g_dir_np(n);
  disc.d1.apply_transpose(cspan(g_np), std::span<Vec3>(g_dir_np), exec);

#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < nl; ++i) {
    const double n1 = dir[i].x, n2 = dir[i].y;
    const Complex u = psi[i];
    // B = A - i cos(theta) n2 psi, so A collects both adjoints.
    const Complex gA = g_A[i] + g_B[i];
    g_dir[i].y += std::real(std::conj(g_B[i]) * (-kI * c.cos_t * u));
    g_psi[i] += g_B[i] * std::conj(-kI * c.cos_t * n2);

    g_dir[i].x += std::real(std::conj(gA) * (kI * c.kappa * n2 * u));
    g_dir[i].y += std::real(std::conj(gA) * (kI * c.kappa * n1 * u + 2.0 * n2 * p1[i] * c.inv_q));
    g_psi[i] += gA * std::conj(kI * c.kappa * n1 * n2);
    g_p1[i] += gA * (n2 * n2 * c.inv_q);

    const double gs = g_s[i] + tmp1[i] + tmp2[i] + tmp3[i];
    g_psi[i] += 2.0 * gs * u + g_psi3[i];
    g_dir[i] += g_dir_np[i];
  }

  std::vector<Complex> g_ext1(n + 2), g_ext2(n + 2);
  disc.d1_ghost.apply_transpose(cspan(g_p1), std::span<Complex>(g_ext1), exec);
  disc.d2_ghost.apply_transpose(cspan(g_p2), std::span<Complex>(g_ext2), exec);
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < nl; ++i) g_psi[i] += g_ext1[i + 1] + g_ext2[i + 1];
  // psi_{-1} = psi_1 - 2h slope_left, psi_N = psi_{N-2} + 2h slope_right.
  g_psi[1] += g_ext1[0] + g_ext2[0];
  g_psi[n - 2] += g_ext1[n + 1] + g_ext2[n + 1];

  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(g_dir[i].x) || !std::isfinite(g_dir[i].y) || !std::isfinite(g_dir[i].z) ||
        !std::isfinite(g_psi[i].real()) || !std::isfinite(g_psi[i].imag())) {
      throw Error(ErrorKind::NonFiniteGradient, "non-finite partial at node " + std::to_string(i));
    }
  }
  partials->director = std::move(g_dir);
  partials->psi = std::move(g_psi);
  return out;
}

EnergyBreakdown energy_breakdown(const State& state, const PhysicalParams& params, Exec exec) {
  const Discretization disc(state.grid);
  return evaluate_energy(state, disc, params, nullptr, exec).breakdown;
}

double total_energy(const State& state, const PhysicalParams& params, Exec exec) {
  return energy_breakdown(state, params, exec).total;
}

}  // namespace chevron
