#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "chevron/exec.hpp"

namespace chevron {

using Complex = std::complex<double>;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
  friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) { return a * (1.0 / norm(a)); }
/// (I - n n^T) v
inline Vec3 tangent_part(const Vec3& v, const Vec3& n) { return v - n * dot(v, n); }

/// Uniform grid on [-L, L] with nodes x_i = -L + i h, h = 2L / (N - 1).
class Grid {
 public:
  Grid() = default;

  double half_width() const noexcept { return L_; }
  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  double node(std::size_t i) const noexcept { return i + 1 == n_ ? L_ : -L_ + static_cast<double>(i) * h_; }
  std::vector<double> nodes() const;
  /// Trapezoid weight of node i.
  double weight(std::size_t i) const noexcept { return (i == 0 || i + 1 == n_) ? 0.5 * h_ : h_; }
  std::vector<double> weights() const;

  friend bool operator==(const Grid& a, const Grid& b) { return a.L_ == b.L_ && a.n_ == b.n_; }

 private:
  Grid(double L, std::size_t n) : L_(L), n_(n), h_(2.0 * L / static_cast<double>(n - 1)) {}
  friend Grid make_grid(double L, std::size_t n);
  friend Grid make_grid_unchecked(double L, std::size_t n);

  double L_ = 1.0;
  std::size_t n_ = 0;
  double h_ = 0.0;
};

/// Throws GridTooCoarse when n < 16.
Grid make_grid(double L, std::size_t n);
/// Test-scale grids; only requires n >= 2 and L > 0.
Grid make_grid_unchecked(double L, std::size_t n);

/// Sparse banded operator stored row-wise together with its transpose, so
/// both the forward map and the adjoint are gathers.
class StencilMatrix {
 public:
  StencilMatrix() = default;
  StencilMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) { row_start_.push_back(0); }

  void add_row(std::size_t first_col, std::span<const double> weights);
  /// Builds the transpose; call once after the last add_row.
  void finalize();

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  template <class T>
  void apply(std::span<const T> in, std::span<T> out, Exec exec = Exec::serial) const {
    gather(row_start_, col_, val_, rows_, in, out, exec);
  }
  template <class T>
  void apply_transpose(std::span<const T> in, std::span<T> out, Exec exec = Exec::serial) const {
    gather(t_row_start_, t_col_, t_val_, cols_, in, out, exec);
  }
  template <class T>
  std::vector<T> operator()(std::span<const T> in, Exec exec = Exec::serial) const {
    std::vector<T> out(rows_);
    apply<T>(in, out, exec);
    return out;
  }

  /// Row weights and first column, for inspection in tests.
  std::span<const double> row_weights(std::size_t r) const {
    return {val_.data() + row_start_[r], row_start_[r + 1] - row_start_[r]};
  }
  std::size_t row_first_col(std::size_t r) const { return col_[row_start_[r]]; }

 private:
  template <class T>
  static void gather(const std::vector<std::size_t>& start, const std::vector<std::size_t>& col,
                     const std::vector<double>& val, std::size_t rows, std::span<const T> in,
                     std::span<T> out, Exec exec) {
    const auto n = static_cast<long>(rows);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (long r = 0; r < n; ++r) {
      T acc{};
      for (std::size_t k = start[r]; k < start[r + 1]; ++k) acc += in[col[k]] * val[k];
      out[r] = acc;
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_start_;
  std::vector<std::size_t> col_;
  std::vector<double> val_;
  std::vector<std::size_t> t_row_start_;
  std::vector<std::size_t> t_col_;
  std::vector<double> t_val_;
};

/// Finite-difference weights for the `order`-th derivative at 0 from samples at
/// `offsets` (in units of the spacing), by Fornberg's recursion.
std::vector<double> fd_weights(std::span<const double> offsets, int order);

/// `order`-th derivative on a uniform array of length n_in, evaluated at input
/// indices [first_out, first_out + n_out). Uses the centered second-order
/// stencil where it fits inside [0, n_in), otherwise a one-sided window of
/// order + 2 points, which is also second order.
StencilMatrix derivative_operator(std::size_t n_in, std::size_t first_out, std::size_t n_out,
                                  int order, double h);

/// Unit 3-vectors per node, stored raw and renormalized after updates.
struct DirectorField {
  std::vector<Vec3> values;

  std::size_t size() const noexcept { return values.size(); }
  void renormalize();
  /// max_i | |n_i| - 1 |
  double max_unit_defect() const;
};

/// Complex order parameter per node plus the pinned boundary data. The two end
/// values are fixed; the end slopes enter the stencils through one ghost node
/// per side, psi_{-1} = psi_1 - 2h slope_left and psi_N = psi_{N-2} + 2h slope_right.
struct OrderParameter {
  std::vector<Complex> values;
  Complex pin_left{1.0, 0.0};
  Complex pin_right{1.0, 0.0};
  Complex slope_left{0.0, 0.0};
  Complex slope_right{0.0, 0.0};

  std::size_t size() const noexcept { return values.size(); }
  bool pins_hold() const { return values.front() == pin_left && values.back() == pin_right; }
};

struct State {
  Grid grid;
  DirectorField director;
  OrderParameter psi;
  double t = 0.0;
};

/// Cached operators for one grid.
struct Discretization {
  explicit Discretization(const Grid& grid);

  Grid grid;
  std::vector<double> weights;
  StencilMatrix d1, d2, d3;   ///< N -> N, no ghost data
  StencilMatrix d1_ghost;     ///< N + 2 -> N, centered everywhere
  StencilMatrix d2_ghost;     ///< N + 2 -> N, centered everywhere
};

/// [psi_{-1}, psi_0, ..., psi_{N-1}, psi_N]
std::vector<Complex> extend_with_ghosts(const OrderParameter& psi, double h);

template <class T>
std::vector<T> d1(std::span<const T> f, const Grid& g) {
  return derivative_operator(g.size(), 0, g.size(), 1, g.spacing())(f);
}
template <class T>
std::vector<T> d2(std::span<const T> f, const Grid& g) {
  return derivative_operator(g.size(), 0, g.size(), 2, g.spacing())(f);
}
template <class T>
std::vector<T> d3(std::span<const T> f, const Grid& g) {
  return derivative_operator(g.size(), 0, g.size(), 3, g.spacing())(f);
}

struct PsiDerivatives {
  std::vector<Complex> first, second, third;
};
/// psi', psi'' through the ghost nodes; psi''' from real nodes only.
PsiDerivatives psi_derivatives(const OrderParameter& psi, const Discretization& disc);

struct DofMask {
  std::vector<bool> director_free;
  std::vector<bool> psi_free;

  std::size_t free_director_count() const;
  std::size_t free_psi_count() const;
  /// Zeroes entries of fixed psi nodes.
  void zero_fixed(std::span<Complex> psi_field) const;
};

DofMask free_dof_mask(const State& state);

/// Free unknowns as a flat real vector: 3 per director node, then (Re, Im) per free psi node.
std::vector<double> pack_free(const State& state, const DofMask& mask);
void unpack_free(std::span<const double> packed, const DofMask& mask, State& state);

}  // namespace chevron
