#include "chevron/fields.hpp"

#include <algorithm>
#include <string>

#include "chevron/error.hpp"

namespace chevron {

std::vector<double> Grid::nodes() const {
  std::vector<double> x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[i] = node(i);
  return x;
}

std::vector<double> Grid::weights() const {
  std::vector<double> w(n_);
  for (std::size_t i = 0; i < n_; ++i) w[i] = weight(i);
  return w;
}

Grid make_grid(double L, std::size_t n) {
  if (n < 16) throw Error(ErrorKind::GridTooCoarse, "need at least 16 nodes, got " + std::to_string(n));
  return make_grid_unchecked(L, n);
}

Grid make_grid_unchecked(double L, std::size_t n) {
  if (n < 2) throw Error(ErrorKind::GridTooCoarse, "need at least 2 nodes");
  if (!(L > 0.0)) throw Error(ErrorKind::InvalidParameter, "L must be > 0");
  return Grid(L, n);
}

void StencilMatrix::add_row(std::size_t first_col, std::span<const double> weights) {
  for (std::size_t k = 0; k < weights.size(); ++k) {
    col_.push_back(first_col + k);
    val_.push_back(weights[k]);
  }
  row_start_.push_back(col_.size());
}

void StencilMatrix::finalize() {
  std::vector<std::size_t> count(cols_ + 1, 0);
  for (std::size_t c : col_) ++count[c + 1];
  t_row_start_.assign(cols_ + 1, 0);
  for (std::size_t c = 0; c < cols_; ++c) t_row_start_[c + 1] = t_row_start_[c] + count[c + 1];
  t_col_.resize(col_.size());
  t_val_.resize(val_.size());
  std::vector<std::size_t> fill(t_row_start_.begin(), t_row_start_.end() - 1);
  // Rows visited in increasing order, so each transposed row is sorted and the
  // adjoint sums in a fixed order.
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) {
      const std::size_t slot = fill[col_[k]]++;
      t_col_[slot] = r;
      t_val_[slot] = val_[k];
    }
  }
}

std::vector<double> fd_weights(std::span<const double> x, int order) {
  const std::size_t n = x.size();
  const auto m = static_cast<std::size_t>(order);
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0];
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i];
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) {
        c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = c[j][m];
  return w;
}

StencilMatrix derivative_operator(std::size_t n_in, std::size_t first_out, std::size_t n_out,
                                  int order, double h) {
  const std::size_t centered = (order % 2 == 1) ? static_cast<std::size_t>(order) + 2
                                                 : static_cast<std::size_t>(order) + 1;
  const std::size_t one_sided = static_cast<std::size_t>(order) + 2;
  if (n_in < one_sided) {
    throw Error(ErrorKind::GridTooCoarse, "too few points for derivative of order " + std::to_string(order));
  }
  const double scale = std::pow(h, -order);
  StencilMatrix op(n_out, n_in);
  std::vector<double> offsets;
  for (std::size_t r = 0; r < n_out; ++r) {
    const auto j = static_cast<long>(first_out + r);
    auto start = j - static_cast<long>((centered - 1) / 2);
    std::size_t width = centered;
    if (start < 0 || start + static_cast<long>(centered) > static_cast<long>(n_in)) {
      width = one_sided;
      start = std::clamp(j - static_cast<long>((one_sided - 1) / 2), 0L,
                         static_cast<long>(n_in - one_sided));
    }
    offsets.resize(width);
    for (std::size_t k = 0; k < width; ++k) offsets[k] = static_cast<double>(start + static_cast<long>(k) - j);
    auto w = fd_weights(offsets, order);
    for (double& v : w) v *= scale;
    op.add_row(static_cast<std::size_t>(start), w);
  }
  op.finalize();
  return op;
}

void DirectorField::renormalize() {
  for (auto& n : values) n = normalized(n);
}

double DirectorField::max_unit_defect() const {
  double worst = 0.0;
  for (const auto& n : values) worst = std::max(worst, std::abs(norm(n) - 1.0));
  return worst;
}

Discretization::Discretization(const Grid& g)
    : grid(g),
      weights(g.weights()),
      d1(derivative_operator(g.size(), 0, g.size(), 1, g.spacing())),
      d2(derivative_operator(g.size(), 0, g.size(), 2, g.spacing())),
      d3(derivative_operator(g.size(), 0, g.size(), 3, g.spacing())),
      d1_ghost(derivative_operator(g.size() + 2, 1, g.size(), 1, g.spacing())),
      d2_ghost(derivative_operator(g.size() + 2, 1, g.size(), 2, g.spacing())) {}

std::vector<Complex> extend_with_ghosts(const OrderParameter& psi, double h) {
  const std::size_t n = psi.size();
  std::vector<Complex> ext(n + 2);
  std::copy(psi.values.begin(), psi.values.end(), ext.begin() + 1);
  ext[0] = psi.values[1] - 2.0 * h * psi.slope_left;
  ext[n + 1] = psi.values[n - 2] + 2.0 * h * psi.slope_right;
  return ext;
}

PsiDerivatives psi_derivatives(const OrderParameter& psi, const Discretization& disc) {
  const auto ext = extend_with_ghosts(psi, disc.grid.spacing());
  PsiDerivatives out;
  out.first = disc.d1_ghost(std::span<const Complex>(ext));
  out.second = disc.d2_ghost(std::span<const Complex>(ext));
  out.third = disc.d3(std::span<const Complex>(psi.values));
  return out;
}

std::size_t DofMask::free_director_count() const {
  return static_cast<std::size_t>(std::count(director_free.begin(), director_free.end(), true));
}

std::size_t DofMask::free_psi_count() const {
  return static_cast<std::size_t>(std::count(psi_free.begin(), psi_free.end(), true));
}

void DofMask::zero_fixed(std::span<Complex> psi_field) const {
  for (std::size_t i = 0; i < psi_free.size(); ++i) {
    if (!psi_free[i]) psi_field[i] = Complex{};
  }
}

DofMask free_dof_mask(const State& state) {
  DofMask mask;
  const std::size_t n = state.grid.size();
  mask.director_free.assign(n, true);
  mask.psi_free.assign(n, true);
  mask.psi_free.front() = false;
  mask.psi_free.back() = false;
  return mask;
}

std::vector<double> pack_free(const State& state, const DofMask& mask) {
  std::vector<double> out;
  out.reserve(3 * mask.free_director_count() + 2 * mask.free_psi_count());
  for (std::size_t i = 0; i < mask.director_free.size(); ++i) {
    if (!mask.director_free[i]) continue;
    const auto& n = state.director.values[i];
    out.insert(out.end(), {n.x, n.y, n.z});
  }
  for (std::size_t i = 0; i < mask.psi_free.size(); ++i) {
    if (!mask.psi_free[i]) continue;
    out.push_back(state.psi.values[i].real());
    out.push_back(state.psi.values[i].imag());
  }
  return out;
}

void unpack_free(std::span<const double> packed, const DofMask& mask, State& state) {
  const std::size_t expected = 3 * mask.free_director_count() + 2 * mask.free_psi_count();
  if (packed.size() != expected) {
    throw Error(ErrorKind::InvalidParameter, "packed vector has wrong length");
  }
  std::size_t k = 0;
  for (std::size_t i = 0; i < mask.director_free.size(); ++i) {
    if (!mask.director_free[i]) continue;
    state.director.values[i] = Vec3{packed[k], packed[k + 1], packed[k + 2]};
    k += 3;
  }
  for (std::size_t i = 0; i < mask.psi_free.size(); ++i) {
    if (!mask.psi_free[i]) continue;
    state.psi.values[i] = Complex{packed[k], packed[k + 1]};
    k += 2;
  }
}

}  // namespace chevron
