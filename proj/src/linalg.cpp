#include "robustkkt/linalg.hpp"

#include <algorithm>

namespace robustkkt {
namespace {

// Reduced row echelon form in place; returns pivot columns.
std::vector<std::size_t> rref(std::vector<Vec>& m, std::size_t d, double tol) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < d && row < m.size(); ++col) {
    std::size_t best = row;
    for (std::size_t r = row + 1; r < m.size(); ++r) {
      if (std::abs(m[r][col]) > std::abs(m[best][col])) best = r;
    }
    if (std::abs(m[best][col]) <= tol) continue;
    std::swap(m[row], m[best]);
    const double p = m[row][col];
    for (double& x : m[row]) x /= p;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row) continue;
      const double f = m[r][col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < d; ++c) m[r][c] -= f * m[row][c];
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

std::vector<Vec> normalized_rows(const std::vector<Vec>& rows, std::size_t d) {
  std::vector<Vec> m;
  m.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.size() != d) throw DimensionError("null_space: row dimension mismatch");
    const double n = norm_inf(r);
    m.push_back(n > 0.0 ? scaled(r, 1.0 / n) : r);
  }
  return m;
}

}  // namespace

std::vector<Vec> null_space(const std::vector<Vec>& rows, std::size_t d, double tol) {
  auto m = normalized_rows(rows, d);
  const auto pivots = rref(m, d, tol);
  std::vector<bool> is_pivot(d, false);
  for (auto p : pivots) is_pivot[p] = true;

  std::vector<Vec> basis;
  for (std::size_t free = 0; free < d; ++free) {
    if (is_pivot[free]) continue;
    Vec v(d, 0.0);
    v[free] = 1.0;
    for (std::size_t k = 0; k < pivots.size(); ++k) v[pivots[k]] = -m[k][free];
    basis.push_back(std::move(v));
  }
  // Gram-Schmidt
  std::vector<Vec> ortho;
  for (auto& v : basis) {
    for (const auto& q : ortho) axpy(v, -dot(v, q), q);
    const double n = norm2(v);
    if (n > tol) ortho.push_back(scaled(v, 1.0 / n));
  }
  return ortho;
}

std::size_t rank(const std::vector<Vec>& rows, std::size_t d, double tol) {
  auto m = normalized_rows(rows, d);
  return rref(m, d, tol).size();
}

}  // namespace robustkkt
