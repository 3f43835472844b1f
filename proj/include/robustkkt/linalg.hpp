#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace robustkkt {

/// Dense real vector. Decision points, subgradients and set vertices all use it.
using Vec = std::vector<double>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require_same_dim(std::span<const double> a, std::span<const double> b,
                             const char* where) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(where) + ": dimension mismatch (" +
                         std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vec add(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b, "add");
  Vec r(a.begin(), a.end());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

inline Vec sub(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b, "sub");
  Vec r(a.begin(), a.end());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

inline Vec scaled(std::span<const double> a, double c) {
  Vec r(a.begin(), a.end());
  for (double& x : r) x *= c;
  return r;
}

/// r += c * a
inline void axpy(Vec& r, double c, std::span<const double> a) {
  require_same_dim(r, a, "axpy");
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += c * a[i];
}

inline double norm2(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

inline double norm1(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += std::abs(x);
  return s;
}

inline double norm_inf(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s = std::max(s, std::abs(x));
  return s;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b, "max_abs_diff");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

/// Orthonormal basis of the null space of the given rows (each of length d),
/// computed by Gaussian elimination with partial pivoting.
std::vector<Vec> null_space(const std::vector<Vec>& rows, std::size_t d, double tol = 1e-10);

/// Numerical rank of the row set.
std::size_t rank(const std::vector<Vec>& rows, std::size_t d, double tol = 1e-10);

}  // namespace robustkkt
