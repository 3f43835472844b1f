#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "robustkkt/problem.hpp"

namespace robustkkt {

/// Worker count from ROBUSTKKT_THREADS, else hardware concurrency (at least 1).
unsigned worker_count();

/// Runs body(i) for i in [0, n) on worker_count() threads. Work is split in
/// contiguous blocks so results written by index are deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// max over V_i of g_i(x, .), zero-based i.
double phi_i(const ProblemSpec& spec, std::size_t i, std::span<const double> x);
/// max_i phi_i(x); -infinity without constraints.
double phi(const ProblemSpec& spec, std::span<const double> x);

std::vector<double> active_uncertainty(const ProblemSpec& spec, std::size_t i,
                                       std::span<const double> x, double tol);

struct ActiveSets {
  std::vector<double> phi_i;
  double phi = 0.0;
  std::vector<ScenarioMax> scenarios;  ///< per constraint
  std::vector<std::size_t> active_indices;  ///< I(x), zero-based
};

ActiveSets active_sets(const ProblemSpec& spec, std::span<const double> x, double tol);

/// x in Omega and phi(x) <= tol.
bool is_feasible(const ProblemSpec& spec, std::span<const double> x, double tol);

struct Region {
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
};

struct Raster {
  Region region;
  std::size_t nx = 0, ny = 0;
  std::vector<std::uint8_t> feasible;  ///< row-major, x fastest

  double x_at(std::size_t i) const;
  double y_at(std::size_t j) const;
  bool at(std::size_t i, std::size_t j) const { return feasible[j * nx + i] != 0; }
  std::size_t count() const;
};

/// Grid of nx x ny points including the region corners. Requires d = 2.
Raster raster(const ProblemSpec& spec, const Region& region, std::size_t nx, std::size_t ny,
              double tol);
/// CSV with header "x1,x2,feasible", rows in raster order, LF endings.
void write_csv(const Raster& r, std::ostream& os);

/// psi(x) = max{<y*, f(x) - f(xbar) + theta>, phi(x)}.
class Psi {
 public:
  Psi(const ProblemSpec& spec, Vec ystar, Vec xbar);
  double operator()(std::span<const double> x) const;
  /// The objective branch alone.
  double objective_branch(std::span<const double> x) const;

 private:
  const ProblemSpec& spec_;
  Vec ystar_, xbar_, fbar_;
};

}  // namespace robustkkt
