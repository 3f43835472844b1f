#include "robustkkt/robustfeas.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <string>
#include <thread>

namespace robustkkt {

unsigned worker_count() {
  if (const char* env = std::getenv("ROBUSTKKT_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w * block; i < std::min(n, (w + 1) * block); ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double phi_i(const ProblemSpec& spec, std::size_t i, std::span<const double> x) {
  if (i >= spec.constraints.size()) throw std::out_of_range("constraint index out of range");
  const auto& c = spec.constraints[i];
  return maximize_scenarios(c.g, x, c.u, spec.tol.active).value;
}

double phi(const ProblemSpec& spec, std::span<const double> x) {
  double m = -INFINITY;
  for (std::size_t i = 0; i < spec.constraints.size(); ++i) m = std::max(m, phi_i(spec, i, x));
  return m;
}

std::vector<double> active_uncertainty(const ProblemSpec& spec, std::size_t i,
                                       std::span<const double> x, double tol) {
  if (i >= spec.constraints.size()) throw std::out_of_range("constraint index out of range");
  const auto& c = spec.constraints[i];
  return maximize_scenarios(c.g, x, c.u, tol).active;
}

ActiveSets active_sets(const ProblemSpec& spec, std::span<const double> x, double tol) {
  ActiveSets a;
  a.phi = -INFINITY;
  for (const auto& c : spec.constraints) {
    a.scenarios.push_back(maximize_scenarios(c.g, x, c.u, tol));
    a.phi_i.push_back(a.scenarios.back().value);
    a.phi = std::max(a.phi, a.phi_i.back());
  }
  for (std::size_t i = 0; i < a.phi_i.size(); ++i) {
    if (a.phi_i[i] >= a.phi - tol) a.active_indices.push_back(i);
  }
  return a;
}

bool is_feasible(const ProblemSpec& spec, std::span<const double> x, double tol) {
  if (!spec.omega.contains(x)) return false;
  for (const auto& c : spec.constraints) {
    if (envelope_value(c.g, x, c.u, {}, tol) > tol) return false;
  }
  return true;
}

double Raster::x_at(std::size_t i) const {
  if (nx <= 1) return region.x_lo;
  if (i + 1 == nx) return region.x_hi;
  return region.x_lo + (region.x_hi - region.x_lo) * static_cast<double>(i) / static_cast<double>(nx - 1);
}

double Raster::y_at(std::size_t j) const {
  if (ny <= 1) return region.y_lo;
  if (j + 1 == ny) return region.y_hi;
  return region.y_lo + (region.y_hi - region.y_lo) * static_cast<double>(j) / static_cast<double>(ny - 1);
}

std::size_t Raster::count() const {
  return static_cast<std::size_t>(std::count(feasible.begin(), feasible.end(), 1));
}

Raster raster(const ProblemSpec& spec, const Region& region, std::size_t nx, std::size_t ny,
              double tol) {
  if (spec.dim != 2) throw DimensionError("raster needs a two-dimensional problem");
  if (nx == 0 || ny == 0) throw std::invalid_argument("raster resolution must be positive");
  Raster r;
  r.region = region;
  r.nx = nx;
  r.ny = ny;
  r.feasible.assign(nx * ny, 0);
  parallel_for(ny, [&](std::size_t j) {
    Vec x{0.0, r.y_at(j)};
    for (std::size_t i = 0; i < nx; ++i) {
      x[0] = r.x_at(i);
      r.feasible[j * nx + i] = is_feasible(spec, x, tol) ? 1 : 0;
    }
  });
  return r;
}

void write_csv(const Raster& r, std::ostream& os) {
  os << "x1,x2,feasible\n";
  for (std::size_t j = 0; j < r.ny; ++j) {
    for (std::size_t i = 0; i < r.nx; ++i) {
      os << format_number(r.x_at(i)) << ',' << format_number(r.y_at(j)) << ',' << (r.at(i, j) ? 1 : 0)
         << '\n';
    }
  }
}

Psi::Psi(const ProblemSpec& spec, Vec ystar, Vec xbar)
    : spec_(spec), ystar_(std::move(ystar)), xbar_(std::move(xbar)) {
  if (ystar_.size() != spec.num_objectives()) throw DimensionError("psi: y* length mismatch");
  if (!dual_cone(spec.cone).contains(ystar_)) throw std::invalid_argument("psi: y* is not in the dual cone");
  fbar_ = eval_objectives(spec, xbar_);
}

double Psi::objective_branch(std::span<const double> x) const {
  const Vec fx = eval_objectives(spec_, x);
  double s = 0.0;
  for (std::size_t j = 0; j < fx.size(); ++j) s += ystar_[j] * (fx[j] - fbar_[j] + spec_.theta[j]);
  return s;
}

double Psi::operator()(std::span<const double> x) const {
  return std::max(objective_branch(x), phi(spec_, x));
}

}  // namespace robustkkt
