#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "robustkkt/expr.hpp"

namespace robustkkt {

/// Uncertainty set of one constraint: a compact interval or a finite scenario list.
struct UncertaintySet {
  enum class Kind { Interval, Finite };
  Kind kind = Kind::Interval;
  double lo = 0.0, hi = 0.0;
  std::vector<double> points;

  static UncertaintySet interval(double lo, double hi);
  static UncertaintySet finite(std::vector<double> pts);
};

struct MaximizerOptions {
  std::size_t grid = 1001;
  double width = 1e-10;          ///< golden-section stopping width
  double cluster_radius = 1e-6;  ///< maximizers closer than this merge
  std::size_t max_candidates = 16;  ///< local grid maxima refined
};

struct ScenarioMax {
  double value = 0.0;
  /// Representatives of the maximizers within tol of value, ascending.
  std::vector<double> active;
  /// Runs [a, b] on which g stays within tol of value (a < b).
  std::vector<std::pair<double, double>> plateaus;
};

/// max over v in U of g(x, v) together with the active scenarios. A
/// v-independent g yields g(x) and the whole set as active.
ScenarioMax maximize_scenarios(const Expr& g, std::span<const double> x, const UncertaintySet& u,
                               double tol = 1e-9, const MaximizerOptions& opt = {});

/// Value only; exits early once some scenario exceeds `stop_above`.
double envelope_value(const Expr& g, std::span<const double> x, const UncertaintySet& u,
                      const MaximizerOptions& opt = {},
                      double stop_above = std::numeric_limits<double>::infinity());

}  // namespace robustkkt
