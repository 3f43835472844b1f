#pragma once

#include <cstddef>
#include <vector>

#include "robustkkt/linalg.hpp"

namespace robustkkt {

enum class RowSense { LessEq, Equal, GreaterEq };

/// max c^T x  s.t.  rows, x >= 0.
struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<Vec> rows;
  std::vector<RowSense> sense;
  Vec rhs;
  Vec objective;  ///< maximized; empty means pure feasibility

  explicit LinearProgram(std::size_t n = 0) : num_vars(n) {}
  void add_row(Vec coeffs, RowSense s, double b);
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(LpStatus s);

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  Vec x;
  std::size_t pivots = 0;
};

struct LpOptions {
  bool exact = false;          ///< rational arithmetic (GMP) instead of doubles
  double tol = 1e-9;           ///< feasibility / optimality tolerance (floating mode)
  double pivot_tol = 1e-12;    ///< smallest admissible pivot magnitude (floating mode)
  std::size_t max_pivots = 100000;
};

/// Dense two-phase primal simplex. Dantzig pricing, switching to Bland's rule
/// after a run of degenerate pivots.
LpResult solve_lp(const LinearProgram& lp, const LpOptions& opt = {});

}  // namespace robustkkt
