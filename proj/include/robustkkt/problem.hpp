#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "robustkkt/expr.hpp"
#include "robustkkt/scenario.hpp"
#include "robustkkt/setcalc.hpp"
#include "robustkkt/subdiff.hpp"

namespace robustkkt {

struct Objective {
  std::string name;
  Expr f;
};

struct Constraint {
  std::string name;
  Expr g;
  UncertaintySet u;
};

/// Subdifferential set supplied verbatim for a named function at a point. For a
/// constraint it stands for the whole closed convex hull over active scenarios.
struct Fixture {
  std::string function;
  Vec point;
  PolytopeSet set;
};

struct Tolerances {
  double feasibility = 1e-8;  ///< phi(x) <= this counts as feasible
  double active = 1e-9;       ///< scenario and index activity
  double kkt = 1e-9;          ///< certificate residual
};

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemSpec {
  std::string name;
  std::size_t dim = 0;
  std::vector<Objective> objectives;
  std::vector<Constraint> constraints;
  ConeSpec cone;
  OmegaSpec omega;
  Vec theta;
  Norm norm = Norm::L2;
  SubdiffMode mode = SubdiffMode::Hull;
  Tolerances tol;
  std::vector<Fixture> fixtures;
  bool use_fixtures = false;  ///< fixtures replace engine sets when true
  std::vector<std::string> notes;

  std::size_t num_objectives() const { return objectives.size(); }
  std::size_t num_constraints() const { return constraints.size(); }

  /// Fixture for `function` at x (coordinatewise within 1e-12), if enabled.
  const Fixture* fixture_for(const std::string& function, std::span<const double> x) const;

  /// Throws SpecError on dimension mismatches, theta outside K, non-pointed K,
  /// unknown fixture names.
  void validate() const;
};

/// f(x) as a vector.
Vec eval_objectives(const ProblemSpec& spec, std::span<const double> x);

}  // namespace robustkkt
