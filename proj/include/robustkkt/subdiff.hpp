#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "robustkkt/expr.hpp"
#include "robustkkt/scenario.hpp"
#include "robustkkt/setcalc.hpp"

namespace robustkkt {

enum class SubdiffMode { Limiting, Hull };
enum class Exactness { Exact, OuterEstimate };

const char* to_string(SubdiffMode m);
const char* to_string(Exactness e);
SubdiffMode parse_mode(const std::string& s);

struct SubdiffResult {
  PolytopeSet set;
  SubdiffMode mode = SubdiffMode::Hull;
  Exactness exactness = Exactness::Exact;
  std::vector<std::string> rules;  ///< applied rule names, first use order
};

/// Raised for trees outside the supported calculus, e.g. a product of two
/// factors that are both nonsmooth at the point.
class UnsupportedStructure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SubdiffOptions {
  double kink_tol = 1e-9;
  std::size_t max_components = 256;  ///< beyond this the union collapses to its hull
};

/// Subdifferential of kappa * e with respect to x at (x, v). In limiting mode the
/// result may be a union; hull mode returns its convex hull.
SubdiffResult scaled_subdiff(const Expr& e, std::span<const double> x, std::optional<double> v,
                             double kappa, SubdiffMode mode, const SubdiffOptions& opt = {});

inline SubdiffResult limiting_subdiff(const Expr& e, std::span<const double> x,
                                      std::optional<double> v, SubdiffMode mode,
                                      const SubdiffOptions& opt = {}) {
  return scaled_subdiff(e, x, v, 1.0, mode, opt);
}

struct SupRuleResult {
  SubdiffResult result;
  ScenarioMax scenarios;
  std::vector<double> used_scenarios;  ///< active scenarios plus plateau samples
};

/// Union (hull mode: convex hull) of the x-subdifferentials of g(., v) over the
/// maximizing scenarios v.
SupRuleResult sup_rule(const Expr& g, std::span<const double> x, const UncertaintySet& u,
                       double tol, SubdiffMode mode, const SubdiffOptions& opt = {},
                       std::size_t plateau_samples = 17);

struct ScalarizedSubdiff {
  SubdiffResult direct;       ///< engine applied to sum_j y_j f_j
  SubdiffResult combination;  ///< sum_j d(y_j f_j), or y_j * fixture_j where given
  std::vector<bool> from_fixture;
};

ScalarizedSubdiff scalarized_subdiff(std::span<const double> ystar, const std::vector<Expr>& f,
                                     std::span<const double> x, SubdiffMode mode,
                                     const std::vector<std::optional<PolytopeSet>>& fixtures = {},
                                     const SubdiffOptions& opt = {});

}  // namespace robustkkt
