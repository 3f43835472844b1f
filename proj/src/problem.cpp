#include "robustkkt/problem.hpp"

#include <cmath>

namespace robustkkt {

const Fixture* ProblemSpec::fixture_for(const std::string& function, std::span<const double> x) const {
  if (!use_fixtures) return nullptr;
  for (const auto& fx : fixtures) {
    if (fx.function != function || fx.point.size() != x.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < x.size(); ++i) same = same && std::abs(fx.point[i] - x[i]) <= 1e-12;
    if (same) return &fx;
  }
  return nullptr;
}

void ProblemSpec::validate() const {
  if (dim == 0) throw SpecError("dimension must be positive");
  if (objectives.empty()) throw SpecError("at least one objective is required");
  for (const auto& o : objectives) {
    if (o.f.dim() != dim) throw SpecError("objective '" + o.name + "' has the wrong dimension");
    if (o.f.has_uncertainty()) throw SpecError("objective '" + o.name + "' must not depend on v");
  }
  for (const auto& c : constraints) {
    if (c.g.dim() != dim) throw SpecError("constraint '" + c.name + "' has the wrong dimension");
    if (c.u.lo > c.u.hi) throw SpecError("constraint '" + c.name + "' has an empty uncertainty set");
  }
  if (cone.dim() != objectives.size()) {
    throw SpecError("cone dimension " + std::to_string(cone.dim()) + " differs from the number of objectives " +
                    std::to_string(objectives.size()));
  }
  if (theta.size() != objectives.size()) throw SpecError("theta must have one entry per objective");
  if (!cone.is_pointed()) throw SpecError("cone K is not pointed");
  if (!cone.contains(theta)) throw SpecError("theta does not lie in the cone K");
  if (omega.dim != dim) throw SpecError("omega has the wrong dimension");
  for (const auto& fx : fixtures) {
    bool known = false;
    for (const auto& o : objectives) known = known || o.name == fx.function;
    for (const auto& c : constraints) known = known || c.name == fx.function;
    if (!known) throw SpecError("fixture references unknown function '" + fx.function + "'");
    if (fx.point.size() != dim || fx.set.dim() != dim) {
      throw SpecError("fixture for '" + fx.function + "' has the wrong dimension");
    }
  }
}

Vec eval_objectives(const ProblemSpec& spec, std::span<const double> x) {
  Vec out;
  out.reserve(spec.objectives.size());
  for (const auto& o : spec.objectives) out.push_back(eval(o.f, x));
  return out;
}

}  // namespace robustkkt
