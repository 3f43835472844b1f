#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "robustkkt/certify.hpp"

namespace robustkkt {

// ---- efficiency ------------------------------------------------------------

enum class EfficiencyKind { Efficient, WeakEfficient, QuasiEfficient, WeakQuasiEfficient };
const char* to_string(EfficiencyKind k);
/// Accepts "efficient", "weak", "quasi", "weak-quasi".
EfficiencyKind parse_efficiency_kind(const std::string& s);
bool is_weak(EfficiencyKind k);
bool is_quasi(EfficiencyKind k);

enum class ConeRegion { MinusKMinusZero, MinusIntK };

/// Thrown for cone kinds the membership tests cannot handle.
class UnsupportedCone : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// y in -K \ {0} or y in -int K. Zero comparisons use `tol`; interior
/// membership is strict by more than `tol`.
bool cone_membership(std::span<const double> y, const ConeSpec& k, ConeRegion region, double tol = 1e-12);

/// Axis-aligned sample box.
struct SampleBox {
  Vec lo, hi;
  static SampleBox from(const Region& r) { return SampleBox{{r.x_lo, r.y_lo}, {r.x_hi, r.y_hi}}; }
};

/// Raster (d = 2, resolution^2 points including corners) or seeded uniform
/// sampling (other d, `resolution` points) of a box.
std::vector<Vec> sample_box(const SampleBox& box, std::size_t resolution, std::uint64_t seed = 1);

struct EfficiencyVerdict {
  EfficiencyKind kind = EfficiencyKind::WeakQuasiEfficient;
  bool no_counterexample = true;
  std::optional<Vec> counterexample;
  Vec violation;  ///< f(x) - f(xbar) + c theta at the counterexample
  double margin = 0.0;  ///< max_j sigma_j violation_j (orthant cones)
  SampleBox box;
  std::size_t resolution = 0;
  std::size_t samples = 0;
  std::size_t relation_hits = 0;  ///< samples violating the relation, feasible or not
};

/// Tests every sample x against f(x) - f(xbar) + c theta in -K \ {0} (strict
/// kinds) or -int K (weak kinds), with c = 1 or c = ||x - xbar|| (quasi kinds).
/// Returns the first robust-feasible violation in sample order. Throws
/// InfeasiblePoint for infeasible xbar.
EfficiencyVerdict classify_point(const ProblemSpec& spec, std::span<const double> xbar, EfficiencyKind kind,
                                 const SampleBox& box, std::size_t resolution, std::uint64_t seed = 1);

/// f(x) - f(z) + c theta with c as above.
Vec efficiency_relation(const ProblemSpec& spec, std::span<const double> x, std::span<const double> z,
                        EfficiencyKind kind);

// ---- Mond-Weir duality -----------------------------------------------------

struct DualTriple {
  Vec z;
  Vec ystar;
  Vec mu;
  Vec value;  ///< f(z)
};

DualTriple make_triple(const ProblemSpec& spec, Vec z, Vec ystar, Vec mu);

enum class Feasibility { Feasible, Infeasible, Inconclusive };
const char* to_string(Feasibility f);

struct DualFeasibility {
  Feasibility verdict = Feasibility::Infeasible;
  std::vector<std::string> failures;   ///< sign or complementarity failures
  std::optional<ZeroInSumWitness> witness;  ///< parts: objectives, mu_i > 0 constraints, ball
  std::vector<SetEvidence> objective_sets;
  std::vector<SetEvidence> constraint_sets;  ///< only constraints with mu_i > 0
  Vec phi;  ///< phi_i(z), equal to g_i(z, v_i) on the active scenarios
};

/// 0 in sum_j y_j df_j(z) + sum mu_i C_i(z) + <y*, theta> B* + N(z) and
/// mu_i g_i(z, v_i) >= -tol. The inner ball decides FEASIBLE; an outer ball
/// (where available) decides INFEASIBLE; a gap between them is INCONCLUSIVE.
DualFeasibility dual_feasible(const ProblemSpec& spec, const DualTriple& t, double tol,
                              std::size_t ball_vertices = 64);

/// Raised when search_kkt finds no certificate.
class NoCertificate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StrongDuality {
  DualTriple triple;
  KKTCertificate certificate;
  DualFeasibility feasibility;
};

StrongDuality strong_duality_from(const ProblemSpec& spec, std::span<const double> xbar,
                                  const SearchConfig& cfg = {});

struct DualityViolation {
  std::size_t sample = 0, triple = 0;
  Vec relation;  ///< f(x) - f(z) + ||x - z|| theta
};

struct WeakDualityResult {
  PseudoType kind = PseudoType::I;
  bool violated = false;
  std::size_t pairs = 0;
  std::optional<DualityViolation> first;
};

/// For every (sample, triple) pair checks f(x) not< f(z) - ||x - z|| theta
/// (type I, via -int K) or not<= (type II, via -K \ {0}). Throws
/// InfeasiblePoint for infeasible samples and std::invalid_argument for triples
/// that are not dual feasible.
WeakDualityResult weak_duality_check(const ProblemSpec& spec, const std::vector<Vec>& samples,
                                     const std::vector<DualTriple>& triples, PseudoType kind, double tol = 1e-9);

/// Up to `count` robust-feasible points of the box, seeded uniform draws.
std::vector<Vec> feasible_samples(const ProblemSpec& spec, const SampleBox& box, std::size_t count,
                                  std::uint64_t seed = 1, std::size_t max_draws = 1000000);

struct ConverseDuality {
  DualFeasibility feasibility;
  EfficiencyVerdict verdict;  ///< weak-quasi for type I, quasi for type II
};

/// Requires a dual-feasible triple with robust-feasible z (throws
/// std::invalid_argument and InfeasiblePoint otherwise), then classifies z.
ConverseDuality converse_duality_check(const ProblemSpec& spec, const DualTriple& t, PseudoType kind,
                                       const SampleBox& box, std::size_t resolution, double tol = 1e-9);

}  // namespace robustkkt
