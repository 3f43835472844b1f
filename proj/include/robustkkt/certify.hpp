#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "robustkkt/lp.hpp"
#include "robustkkt/problem.hpp"
#include "robustkkt/robustfeas.hpp"

namespace robustkkt {

/// Raised when an operation needs a robust-feasible point and gets another.
class InfeasiblePoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Provenance { Engine, Fixture };
const char* to_string(Provenance p);

/// A subdifferential set together with where it came from.
struct SetEvidence {
  std::string function;
  PolytopeSet set;
  Provenance provenance = Provenance::Engine;
  Exactness exactness = Exactness::Exact;
  std::vector<std::string> rules;
  std::vector<double> scenarios;  ///< constraint sets: scenarios the union ran over
};

/// df_j(x): the fixture when enabled and present, else the engine in spec.mode.
SetEvidence objective_set(const ProblemSpec& spec, std::size_t j, std::span<const double> x);
/// Closed convex hull of the union of d_x g_i(x, v) over the active scenarios.
SetEvidence constraint_set(const ProblemSpec& spec, std::size_t i, std::span<const double> x);

/// Signs of the dual orthant; throws for generator cones.
std::vector<int> dual_signs(const ConeSpec& k);

/// Unit vectors of K+ on an angular grid with `per_dim` points per angle,
/// plus the normalized extreme rays of K+. Deterministic order.
std::vector<Vec> dual_sphere_grid(const ConeSpec& k, std::size_t per_dim = 24);

// ---- constraint qualification ----------------------------------------------

struct CqIndexVerdict {
  std::size_t index = 0;
  bool zero_in_sum = false;
  SetEvidence set;
  std::optional<ZeroInSumWitness> witness;
};

struct CqResult {
  bool holds = false;
  std::vector<CqIndexVerdict> per_index;  ///< one per i in I(x)
  ActiveSets active;
};

/// Throws InfeasiblePoint unless xbar is robust feasible.
CqResult check_cq(const ProblemSpec& spec, std::span<const double> xbar);

// ---- KKT certificates -------------------------------------------------------

struct KKTCertificate {
  Vec ystar;
  Vec mu;
  std::vector<Vec> u;  ///< u_j in df_j(xbar); the scalarized element is sum_j y_j u_j
  std::vector<Vec> v;  ///< v_i in the constraint set of i
  std::vector<std::optional<double>> vbar;  ///< active scenario per constraint
  Vec b;  ///< dual-ball element
  Vec a;  ///< normal-cone element
  double residual = 0.0;
};

struct KktCheck {
  bool valid = false;
  double residual = 0.0;
  std::vector<std::string> failures;
  std::vector<SetEvidence> objective_sets;
  std::vector<SetEvidence> constraint_sets;
};

/// Verifies every membership of the certificate and the residual
/// ||sum y_j u_j + sum mu_i v_i + <y*, theta> b + a||_2 <= tol.
/// Throws DimensionError on inconsistent field sizes.
KktCheck check_kkt(const ProblemSpec& spec, std::span<const double> xbar, const KKTCertificate& cert,
                   double tol);

struct SearchConfig {
  double eps_min = 1e-6;  ///< lower bound on sum |y_j|
  std::size_t ball_vertices = 64;
  std::size_t max_selections = 4096;
  std::size_t grid_per_dim = 24;  ///< heuristic fallback for generator cones
  LpOptions lp;
};

struct KktSearch {
  std::optional<KKTCertificate> certificate;
  std::optional<KktCheck> check;
  bool heuristic = false;  ///< generator-cone fallback was used
  std::size_t lps_solved = 0;
  std::vector<SetEvidence> objective_sets;
  std::vector<SetEvidence> constraint_sets;
};

/// One LP (per component selection in limiting mode) with y_j = sigma_j s_j and
/// normalization sum s + sum mu = 1. Throws InfeasiblePoint for infeasible xbar.
KktSearch search_kkt(const ProblemSpec& spec, std::span<const double> xbar, const SearchConfig& cfg = {});

// ---- fuzzy condition demonstrator -----------------------------------------

struct FuzzyConfig {
  double grid_step = 0.005;
  std::size_t alpha_steps = 40;
  double branch_tol = 1e-9;
  std::size_t ball_vertices = 64;
  LpOptions lp;
};

struct FuzzyKKTWitness {
  Vec x_eta;
  double psi = 0.0;
  double lambda1 = 0.0, lambda2 = 1.0;
  Vec mu;
  std::vector<std::optional<double>> v_eta;  ///< maximizing scenario per constraint
  double normalization_residual = 0.0;      ///< |lambda1/lambda2 ||y*||_1 + ||mu||_1 - 1|
  double objective_residual = 0.0;          ///< first complementarity relation
  std::vector<double> constraint_residuals;  ///< second relation, per constraint
  double inclusion_residual = 0.0;
  Vec u;  ///< element of d<y*, f>(x_eta) used
  std::vector<Vec> v;
  Vec b, a;
};

struct FuzzyResult {
  bool found = false;
  std::string diagnostic;
  std::optional<FuzzyKKTWitness> witness;
  std::size_t grid_points = 0;
};

FuzzyResult fuzzy_kkt_demo(const ProblemSpec& spec, std::span<const double> xbar, std::span<const double> ystar,
                           double eta, const FuzzyConfig& cfg = {});

// ---- pseudo convexity -------------------------------------------------------

enum class PseudoType { I, II };
const char* to_string(PseudoType t);
PseudoType parse_pseudo_type(const std::string& s);

enum class PseudoVerdict { VerifiedCandidateW, VerifiedCommonW, Inconclusive, WitnessedFailure };
const char* to_string(PseudoVerdict v);

struct PseudoConfig {
  Vec lo, hi;                    ///< sample box; defaults to xbar -/+ 1
  std::size_t per_axis = 21;     ///< grid points per coordinate
  std::size_t ystar_per_dim = 24;
  double premise_tol = 1e-12;
  double eps_strict = 1e-7;
  std::size_t ball_vertices = 64;
  LpOptions lp;
};

struct PseudoSample {
  Vec x;
  PseudoVerdict verdict = PseudoVerdict::VerifiedCandidateW;
  std::size_t premises_held = 0;  ///< y* for which the objective premise held
  std::optional<Vec> failing_ystar;  ///< first y* left inconclusive
};

struct PseudoResult {
  PseudoType type = PseudoType::I;
  std::vector<PseudoSample> samples;  ///< in grid order, x_1 fastest
  std::size_t ystar_count = 0;
  std::size_t candidate = 0, common = 0, inconclusive = 0;
  bool all_verified() const { return inconclusive == 0; }
};

PseudoResult pseudoconvex_test(const ProblemSpec& spec, std::span<const double> xbar, PseudoType type,
                               const PseudoConfig& cfg = {});

/// A user-supplied failure candidate: x, y* and one subgradient per objective.
struct PseudoWitness {
  Vec x;
  Vec ystar;
  std::vector<Vec> u;
};

struct WitnessCheck {
  PseudoVerdict verdict = PseudoVerdict::Inconclusive;
  bool premise = false;
  bool memberships = false;
  double lp_minimum = 0.0;  ///< min over admissible w of <u*, w> + ||x - xbar|| <y*, theta>
  std::string note;
};

/// The objective implication is refuted when the minimum above, taken over an
/// outer polyhedral ball and with exact LP arithmetic, is >= -1e-12.
WitnessCheck check_pseudo_witness(const ProblemSpec& spec, std::span<const double> xbar, PseudoType type,
                                  const PseudoWitness& w, std::size_t ball_vertices = 64);

}  // namespace robustkkt
