#pragma once

#include <string>
#include <string_view>

#include "json.hpp"
#include "robustkkt/certify.hpp"
#include "robustkkt/verify.hpp"

namespace robustkkt::report {

using Json = nlohmann::ordered_json;

inline constexpr int kReportVersion = 1;

/// 64-bit FNV-1a, as "fnv1a64:" followed by 16 hex digits.
std::string fnv1a64(std::string_view bytes);

/// Finite values as numbers with -0 folded to 0; infinities as "inf"/"-inf".
Json num(double x);
Json vec(std::span<const double> v);
Json vecs(const std::vector<Vec>& vs);
Json set(const PolytopeSet& s);
Json evidence(const SetEvidence& e);
Json scenarios(const ScenarioMax& s);

Json certificate(const KKTCertificate& c);
Json kkt_check(const KktCheck& c, double tol);
Json cq(const CqResult& r);
Json fuzzy(const FuzzyResult& r);
Json pseudo(const PseudoResult& r);
Json witness_check(const WitnessCheck& w);
Json efficiency(const EfficiencyVerdict& v);
Json triple(const DualTriple& t);
Json dual_feasibility(const DualFeasibility& f);
Json weak_duality(const WeakDualityResult& r, const std::vector<Vec>& samples);

/// Reads a number or a constant expression such as "sqrt(2)/4".
double read_number(const Json& j);
Vec read_vec(const Json& j);

/// {"ystar", "mu", "u", "v", "vbar" (numbers or null), "b", "a"}; missing
/// vbar entries default to null.
KKTCertificate read_certificate(const Json& j);
/// {"x", "ystar", "u"}.
PseudoWitness read_witness(const Json& j);
/// {"z", "ystar", "mu"}, or an array of such objects.
std::vector<DualTriple> read_triples(const ProblemSpec& spec, const Json& j);

/// Two-space indentation and a trailing newline.
std::string dump(const Json& j);

}  // namespace robustkkt::report
