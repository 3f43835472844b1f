#include "robustkkt/report.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>

namespace robustkkt::report {

std::string fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf.data();
}

Json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x == 0.0 ? 0.0 : x;
}

Json vec(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

Json vecs(const std::vector<Vec>& vs) {
  Json a = Json::array();
  for (const auto& v : vs) a.push_back(vec(v));
  return a;
}

Json set(const PolytopeSet& s) {
  Json a = Json::array();
  for (const auto& c : s.components) a.push_back(vecs(c.vertices));
  return a;
}

Json evidence(const SetEvidence& e) {
  Json j;
  j["function"] = e.function;
  j["provenance"] = to_string(e.provenance);
  j["exactness"] = to_string(e.exactness);
  j["rules"] = e.rules;
  if (!e.scenarios.empty()) j["scenarios"] = vec(e.scenarios);
  j["components"] = set(e.set);
  return j;
}

Json scenarios(const ScenarioMax& s) {
  Json j;
  j["value"] = num(s.value);
  j["active"] = vec(s.active);
  Json p = Json::array();
  for (const auto& [a, b] : s.plateaus) p.push_back(Json::array({num(a), num(b)}));
  j["plateaus"] = p;
  return j;
}

Json certificate(const KKTCertificate& c) {
  Json j;
  j["ystar"] = vec(c.ystar);
  j["mu"] = vec(c.mu);
  j["u"] = vecs(c.u);
  j["v"] = vecs(c.v);
  Json vb = Json::array();
  for (const auto& v : c.vbar) vb.push_back(v ? num(*v) : Json(nullptr));
  j["vbar"] = vb;
  j["b"] = vec(c.b);
  j["a"] = vec(c.a);
  j["residual"] = num(c.residual);
  return j;
}

Json kkt_check(const KktCheck& c, double tol) {
  Json j;
  j["valid"] = c.valid;
  j["residual"] = num(c.residual);
  j["residual_tol"] = num(tol);
  j["failures"] = c.failures;
  return j;
}

Json cq(const CqResult& r) {
  Json j;
  j["holds"] = r.holds;
  j["phi"] = vec(r.active.phi_i);
  Json idx = Json::array();
  for (const auto& v : r.per_index) {
    Json e;
    e["constraint"] = v.set.function;
    e["zero_in_set_plus_normal_cone"] = v.zero_in_sum;
    e["active_scenarios"] = scenarios(r.active.scenarios[v.index]);
    if (v.witness) {
      e["witness"] = {{"point", vec(v.witness->points.front())}, {"cone_point", vec(v.witness->cone_point)},
                      {"residual", num(v.witness->residual)}};
    }
    idx.push_back(e);
  }
  j["active_indices"] = idx;
  return j;
}

Json fuzzy(const FuzzyResult& r) {
  Json j;
  j["found"] = r.found;
  j["grid_points"] = r.grid_points;
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  if (r.witness) {
    const auto& w = *r.witness;
    Json x;
    x["x_eta"] = vec(w.x_eta);
    x["psi"] = num(w.psi);
    x["lambda1"] = num(w.lambda1);
    x["lambda2"] = num(w.lambda2);
    x["mu"] = vec(w.mu);
    Json v = Json::array();
    for (const auto& s : w.v_eta) v.push_back(s ? num(*s) : Json(nullptr));
    x["v_eta"] = v;
    x["u"] = vec(w.u);
    x["v"] = vecs(w.v);
    x["b"] = vec(w.b);
    x["a"] = vec(w.a);
    x["normalization_residual"] = num(w.normalization_residual);
    x["objective_residual"] = num(w.objective_residual);
    x["constraint_residuals"] = vec(w.constraint_residuals);
    x["inclusion_residual"] = num(w.inclusion_residual);
    j["witness"] = x;
  }
  return j;
}

Json pseudo(const PseudoResult& r) {
  Json j;
  j["type"] = to_string(r.type);
  j["samples"] = r.samples.size();
  j["ystar_count"] = r.ystar_count;
  j["verified_candidate_w"] = r.candidate;
  j["verified_common_w"] = r.common;
  j["inconclusive"] = r.inconclusive;
  Json inc = Json::array();
  for (const auto& s : r.samples) {
    if (s.verdict != PseudoVerdict::Inconclusive) continue;
    Json e;
    e["x"] = vec(s.x);
    e["ystar"] = s.failing_ystar ? vec(*s.failing_ystar) : Json(nullptr);
    inc.push_back(e);
  }
  j["inconclusive_samples"] = inc;
  return j;
}

Json witness_check(const WitnessCheck& w) {
  Json j;
  j["verdict"] = to_string(w.verdict);
  j["premise"] = w.premise;
  j["memberships"] = w.memberships;
  j["lp_minimum"] = num(w.lp_minimum);
  j["lp_minimum_tol"] = num(1e-12);
  if (!w.note.empty()) j["note"] = w.note;
  return j;
}

Json efficiency(const EfficiencyVerdict& v) {
  Json j;
  j["kind"] = to_string(v.kind);
  j["no_counterexample"] = v.no_counterexample;
  j["box"] = {{"lo", vec(v.box.lo)}, {"hi", vec(v.box.hi)}};
  j["resolution"] = v.resolution;
  j["samples"] = v.samples;
  j["relation_hits"] = v.relation_hits;
  if (v.counterexample) {
    j["counterexample"] = {{"x", vec(*v.counterexample)}, {"relation", vec(v.violation)}, {"margin", num(v.margin)}};
  }
  j["cone_tol"] = num(1e-12);
  return j;
}

Json triple(const DualTriple& t) {
  Json j;
  j["z"] = vec(t.z);
  j["ystar"] = vec(t.ystar);
  j["mu"] = vec(t.mu);
  j["value"] = vec(t.value);
  return j;
}

Json dual_feasibility(const DualFeasibility& f) {
  Json j;
  j["verdict"] = to_string(f.verdict);
  j["failures"] = f.failures;
  j["phi"] = vec(f.phi);
  if (f.witness) {
    j["witness"] = {{"points", vecs(f.witness->points)},
                    {"cone_point", vec(f.witness->cone_point)},
                    {"residual", num(f.witness->residual)}};
  }
  return j;
}

Json weak_duality(const WeakDualityResult& r, const std::vector<Vec>& samples) {
  Json j;
  j["kind"] = to_string(r.kind);
  j["violated"] = r.violated;
  j["pairs"] = r.pairs;
  if (r.first) {
    j["violation"] = {{"sample", r.first->sample},
                      {"x", vec(samples[r.first->sample])},
                      {"triple", r.first->triple},
                      {"relation", vec(r.first->relation)}};
  }
  return j;
}

double read_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_constant(j.get<std::string>());
  throw std::invalid_argument("expected a number or a constant expression, got " + j.dump());
}

Vec read_vec(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array of numbers, got " + j.dump());
  Vec v;
  for (const auto& e : j) v.push_back(read_number(e));
  return v;
}

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::vector<Vec> read_vecs(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected an array of vectors, got " + j.dump());
  std::vector<Vec> out;
  for (const auto& e : j) out.push_back(read_vec(e));
  return out;
}

}  // namespace

KKTCertificate read_certificate(const Json& j) {
  KKTCertificate c;
  c.ystar = read_vec(field(j, "ystar"));
  c.mu = read_vec(field(j, "mu"));
  c.u = read_vecs(field(j, "u"));
  c.v = read_vecs(field(j, "v"));
  c.b = read_vec(field(j, "b"));
  c.a = read_vec(field(j, "a"));
  c.vbar.assign(c.mu.size(), std::nullopt);
  if (j.contains("vbar")) {
    const Json& vb = j.at("vbar");
    if (!vb.is_array() || vb.size() != c.mu.size()) throw std::invalid_argument("vbar needs one entry per mu");
    for (std::size_t i = 0; i < vb.size(); ++i) {
      if (!vb[i].is_null()) c.vbar[i] = read_number(vb[i]);
    }
  }
  return c;
}

PseudoWitness read_witness(const Json& j) {
  return PseudoWitness{read_vec(field(j, "x")), read_vec(field(j, "ystar")), read_vecs(field(j, "u"))};
}

std::vector<DualTriple> read_triples(const ProblemSpec& spec, const Json& j) {
  std::vector<DualTriple> out;
  auto one = [&](const Json& t) {
    out.push_back(make_triple(spec, read_vec(field(t, "z")), read_vec(field(t, "ystar")), read_vec(field(t, "mu"))));
  };
  if (j.is_array()) {
    for (const auto& t : j) one(t);
  } else {
    one(j);
  }
  return out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace robustkkt::report
