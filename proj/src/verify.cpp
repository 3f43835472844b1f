#include "robustkkt/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "robustkkt/lp.hpp"

namespace robustkkt {

const char* to_string(EfficiencyKind k) {
  switch (k) {
    case EfficiencyKind::Efficient:
      return "efficient";
    case EfficiencyKind::WeakEfficient:
      return "weak";
    case EfficiencyKind::QuasiEfficient:
      return "quasi";
    case EfficiencyKind::WeakQuasiEfficient:
      return "weak-quasi";
  }
  return "?";
}

EfficiencyKind parse_efficiency_kind(const std::string& s) {
  if (s == "efficient") return EfficiencyKind::Efficient;
  if (s == "weak") return EfficiencyKind::WeakEfficient;
  if (s == "quasi") return EfficiencyKind::QuasiEfficient;
  if (s == "weak-quasi") return EfficiencyKind::WeakQuasiEfficient;
  throw std::invalid_argument("unknown efficiency kind '" + s + "' (efficient, weak, quasi, weak-quasi)");
}

bool is_weak(EfficiencyKind k) { return k == EfficiencyKind::WeakEfficient || k == EfficiencyKind::WeakQuasiEfficient; }
bool is_quasi(EfficiencyKind k) {
  return k == EfficiencyKind::QuasiEfficient || k == EfficiencyKind::WeakQuasiEfficient;
}

const char* to_string(Feasibility f) {
  switch (f) {
    case Feasibility::Feasible:
      return "FEASIBLE";
    case Feasibility::Infeasible:
      return "INFEASIBLE";
    case Feasibility::Inconclusive:
      return "INCONCLUSIVE";
  }
  return "?";
}

namespace {

// Largest t <= 1 with -y = sum lambda_k g_k and every lambda_k >= t.
bool in_minus_interior_generated(std::span<const double> y, const PolyCone& c, double tol) {
  const std::size_t m = c.generators.size(), p = c.dim;
  if (m == 0 || rank(c.generators, p) < p) return false;
  // Variables lambda_k = t + s_k with s_k >= 0, t = t+ - t-.
  LinearProgram lp(m + 2);
  for (std::size_t r = 0; r < p; ++r) {
    Vec row(m + 2, 0.0);
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      row[k] = c.generators[k][r];
      sum += c.generators[k][r];
    }
    row[m] = sum;
    row[m + 1] = -sum;
    lp.add_row(std::move(row), RowSense::Equal, -y[r]);
  }
  Vec cap(m + 2, 0.0);
  cap[m] = 1.0;
  cap[m + 1] = -1.0;
  lp.add_row(cap, RowSense::LessEq, 1.0);
  lp.objective = cap;
  const LpResult r = solve_lp(lp);
  return r.status == LpStatus::Optimal && r.objective > tol;
}

double orthant_margin(std::span<const double> y, const std::vector<int>& signs) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < y.size(); ++j) m = std::max(m, signs[j] * y[j]);
  return m;
}

void require_feasible_point(const ProblemSpec& spec, std::span<const double> x) {
  if (x.size() != spec.dim) throw DimensionError("point has the wrong dimension");
  if (!is_feasible(spec, x, spec.tol.feasibility)) throw InfeasiblePoint("point is not robust feasible");
}

}  // namespace

bool cone_membership(std::span<const double> y, const ConeSpec& k, ConeRegion region, double tol) {
  if (y.size() != k.dim()) throw DimensionError("cone_membership: dimension mismatch");
  if (k.kind == ConeSpec::Kind::SignOrthant) {
    const double m = orthant_margin(y, k.signs);
    if (region == ConeRegion::MinusIntK) return m < -tol;
    return m <= tol && norm_inf(y) > tol;
  }
  if (!k.is_pointed()) throw UnsupportedCone("cone_membership: generator cone must be pointed");
  if (region == ConeRegion::MinusIntK) return in_minus_interior_generated(y, k.cone, tol);
  const Vec neg = scaled(y, -1.0);
  return norm_inf(y) > tol && contains(k.cone, neg, tol);
}

std::vector<Vec> sample_box(const SampleBox& box, std::size_t resolution, std::uint64_t seed) {
  const std::size_t d = box.lo.size();
  if (box.hi.size() != d || d == 0) throw DimensionError("sample_box: lo and hi must have the same positive size");
  std::vector<Vec> out;
  if (d == 2) {
    if (resolution < 2) throw std::invalid_argument("sample_box: raster resolution must be at least 2");
    out.reserve(resolution * resolution);
    // Same grid as raster(): the last point is exactly hi.
    const auto at = [&](std::size_t r, std::size_t k) {
      if (k + 1 == resolution) return box.hi[r];
      return box.lo[r] + (box.hi[r] - box.lo[r]) * static_cast<double>(k) / static_cast<double>(resolution - 1);
    };
    for (std::size_t j = 0; j < resolution; ++j) {
      for (std::size_t i = 0; i < resolution; ++i) out.push_back({at(0, i), at(1, j)});
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  out.reserve(resolution);
  for (std::size_t s = 0; s < resolution; ++s) {
    Vec x(d);
    for (std::size_t r = 0; r < d; ++r) x[r] = box.lo[r] + (box.hi[r] - box.lo[r]) * u(rng);
    out.push_back(std::move(x));
  }
  return out;
}

Vec efficiency_relation(const ProblemSpec& spec, std::span<const double> x, std::span<const double> z,
                        EfficiencyKind kind) {
  const double c = is_quasi(kind) ? norm_value(spec.norm, sub(x, z)) : 1.0;
  Vec r = sub(eval_objectives(spec, x), eval_objectives(spec, z));
  axpy(r, c, spec.theta);
  return r;
}

EfficiencyVerdict classify_point(const ProblemSpec& spec, std::span<const double> xbar, EfficiencyKind kind,
                                 const SampleBox& box, std::size_t resolution, std::uint64_t seed) {
  require_feasible_point(spec, xbar);
  if (box.lo.size() != spec.dim) throw DimensionError("classify_point: box has the wrong dimension");
  EfficiencyVerdict v;
  v.kind = kind;
  v.box = box;
  v.resolution = resolution;
  const std::vector<Vec> xs = sample_box(box, resolution, seed);
  v.samples = xs.size();
  const ConeRegion region = is_weak(kind) ? ConeRegion::MinusIntK : ConeRegion::MinusKMinusZero;
  const Vec fbar = eval_objectives(spec, xbar);

  // The relation is cheap; feasibility runs only on samples that violate it.
  std::vector<std::uint8_t> hit(xs.size(), 0);
  parallel_for(xs.size(), [&](std::size_t s) {
    const Vec& x = xs[s];
    const double c = is_quasi(kind) ? norm_value(spec.norm, sub(x, xbar)) : 1.0;
    Vec r = sub(eval_objectives(spec, x), fbar);
    axpy(r, c, spec.theta);
    if (cone_membership(r, spec.cone, region)) hit[s] = 1;
  });
  for (std::size_t s = 0; s < xs.size(); ++s) {
    if (!hit[s]) continue;
    ++v.relation_hits;
    if (!is_feasible(spec, xs[s], spec.tol.feasibility)) continue;
    v.no_counterexample = false;
    v.counterexample = xs[s];
    v.violation = efficiency_relation(spec, xs[s], xbar, kind);
    if (spec.cone.kind == ConeSpec::Kind::SignOrthant) v.margin = orthant_margin(v.violation, spec.cone.signs);
    break;
  }
  return v;
}

DualTriple make_triple(const ProblemSpec& spec, Vec z, Vec ystar, Vec mu) {
  if (z.size() != spec.dim || ystar.size() != spec.num_objectives() || mu.size() != spec.num_constraints()) {
    throw DimensionError("dual triple: z, y* or mu has the wrong dimension");
  }
  DualTriple t{std::move(z), std::move(ystar), std::move(mu), {}};
  t.value = eval_objectives(spec, t.z);
  return t;
}

DualFeasibility dual_feasible(const ProblemSpec& spec, const DualTriple& t, double tol, std::size_t ball_vertices) {
  const std::size_t p = spec.num_objectives(), n = spec.num_constraints(), d = spec.dim;
  if (t.z.size() != d || t.ystar.size() != p || t.mu.size() != n) {
    throw DimensionError("dual_feasible: z, y* or mu has the wrong dimension");
  }
  DualFeasibility out;
  if (!spec.omega.contains(t.z)) out.failures.push_back("z is not in Omega");
  if (!dual_cone(spec.cone).contains(t.ystar, 1e-12)) out.failures.push_back("y* is not in K+");
  if (norm_inf(t.ystar) <= 1e-12) out.failures.push_back("y* is zero");
  for (std::size_t i = 0; i < n; ++i) {
    if (t.mu[i] < 0.0) out.failures.push_back("mu_" + std::to_string(i + 1) + " is negative");
  }
  out.phi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.phi[i] = phi_i(spec, i, t.z);
    if (t.mu[i] * out.phi[i] < -tol) {
      out.failures.push_back("mu_" + std::to_string(i + 1) + " g_" + std::to_string(i + 1) + "(z, v) < 0");
    }
  }
  if (!out.failures.empty()) {
    out.verdict = Feasibility::Infeasible;
    return out;
  }

  std::vector<PolytopeSet> parts;
  for (std::size_t j = 0; j < p; ++j) {
    out.objective_sets.push_back(objective_set(spec, j, t.z));
    parts.push_back(scale(out.objective_sets.back().set, t.ystar[j]));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (t.mu[i] <= 0.0) continue;
    out.constraint_sets.push_back(constraint_set(spec, i, t.z));
    parts.push_back(scale(out.constraint_sets.back().set, t.mu[i]));
  }
  const double radius = dot(t.ystar, spec.theta);
  const PolyCone normal = normal_cone(spec.omega, t.z);
  auto with_ball = [&](const Polytope& ball) {
    std::vector<PolytopeSet> all = parts;
    all.push_back(PolytopeSet::single(scale(ball, radius)));
    return zero_in_sum(all, normal);
  };
  const ZeroInSumResult inner = with_ball(dual_ball(spec.norm, d, ball_vertices, BallMode::Inner));
  if (inner.sat) {
    out.verdict = Feasibility::Feasible;
    out.witness = inner.witness;
    return out;
  }
  const bool exact_ball = spec.norm != Norm::L2 || d == 1 || radius == 0.0;
  if (exact_ball) {
    out.verdict = Feasibility::Infeasible;
    return out;
  }
  if (d != 2) {
    out.verdict = Feasibility::Inconclusive;
    return out;
  }
  const ZeroInSumResult outer = with_ball(dual_ball(spec.norm, d, ball_vertices, BallMode::Outer));
  out.verdict = outer.sat ? Feasibility::Inconclusive : Feasibility::Infeasible;
  return out;
}

StrongDuality strong_duality_from(const ProblemSpec& spec, std::span<const double> xbar, const SearchConfig& cfg) {
  const KktSearch s = search_kkt(spec, xbar, cfg);
  if (!s.certificate) throw NoCertificate("strong duality: no KKT certificate found at xbar");
  StrongDuality out;
  out.certificate = *s.certificate;
  out.triple = make_triple(spec, Vec(xbar.begin(), xbar.end()), out.certificate.ystar, out.certificate.mu);
  out.feasibility = dual_feasible(spec, out.triple, spec.tol.kkt);
  return out;
}

WeakDualityResult weak_duality_check(const ProblemSpec& spec, const std::vector<Vec>& samples,
                                     const std::vector<DualTriple>& triples, PseudoType kind, double tol) {
  for (const Vec& x : samples) require_feasible_point(spec, x);
  for (std::size_t k = 0; k < triples.size(); ++k) {
    if (dual_feasible(spec, triples[k], tol).verdict != Feasibility::Feasible) {
      throw std::invalid_argument("weak duality: triple " + std::to_string(k + 1) + " is not dual feasible");
    }
  }
  WeakDualityResult out;
  out.kind = kind;
  out.pairs = samples.size() * triples.size();
  const ConeRegion region = kind == PseudoType::I ? ConeRegion::MinusIntK : ConeRegion::MinusKMinusZero;
  std::vector<Vec> fx(samples.size());
  parallel_for(samples.size(), [&](std::size_t s) { fx[s] = eval_objectives(spec, samples[s]); });
  // First violating triple per sample; reduced in sample order.
  std::vector<std::size_t> hit(samples.size(), triples.size());
  parallel_for(samples.size(), [&](std::size_t s) {
    for (std::size_t k = 0; k < triples.size(); ++k) {
      Vec r = sub(fx[s], triples[k].value);
      axpy(r, norm_value(spec.norm, sub(samples[s], triples[k].z)), spec.theta);
      if (cone_membership(r, spec.cone, region)) {
        hit[s] = k;
        return;
      }
    }
  });
  for (std::size_t s = 0; s < samples.size(); ++s) {
    if (hit[s] == triples.size()) continue;
    out.violated = true;
    const DualTriple& t = triples[hit[s]];
    Vec r = sub(fx[s], t.value);
    axpy(r, norm_value(spec.norm, sub(samples[s], t.z)), spec.theta);
    out.first = DualityViolation{s, hit[s], std::move(r)};
    break;
  }
  return out;
}

std::vector<Vec> feasible_samples(const ProblemSpec& spec, const SampleBox& box, std::size_t count,
                                  std::uint64_t seed, std::size_t max_draws) {
  const std::size_t d = box.lo.size();
  if (d != spec.dim || box.hi.size() != d) throw DimensionError("feasible_samples: box has the wrong dimension");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> out;
  for (std::size_t draw = 0; draw < max_draws && out.size() < count; ++draw) {
    Vec x(d);
    for (std::size_t r = 0; r < d; ++r) x[r] = box.lo[r] + (box.hi[r] - box.lo[r]) * u(rng);
    if (is_feasible(spec, x, spec.tol.feasibility)) out.push_back(std::move(x));
  }
  return out;
}

ConverseDuality converse_duality_check(const ProblemSpec& spec, const DualTriple& t, PseudoType kind,
                                       const SampleBox& box, std::size_t resolution, double tol) {
  require_feasible_point(spec, t.z);
  ConverseDuality out;
  out.feasibility = dual_feasible(spec, t, tol);
  if (out.feasibility.verdict != Feasibility::Feasible) {
    throw std::invalid_argument("converse duality: triple is not dual feasible");
  }
  const EfficiencyKind k = kind == PseudoType::I ? EfficiencyKind::WeakQuasiEfficient : EfficiencyKind::QuasiEfficient;
  out.verdict = classify_point(spec, t.z, k, box, resolution);
  return out;
}

}  // namespace robustkkt
