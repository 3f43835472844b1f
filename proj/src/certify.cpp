#include "robustkkt/certify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace robustkkt {

const char* to_string(Provenance p) { return p == Provenance::Engine ? "engine" : "fixture"; }

const char* to_string(PseudoType t) { return t == PseudoType::I ? "I" : "II"; }

PseudoType parse_pseudo_type(const std::string& s) {
  if (s == "I" || s == "i" || s == "1") return PseudoType::I;
  if (s == "II" || s == "ii" || s == "2") return PseudoType::II;
  throw std::invalid_argument("unknown pseudo convexity type '" + s + "' (expected I or II)");
}

const char* to_string(PseudoVerdict v) {
  switch (v) {
    case PseudoVerdict::VerifiedCandidateW:
      return "VERIFIED-CANDIDATE-W";
    case PseudoVerdict::VerifiedCommonW:
      return "VERIFIED-COMMON-W";
    case PseudoVerdict::Inconclusive:
      return "INCONCLUSIVE";
    case PseudoVerdict::WitnessedFailure:
      return "WITNESSED-FAILURE";
  }
  return "?";
}

SetEvidence objective_set(const ProblemSpec& spec, std::size_t j, std::span<const double> x) {
  const auto& o = spec.objectives.at(j);
  SetEvidence e;
  e.function = o.name;
  if (const Fixture* fx = spec.fixture_for(o.name, x)) {
    e.set = fx->set;
    e.provenance = Provenance::Fixture;
    e.rules = {"fixture"};
    return e;
  }
  SubdiffResult r = limiting_subdiff(o.f, x, std::nullopt, spec.mode);
  e.set = std::move(r.set);
  e.exactness = r.exactness;
  e.rules = std::move(r.rules);
  return e;
}

SetEvidence constraint_set(const ProblemSpec& spec, std::size_t i, std::span<const double> x) {
  const auto& c = spec.constraints.at(i);
  SetEvidence e;
  e.function = c.name;
  if (const Fixture* fx = spec.fixture_for(c.name, x)) {
    e.set = PolytopeSet::single(hull(fx->set));
    e.provenance = Provenance::Fixture;
    e.rules = {"fixture"};
    e.scenarios = maximize_scenarios(c.g, x, c.u, spec.tol.active).active;
    return e;
  }
  // The closed convex hull of the union is the same in both modes.
  SupRuleResult r = sup_rule(c.g, x, c.u, spec.tol.active, SubdiffMode::Hull);
  e.set = PolytopeSet::single(hull(r.result.set));
  e.exactness = r.result.exactness;
  e.rules = std::move(r.result.rules);
  e.scenarios = std::move(r.used_scenarios);
  return e;
}

std::vector<int> dual_signs(const ConeSpec& k) {
  if (k.kind != ConeSpec::Kind::SignOrthant) throw std::invalid_argument("dual_signs: cone is not a sign orthant");
  return dual_cone(k).signs;
}

namespace {

constexpr double kMemberTol = 1e-9;

// Points of the unit sphere given by hyperspherical angles.
Vec from_angles(std::span<const double> ang) {
  Vec y(ang.size() + 1, 0.0);
  double s = 1.0;
  for (std::size_t k = 0; k < ang.size(); ++k) {
    y[k] = s * std::cos(ang[k]);
    s *= std::sin(ang[k]);
  }
  y.back() = s;
  for (double& c : y) {
    if (std::abs(c) < 1e-15) c = 0.0;
  }
  return y;
}

void push_unique(std::vector<Vec>& out, Vec y) {
  for (const auto& z : out) {
    if (max_abs_diff(z, y) <= 1e-12) return;
  }
  out.push_back(std::move(y));
}

// Angle odometer: angle k runs over [0, top[k]] with per_dim points (or a
// half-open range when open_last is set for the final angle).
template <class F>
void angle_grid(std::size_t nang, std::size_t per_dim, const std::vector<double>& top, bool open_last, F&& f) {
  std::vector<std::size_t> idx(nang, 0);
  Vec ang(nang, 0.0);
  while (true) {
    for (std::size_t k = 0; k < nang; ++k) {
      const bool open = open_last && k + 1 == nang;
      const double denom = open ? static_cast<double>(per_dim) : static_cast<double>(per_dim - 1);
      ang[k] = top[k] * static_cast<double>(idx[k]) / denom;
    }
    f(ang);
    std::size_t k = 0;
    while (k < nang && ++idx[k] == per_dim) idx[k++] = 0;
    if (k == nang) break;
  }
}

std::vector<Vec> cone_columns(const PolyCone& c) {
  std::vector<Vec> cols;
  for (std::size_t k = 0; k < c.generators.size(); ++k) {
    cols.push_back(c.generators[k]);
    if (c.lineality[k]) cols.push_back(scaled(c.generators[k], -1.0));
  }
  return cols;
}

// sum_j y_j S_j as a reduced union.
PolytopeSet combination(const std::vector<SetEvidence>& sets, std::span<const double> y, std::size_t d,
                        std::size_t max_components = 64) {
  PolytopeSet acc = PolytopeSet::point(Vec(d, 0.0));
  for (std::size_t j = 0; j < sets.size(); ++j) {
    if (y[j] == 0.0) continue;
    acc = reduce(minkowski_sum(acc, scale(sets[j].set, y[j])));
    if (acc.components.size() > max_components) acc = PolytopeSet::single(hull(acc));
  }
  return acc;
}

Vec zero_sum(std::size_t d, std::span<const double> ystar, const std::vector<Vec>& u, std::span<const double> mu,
             const std::vector<Vec>& v, double ball_scale, std::span<const double> b, std::span<const double> a) {
  Vec s(d, 0.0);
  for (std::size_t j = 0; j < u.size(); ++j) axpy(s, ystar[j], u[j]);
  for (std::size_t i = 0; i < v.size(); ++i) axpy(s, mu[i], v[i]);
  axpy(s, ball_scale, b);
  axpy(s, 1.0, a);
  return s;
}

void require_feasible(const ProblemSpec& spec, std::span<const double> x) {
  if (x.size() != spec.dim) throw DimensionError("point has the wrong dimension");
  if (!is_feasible(spec, x, spec.tol.feasibility)) throw InfeasiblePoint("point is not robust feasible");
}

Norm dual_of(Norm n) {
  switch (n) {
    case Norm::L1:
      return Norm::Linf;
    case Norm::Linf:
      return Norm::L1;
    case Norm::L2:
      return Norm::L2;
  }
  return n;
}

}  // namespace

std::vector<Vec> dual_sphere_grid(const ConeSpec& k, std::size_t per_dim) {
  const std::size_t p = k.dim();
  if (p == 0) throw std::invalid_argument("dual_sphere_grid: empty cone");
  if (per_dim < 2) throw std::invalid_argument("dual_sphere_grid: need at least two points per angle");
  std::vector<Vec> out;
  const ConeSpec dual = dual_cone(k);
  if (p == 1) {
    for (double s : {1.0, -1.0}) {
      if (dual.contains(Vec{s})) out.push_back(Vec{s});
    }
    return out;
  }
  const double pi = std::numbers::pi;
  if (k.kind == ConeSpec::Kind::SignOrthant) {
    angle_grid(p - 1, per_dim, std::vector<double>(p - 1, pi / 2), false, [&](const Vec& ang) {
      Vec y = from_angles(ang);
      for (std::size_t j = 0; j < p; ++j) y[j] *= dual.signs[j];
      push_unique(out, std::move(y));
    });
    return out;
  }
  std::vector<double> top(p - 1, pi);
  top.back() = 2 * pi;
  angle_grid(p - 1, per_dim, top, true, [&](const Vec& ang) {
    Vec y = from_angles(ang);
    if (dual.contains(y, 1e-12)) push_unique(out, std::move(y));
  });
  const PolyCone& g = dual.cone;
  for (std::size_t r = 0; r < g.generators.size(); ++r) {
    const double n = norm2(g.generators[r]);
    if (n == 0.0) continue;
    push_unique(out, scaled(g.generators[r], 1.0 / n));
    if (g.lineality[r]) push_unique(out, scaled(g.generators[r], -1.0 / n));
  }
  return out;
}

CqResult check_cq(const ProblemSpec& spec, std::span<const double> xbar) {
  require_feasible(spec, xbar);
  CqResult r;
  r.active = active_sets(spec, xbar, spec.tol.active);
  const PolyCone n = normal_cone(spec.omega, xbar);
  r.holds = true;
  for (std::size_t i : r.active.active_indices) {
    CqIndexVerdict v;
    v.index = i;
    v.set = constraint_set(spec, i, xbar);
    const ZeroInSumResult z = zero_in_sum({v.set.set}, n);
    v.zero_in_sum = z.sat;
    v.witness = z.witness;
    r.holds = r.holds && !z.sat;
    r.per_index.push_back(std::move(v));
  }
  return r;
}

KktCheck check_kkt(const ProblemSpec& spec, std::span<const double> xbar, const KKTCertificate& cert, double tol) {
  const std::size_t p = spec.num_objectives(), n = spec.num_constraints(), d = spec.dim;
  if (xbar.size() != d) throw DimensionError("check_kkt: xbar has the wrong dimension");
  if (cert.ystar.size() != p || cert.u.size() != p) throw DimensionError("check_kkt: need one y*_j and u_j per objective");
  if (cert.mu.size() != n || cert.v.size() != n || cert.vbar.size() != n) {
    throw DimensionError("check_kkt: need one mu_i, v_i and vbar_i per constraint");
  }
  if (cert.b.size() != d || cert.a.size() != d) throw DimensionError("check_kkt: b and a must have dimension d");
  for (const auto& u : cert.u) {
    if (u.size() != d) throw DimensionError("check_kkt: u_j must have dimension d");
  }
  for (const auto& v : cert.v) {
    if (v.size() != d) throw DimensionError("check_kkt: v_i must have dimension d");
  }

  KktCheck out;
  auto fail = [&](std::string m) { out.failures.push_back(std::move(m)); };
  if (!dual_cone(spec.cone).contains(cert.ystar, 1e-12)) fail("y* is not in K+");
  if (norm1(cert.ystar) <= 1e-12) fail("y* is zero");
  if (!is_feasible(spec, xbar, spec.tol.feasibility)) fail("xbar is not robust feasible");

  const ActiveSets act = active_sets(spec, xbar, spec.tol.active);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = spec.constraints[i];
    const std::string tag = "constraint " + c.name + ": ";
    if (cert.mu[i] < -1e-12) fail(tag + "mu is negative");
    if (std::abs(cert.mu[i] * act.phi_i[i]) > 1e-8) fail(tag + "mu_i phi_i(xbar) != 0");
    if (cert.mu[i] > 0.0) {
      if (!cert.vbar[i]) {
        fail(tag + "missing active scenario");
        continue;
      }
      const double vb = *cert.vbar[i];
      const bool in_u = c.u.kind == UncertaintySet::Kind::Interval
                            ? vb >= c.u.lo - 1e-12 && vb <= c.u.hi + 1e-12
                            : std::any_of(c.u.points.begin(), c.u.points.end(),
                                          [&](double q) { return std::abs(q - vb) <= 1e-12; });
      const double gv = eval(c.g, xbar, vb);
      if (!in_u) fail(tag + "scenario outside the uncertainty set");
      if (gv < act.phi_i[i] - std::max(spec.tol.active, 1e-9)) fail(tag + "scenario is not a maximizer");
      if (std::abs(cert.mu[i] * gv) > 1e-8) fail(tag + "mu_i g_i(xbar, vbar_i) != 0");
    }
  }

  const double member = std::max(tol, kMemberTol);
  for (std::size_t j = 0; j < p; ++j) {
    out.objective_sets.push_back(objective_set(spec, j, xbar));
    if (!contains(out.objective_sets.back().set, cert.u[j], member)) {
      fail("objective " + spec.objectives[j].name + ": u_j is not in the subdifferential");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.constraint_sets.push_back(constraint_set(spec, i, xbar));
    if (!contains(out.constraint_sets.back().set, cert.v[i], member)) {
      fail("constraint " + spec.constraints[i].name + ": v_i is not in the sup-rule set");
    }
  }
  if (dual_norm_value(spec.norm, cert.b) > 1.0 + 1e-12) fail("b is outside the dual unit ball");
  if (!contains(normal_cone(spec.omega, xbar), cert.a, member)) fail("a is not in the normal cone");

  const double ty = dot(cert.ystar, spec.theta);
  out.residual = norm2(zero_sum(d, cert.ystar, cert.u, cert.mu, cert.v, ty, cert.b, cert.a));
  if (!(out.residual <= tol)) fail("residual exceeds tolerance");
  out.valid = out.failures.empty();
  return out;
}

namespace {

// Assembles a certificate from per-term weighted vertex combinations.
struct TermWeights {
  std::vector<std::vector<double>> lam;  // per objective
  std::vector<std::vector<double>> nu;   // per constraint
  std::vector<double> beta;
  std::vector<double> gam;
};

Vec weighted(const std::vector<Vec>& verts, const std::vector<double>& w, double total, std::size_t d) {
  Vec r(d, 0.0);
  if (total <= 1e-14) return verts.empty() ? r : verts.front();
  for (std::size_t k = 0; k < verts.size(); ++k) axpy(r, w[k] / total, verts[k]);
  return r;
}

KktSearch heuristic_search(const ProblemSpec& spec, std::span<const double> xbar, const SearchConfig& cfg,
                           KktSearch out) {
  out.heuristic = true;
  const std::size_t p = spec.num_objectives(), n = spec.num_constraints(), d = spec.dim;
  const ActiveSets act = active_sets(spec, xbar, spec.tol.active);
  const Polytope ball = dual_ball(spec.norm, d, cfg.ball_vertices, BallMode::Inner);
  const std::vector<Vec> ncols = cone_columns(normal_cone(spec.omega, xbar));
  std::vector<Polytope> objs;
  for (const auto& s : out.objective_sets) objs.push_back(hull(s.set));
  for (const Vec& y2 : dual_sphere_grid(spec.cone, cfg.grid_per_dim)) {
    const Vec y = scaled(y2, 1.0 / norm1(y2));
    std::size_t nv = n + ball.vertices.size() + ncols.size();
    for (const auto& o : objs) nv += o.vertices.size();
    for (const auto& c : out.constraint_sets) nv += c.set.components.front().vertices.size();
    LinearProgram lp(nv);
    // Layout: lam per objective, mu, nu per constraint, beta, gam.
    std::size_t at = 0;
    std::vector<std::size_t> lam0, nu0;
    for (const auto& o : objs) {
      lam0.push_back(at);
      at += o.vertices.size();
    }
    const std::size_t mu0 = at;
    at += n;
    for (const auto& c : out.constraint_sets) {
      nu0.push_back(at);
      at += c.set.components.front().vertices.size();
    }
    const std::size_t beta0 = at;
    at += ball.vertices.size();
    const std::size_t gam0 = at;
    for (std::size_t j = 0; j < p; ++j) {
      Vec row(nv, 0.0);
      for (std::size_t k = 0; k < objs[j].vertices.size(); ++k) row[lam0[j] + k] = 1.0;
      lp.add_row(row, RowSense::Equal, 1.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      Vec row(nv, 0.0);
      const auto& vs = out.constraint_sets[i].set.components.front().vertices;
      for (std::size_t k = 0; k < vs.size(); ++k) row[nu0[i] + k] = 1.0;
      row[mu0 + i] = -1.0;
      lp.add_row(row, RowSense::Equal, 0.0);
      if (act.phi_i[i] < -spec.tol.active) {
        Vec z(nv, 0.0);
        z[mu0 + i] = 1.0;
        lp.add_row(z, RowSense::LessEq, 0.0);
      }
    }
    {
      Vec row(nv, 0.0);
      for (std::size_t k = 0; k < ball.vertices.size(); ++k) row[beta0 + k] = 1.0;
      lp.add_row(row, RowSense::Equal, std::max(0.0, dot(y, spec.theta)));
    }
    for (std::size_t r = 0; r < d; ++r) {
      Vec row(nv, 0.0);
      for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k < objs[j].vertices.size(); ++k) row[lam0[j] + k] = y[j] * objs[j].vertices[k][r];
      }
      for (std::size_t i = 0; i < n; ++i) {
        const auto& vs = out.constraint_sets[i].set.components.front().vertices;
        for (std::size_t k = 0; k < vs.size(); ++k) row[nu0[i] + k] = vs[k][r];
      }
      for (std::size_t k = 0; k < ball.vertices.size(); ++k) row[beta0 + k] = ball.vertices[k][r];
      for (std::size_t l = 0; l < ncols.size(); ++l) row[gam0 + l] = ncols[l][r];
      lp.add_row(row, RowSense::Equal, 0.0);
    }
    const LpResult res = solve_lp(lp, cfg.lp);
    ++out.lps_solved;
    if (res.status != LpStatus::Optimal) continue;

    double musum = 0.0;
    for (std::size_t i = 0; i < n; ++i) musum += std::max(0.0, res.x[mu0 + i]);
    const double scale_all = 1.0 / (1.0 + musum);
    KKTCertificate cert;
    cert.ystar = scaled(y, scale_all);
    for (std::size_t j = 0; j < p; ++j) {
      std::vector<double> w(res.x.begin() + lam0[j], res.x.begin() + lam0[j] + objs[j].vertices.size());
      cert.u.push_back(weighted(objs[j].vertices, w, 1.0, d));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double m = std::max(0.0, res.x[mu0 + i]);
      cert.mu.push_back(m * scale_all);
      const auto& vs = out.constraint_sets[i].set.components.front().vertices;
      std::vector<double> w(res.x.begin() + nu0[i], res.x.begin() + nu0[i] + vs.size());
      cert.v.push_back(weighted(vs, w, m, d));
      cert.vbar.push_back(act.scenarios[i].active.empty() ? std::nullopt
                                                          : std::optional<double>(act.scenarios[i].active.front()));
    }
    const double ty = dot(y, spec.theta);
    std::vector<double> bw(res.x.begin() + beta0, res.x.begin() + beta0 + ball.vertices.size());
    cert.b = weighted(ball.vertices, bw, ty, d);
    if (ty <= 1e-14) cert.b.assign(d, 0.0);
    cert.a.assign(d, 0.0);
    for (std::size_t l = 0; l < ncols.size(); ++l) axpy(cert.a, res.x[gam0 + l] * scale_all, ncols[l]);
    KktCheck chk = check_kkt(spec, xbar, cert, spec.tol.kkt);
    cert.residual = chk.residual;
    if (!chk.valid) continue;
    out.certificate = std::move(cert);
    out.check = std::move(chk);
    return out;
  }
  return out;
}

}  // namespace

KktSearch search_kkt(const ProblemSpec& spec, std::span<const double> xbar, const SearchConfig& cfg) {
  require_feasible(spec, xbar);
  const std::size_t p = spec.num_objectives(), n = spec.num_constraints(), d = spec.dim;
  KktSearch out;
  for (std::size_t j = 0; j < p; ++j) out.objective_sets.push_back(objective_set(spec, j, xbar));
  for (std::size_t i = 0; i < n; ++i) out.constraint_sets.push_back(constraint_set(spec, i, xbar));
  if (spec.cone.kind != ConeSpec::Kind::SignOrthant) return heuristic_search(spec, xbar, cfg, std::move(out));

  const std::vector<int> sigma = dual_signs(spec.cone);
  const ActiveSets act = active_sets(spec, xbar, spec.tol.active);
  const Polytope ball = dual_ball(spec.norm, d, cfg.ball_vertices, BallMode::Inner);
  const std::vector<Vec> ncols = cone_columns(normal_cone(spec.omega, xbar));

  std::vector<PolytopeSet> objs;
  std::size_t selections = 1;
  for (const auto& s : out.objective_sets) {
    objs.push_back(s.set);
    selections *= s.set.components.size();
    if (selections > cfg.max_selections) break;
  }
  if (selections > cfg.max_selections) {
    for (auto& o : objs) o = PolytopeSet::single(hull(o));
  }

  std::vector<std::size_t> sel(p, 0);
  while (true) {
    std::vector<const Polytope*> comp;
    for (std::size_t j = 0; j < p; ++j) comp.push_back(&objs[j].components[sel[j]]);

    // Layout: s, lam per objective, mu, nu per constraint, t, beta, gam.
    std::size_t at = p;
    std::vector<std::size_t> lam0, nu0;
    for (const auto* c : comp) {
      lam0.push_back(at);
      at += c->vertices.size();
    }
    const std::size_t mu0 = at;
    at += n;
    for (const auto& c : out.constraint_sets) {
      nu0.push_back(at);
      at += c.set.components.front().vertices.size();
    }
    const std::size_t t0 = at++;
    const std::size_t beta0 = at;
    at += ball.vertices.size();
    const std::size_t gam0 = at;
    at += ncols.size();
    const std::size_t nv = at;

    LinearProgram lp(nv);
    for (std::size_t j = 0; j < p; ++j) {
      Vec row(nv, 0.0);
      for (std::size_t k = 0; k < comp[j]->vertices.size(); ++k) row[lam0[j] + k] = 1.0;
      row[j] = -1.0;
      lp.add_row(row, RowSense::Equal, 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      Vec row(nv, 0.0);
      const auto& vs = out.constraint_sets[i].set.components.front().vertices;
      for (std::size_t k = 0; k < vs.size(); ++k) row[nu0[i] + k] = 1.0;
      row[mu0 + i] = -1.0;
      lp.add_row(row, RowSense::Equal, 0.0);
      if (act.phi_i[i] < -spec.tol.active) {
        Vec z(nv, 0.0);
        z[mu0 + i] = 1.0;
        lp.add_row(z, RowSense::LessEq, 0.0);
      }
    }
    {
      Vec row(nv, 0.0);
      for (std::size_t k = 0; k < ball.vertices.size(); ++k) row[beta0 + k] = 1.0;
      row[t0] = -1.0;
      lp.add_row(row, RowSense::Equal, 0.0);
      Vec trow(nv, 0.0);
      trow[t0] = 1.0;
      for (std::size_t j = 0; j < p; ++j) trow[j] = -sigma[j] * spec.theta[j];
      lp.add_row(trow, RowSense::Equal, 0.0);
    }
    for (std::size_t r = 0; r < d; ++r) {
      Vec row(nv, 0.0);
      for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k < comp[j]->vertices.size(); ++k) {
          row[lam0[j] + k] = sigma[j] * comp[j]->vertices[k][r];
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        const auto& vs = out.constraint_sets[i].set.components.front().vertices;
        for (std::size_t k = 0; k < vs.size(); ++k) row[nu0[i] + k] = vs[k][r];
      }
      for (std::size_t k = 0; k < ball.vertices.size(); ++k) row[beta0 + k] = ball.vertices[k][r];
      for (std::size_t l = 0; l < ncols.size(); ++l) row[gam0 + l] = ncols[l][r];
      lp.add_row(row, RowSense::Equal, 0.0);
    }
    {
      Vec norm(nv, 0.0), ymin(nv, 0.0);
      for (std::size_t j = 0; j < p; ++j) norm[j] = ymin[j] = 1.0;
      for (std::size_t i = 0; i < n; ++i) norm[mu0 + i] = 1.0;
      lp.add_row(norm, RowSense::Equal, 1.0);
      lp.add_row(ymin, RowSense::GreaterEq, cfg.eps_min);
      lp.objective = ymin;
    }
    const LpResult res = solve_lp(lp, cfg.lp);
    ++out.lps_solved;

    if (res.status == LpStatus::Optimal) {
      KKTCertificate cert;
      const auto val = [&](std::size_t k) { return std::max(0.0, res.x[k]); };
      for (std::size_t j = 0; j < p; ++j) {
        cert.ystar.push_back(sigma[j] * val(j));
        std::vector<double> w(comp[j]->vertices.size());
        for (std::size_t k = 0; k < w.size(); ++k) w[k] = val(lam0[j] + k);
        cert.u.push_back(weighted(comp[j]->vertices, w, val(j), d));
      }
      for (std::size_t i = 0; i < n; ++i) {
        cert.mu.push_back(val(mu0 + i));
        const auto& vs = out.constraint_sets[i].set.components.front().vertices;
        std::vector<double> w(vs.size());
        for (std::size_t k = 0; k < w.size(); ++k) w[k] = val(nu0[i] + k);
        cert.v.push_back(weighted(vs, w, val(mu0 + i), d));
        cert.vbar.push_back(act.scenarios[i].active.empty()
                                ? std::nullopt
                                : std::optional<double>(act.scenarios[i].active.front()));
      }
      std::vector<double> bw(ball.vertices.size());
      for (std::size_t k = 0; k < bw.size(); ++k) bw[k] = val(beta0 + k);
      cert.b = val(t0) > 1e-14 ? weighted(ball.vertices, bw, val(t0), d) : Vec(d, 0.0);
      cert.a.assign(d, 0.0);
      for (std::size_t l = 0; l < ncols.size(); ++l) axpy(cert.a, val(gam0 + l), ncols[l]);
      KktCheck chk = check_kkt(spec, xbar, cert, spec.tol.kkt);
      cert.residual = chk.residual;
      if (chk.valid) {
        out.certificate = std::move(cert);
        out.check = std::move(chk);
        return out;
      }
    }

    std::size_t j = 0;
    while (j < p && ++sel[j] == objs[j].components.size()) sel[j++] = 0;
    if (j == p) break;
  }
  return out;
}

FuzzyResult fuzzy_kkt_demo(const ProblemSpec& spec, std::span<const double> xbar, std::span<const double> ystar,
                           double eta, const FuzzyConfig& cfg) {
  const std::size_t p = spec.num_objectives(), n = spec.num_constraints(), d = spec.dim;
  if (xbar.size() != d) throw DimensionError("fuzzy: xbar has the wrong dimension");
  if (!(eta > 0.0)) throw std::invalid_argument("fuzzy: eta must be positive");
  const Psi psi(spec, Vec(ystar.begin(), ystar.end()), Vec(xbar.begin(), xbar.end()));

  FuzzyResult out;
  if (eta < cfg.grid_step) {
    out.diagnostic = "eta is smaller than the grid step " + format_number(cfg.grid_step);
    return out;
  }
  const long half = static_cast<long>(std::floor(eta / cfg.grid_step + 1e-9));
  const double side = static_cast<double>(2 * half + 1);
  if (std::pow(side, static_cast<double>(d)) > 4e6) {
    out.diagnostic = "search lattice too large; increase the grid step";
    return out;
  }

  // Lattice minimization of psi over Omega and the eta-ball; ties go to the
  // point nearest xbar, then to lattice order.
  std::vector<long> idx(d, -half);
  Vec x(d), best;
  double best_psi = INFINITY, best_dist = INFINITY;
  while (true) {
    for (std::size_t k = 0; k < d; ++k) x[k] = xbar[k] + static_cast<double>(idx[k]) * cfg.grid_step;
    const double dist = norm_value(spec.norm, sub(x, xbar));
    if (dist <= eta + 1e-12 && spec.omega.contains(x)) {
      ++out.grid_points;
      const double v = psi(x);
      if (v < best_psi - 1e-12 || (v <= best_psi + 1e-12 && dist < best_dist)) {
        best_psi = std::min(v, best_psi);
        best_dist = dist;
        best = x;
      }
    }
    std::size_t k = 0;
    while (k < d && ++idx[k] > half) idx[k++] = -half;
    if (k == d) break;
  }
  if (best.empty()) {
    out.diagnostic = "no lattice point of Omega within eta";
    return out;
  }

  const Vec& xe = best;
  const double ps = psi(xe);
  const double ob = psi.objective_branch(xe);
  const bool obj_active = ob >= ps - cfg.branch_tol;
  const ActiveSets act = active_sets(spec, xe, spec.tol.active);
  std::vector<bool> con_active(n);
  for (std::size_t i = 0; i < n; ++i) con_active[i] = act.phi_i[i] >= ps - cfg.branch_tol;

  std::vector<SetEvidence> sets;
  for (std::size_t j = 0; j < p; ++j) sets.push_back(objective_set(spec, j, xe));
  // Hull of the scalarized combination: a convex outer estimate in limiting mode.
  const Polytope u_set = hull(combination(sets, ystar, d));
  std::vector<Polytope> cons;
  for (std::size_t i = 0; i < n; ++i) cons.push_back(constraint_set(spec, i, xe).set.components.front());
  const double radius = std::max(0.0, dot(ystar, spec.theta)) / eta;
  const Polytope ball = dual_ball(spec.norm, d, cfg.ball_vertices, BallMode::Inner);
  const std::vector<Vec> ncols = cone_columns(normal_cone(spec.omega, xe));
  const double ny = norm1(ystar);

  std::vector<double> alphas;
  for (std::size_t k = 0; k <= cfg.alpha_steps; ++k) {
    alphas.push_back(1.0 - static_cast<double>(k) / static_cast<double>(cfg.alpha_steps));
  }
  if (ny > 0.0 && 1.0 / ny <= 1.0) alphas.push_back(1.0 / ny);
  std::sort(alphas.begin(), alphas.end(), std::greater<>());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

  for (double alpha : alphas) {
    const double mtotal = 1.0 - alpha * ny;
    if (mtotal < -1e-15) continue;
    if (alpha > 0.0 && !obj_active) continue;

    // Layout: lam (u_set), mu, nu per constraint, beta, gam.
    std::size_t at = u_set.vertices.size();
    const std::size_t mu0 = at;
    at += n;
    std::vector<std::size_t> nu0;
    for (const auto& c : cons) {
      nu0.push_back(at);
      at += c.vertices.size();
    }
    const std::size_t beta0 = at;
    at += ball.vertices.size();
    const std::size_t gam0 = at;
    at += ncols.size();
    const std::size_t nv = at;
    LinearProgram lp(nv);
    {
      Vec row(nv, 0.0);
      for (std::size_t k = 0; k < u_set.vertices.size(); ++k) row[k] = 1.0;
      lp.add_row(row, RowSense::Equal, alpha);
    }
    {
      Vec row(nv, 0.0);
      for (std::size_t i = 0; i < n; ++i) row[mu0 + i] = 1.0;
      lp.add_row(row, RowSense::Equal, std::max(0.0, mtotal));
    }
    for (std::size_t i = 0; i < n; ++i) {
      Vec row(nv, 0.0);
      for (std::size_t k = 0; k < cons[i].vertices.size(); ++k) row[nu0[i] + k] = 1.0;
      row[mu0 + i] = -(1.0 - alpha);
      lp.add_row(row, RowSense::Equal, 0.0);
      if (!con_active[i]) {
        Vec z(nv, 0.0);
        z[mu0 + i] = 1.0;
        lp.add_row(z, RowSense::LessEq, 0.0);
      }
    }
    {
      Vec row(nv, 0.0);
      for (std::size_t k = 0; k < ball.vertices.size(); ++k) row[beta0 + k] = 1.0;
      lp.add_row(row, RowSense::Equal, radius);
    }
    for (std::size_t r = 0; r < d; ++r) {
      Vec row(nv, 0.0);
      for (std::size_t k = 0; k < u_set.vertices.size(); ++k) row[k] = u_set.vertices[k][r];
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < cons[i].vertices.size(); ++k) row[nu0[i] + k] = cons[i].vertices[k][r];
      }
      for (std::size_t k = 0; k < ball.vertices.size(); ++k) row[beta0 + k] = ball.vertices[k][r];
      for (std::size_t l = 0; l < ncols.size(); ++l) row[gam0 + l] = ncols[l][r];
      lp.add_row(row, RowSense::Equal, 0.0);
    }
    const LpResult res = solve_lp(lp, cfg.lp);
    if (res.status != LpStatus::Optimal) continue;

    const auto val = [&](std::size_t k) { return std::max(0.0, res.x[k]); };
    FuzzyKKTWitness w;
    w.x_eta = xe;
    w.psi = ps;
    w.lambda1 = alpha;
    w.lambda2 = 1.0;
    std::vector<double> lw(u_set.vertices.size());
    for (std::size_t k = 0; k < lw.size(); ++k) lw[k] = val(k);
    w.u = weighted(u_set.vertices, lw, alpha, d);
    double musum = 0.0;
    Vec total(d, 0.0);
    axpy(total, alpha, w.u);
    for (std::size_t i = 0; i < n; ++i) {
      const double m = val(mu0 + i);
      w.mu.push_back(m);
      musum += m;
      std::vector<double> vw(cons[i].vertices.size());
      for (std::size_t k = 0; k < vw.size(); ++k) vw[k] = val(nu0[i] + k);
      w.v.push_back(weighted(cons[i].vertices, vw, (1.0 - alpha) * m, d));
      axpy(total, (1.0 - alpha) * m, w.v.back());
      const auto& sc = act.scenarios[i].active;
      w.v_eta.push_back(sc.empty() ? std::nullopt : std::optional<double>(sc.front()));
      const double g = sc.empty() ? act.phi_i[i] : eval(spec.constraints[i].g, xe, sc.front());
      w.constraint_residuals.push_back(std::abs((1.0 - alpha) * m * (g - ps)));
    }
    std::vector<double> bw(ball.vertices.size());
    for (std::size_t k = 0; k < bw.size(); ++k) bw[k] = val(beta0 + k);
    w.b = radius > 1e-14 ? weighted(ball.vertices, bw, radius, d) : Vec(d, 0.0);
    axpy(total, radius, w.b);
    w.a.assign(d, 0.0);
    for (std::size_t l = 0; l < ncols.size(); ++l) axpy(w.a, val(gam0 + l), ncols[l]);
    axpy(total, 1.0, w.a);
    w.normalization_residual = std::abs(alpha * ny + musum - 1.0);
    w.objective_residual = std::abs(alpha * (ob - ps));
    w.inclusion_residual = norm2(total);
    out.found = true;
    out.witness = std::move(w);
    return out;
  }
  out.diagnostic = "no multipliers satisfy the inclusion at x_eta";
  return out;
}

namespace {

struct PseudoContext {
  const ProblemSpec& spec;
  Vec xbar, fbar;
  PseudoType type;
  const PseudoConfig& cfg;
  std::vector<Vec> ystars;
  std::vector<PolytopeSet> u_sets;  // per y*
  std::vector<double> ty;           // <y*, theta>
  // Per constraint and scenario at xbar: g_i(xbar, v) and the vertices of d_x g_i(xbar, v).
  struct Scenario {
    std::size_t i;
    double v;
    double gbar;
    std::vector<Vec> verts;
  };
  std::vector<Scenario> scenarios;
  std::vector<Vec> ncols;
  std::vector<bool> nlin;
  Polytope ball;
};

bool candidate_ok(const PseudoContext& c, const Polytope& u, double ty, double cnorm, std::span<const double> w,
                  const std::vector<const std::vector<Vec>*>& cons) {
  for (const auto& v : u.vertices) {
    if (!(dot(v, w) + cnorm * ty < -c.cfg.premise_tol)) return false;
  }
  for (const auto* vs : cons) {
    for (const auto& v : *vs) {
      if (dot(v, w) > c.cfg.premise_tol) return false;
    }
  }
  for (std::size_t l = 0; l < c.ncols.size(); ++l) {
    const double s = dot(c.ncols[l], w);
    if (s > c.cfg.premise_tol || (c.nlin[l] && s < -c.cfg.premise_tol)) return false;
  }
  return true;
}

// w = cnorm * sum_k beta_k p_k with sum beta <= 1 over the inner primal ball.
bool common_w_lp(const PseudoContext& c, const Polytope& u, double ty, double cnorm,
                 const std::vector<const std::vector<Vec>*>& cons) {
  const auto& pts = c.ball.vertices;
  const std::size_t nv = pts.size();
  LinearProgram lp(nv);
  auto row_for = [&](std::span<const double> g) {
    Vec row(nv);
    for (std::size_t k = 0; k < nv; ++k) row[k] = cnorm * dot(g, pts[k]);
    return row;
  };
  for (const auto& v : u.vertices) lp.add_row(row_for(v), RowSense::LessEq, -c.cfg.eps_strict - cnorm * ty);
  for (const auto* vs : cons) {
    for (const auto& v : *vs) lp.add_row(row_for(v), RowSense::LessEq, 0.0);
  }
  for (std::size_t l = 0; l < c.ncols.size(); ++l) {
    lp.add_row(row_for(c.ncols[l]), c.nlin[l] ? RowSense::Equal : RowSense::LessEq, 0.0);
  }
  lp.add_row(Vec(nv, 1.0), RowSense::LessEq, 1.0);
  return solve_lp(lp, c.cfg.lp).status == LpStatus::Optimal;
}

PseudoSample run_sample(const PseudoContext& c, const Vec& x) {
  PseudoSample s;
  s.x = x;
  const Vec w = sub(x, c.xbar);
  const double cnorm = norm_value(c.spec.norm, w);
  const bool at_xbar = norm_inf(w) == 0.0;
  if (c.type == PseudoType::II && at_xbar) return s;
  const Vec fx = eval_objectives(c.spec, x);

  std::vector<const std::vector<Vec>*> cons;
  bool cons_ready = false;
  bool any_common = false;
  for (std::size_t y = 0; y < c.ystars.size(); ++y) {
    const Vec& ys = c.ystars[y];
    const double lhs = dot(ys, fx);
    const double rhs = dot(ys, c.fbar) - cnorm * c.ty[y];
    const bool premise = c.type == PseudoType::I ? lhs < rhs - c.cfg.premise_tol : lhs <= rhs + c.cfg.premise_tol;
    if (!premise) continue;
    ++s.premises_held;
    if (!cons_ready) {
      for (const auto& sc : c.scenarios) {
        if (eval(c.spec.constraints[sc.i].g, x, sc.v) <= sc.gbar + c.cfg.premise_tol) cons.push_back(&sc.verts);
      }
      cons_ready = true;
    }
    const PolytopeSet& us = c.u_sets[y];
    bool cand = true;
    for (const auto& comp : us.components) cand = cand && candidate_ok(c, comp, c.ty[y], cnorm, w, cons);
    if (cand) continue;
    // Each component may use its own w.
    bool common = true;
    for (const auto& comp : us.components) common = common && common_w_lp(c, comp, c.ty[y], cnorm, cons);
    if (common) {
      any_common = true;
      continue;
    }
    s.verdict = PseudoVerdict::Inconclusive;
    s.failing_ystar = ys;
    return s;
  }
  s.verdict = any_common ? PseudoVerdict::VerifiedCommonW : PseudoVerdict::VerifiedCandidateW;
  return s;
}

}  // namespace

PseudoResult pseudoconvex_test(const ProblemSpec& spec, std::span<const double> xbar, PseudoType type,
                               const PseudoConfig& cfg) {
  const std::size_t d = spec.dim, p = spec.num_objectives();
  if (xbar.size() != d) throw DimensionError("pseudoconvex: xbar has the wrong dimension");
  if (!spec.omega.contains(xbar)) throw std::invalid_argument("pseudoconvex: xbar is not in Omega");
  if (cfg.per_axis < 1) throw std::invalid_argument("pseudoconvex: need at least one sample per axis");

  PseudoContext ctx{spec, Vec(xbar.begin(), xbar.end()), eval_objectives(spec, xbar), type, cfg, {}, {}, {}, {}, {}, {}, {}};
  std::vector<SetEvidence> sets;
  for (std::size_t j = 0; j < p; ++j) sets.push_back(objective_set(spec, j, xbar));
  ctx.ystars = dual_sphere_grid(spec.cone, cfg.ystar_per_dim);
  for (const auto& y : ctx.ystars) {
    ctx.u_sets.push_back(combination(sets, y, d));
    ctx.ty.push_back(dot(y, spec.theta));
  }
  for (std::size_t i = 0; i < spec.num_constraints(); ++i) {
    const auto& con = spec.constraints[i];
    const Fixture* fx = spec.fixture_for(con.name, xbar);
    const SupRuleResult sr = sup_rule(con.g, xbar, con.u, spec.tol.active, SubdiffMode::Hull);
    for (double v : sr.used_scenarios) {
      PseudoContext::Scenario sc{i, v, eval(con.g, xbar, v), {}};
      sc.verts = fx ? hull(fx->set).vertices
                    : hull(scaled_subdiff(con.g, xbar, v, 1.0, SubdiffMode::Hull).set).vertices;
      ctx.scenarios.push_back(std::move(sc));
    }
  }
  const PolyCone nc = normal_cone(spec.omega, xbar);
  for (std::size_t l = 0; l < nc.generators.size(); ++l) {
    ctx.ncols.push_back(nc.generators[l]);
    ctx.nlin.push_back(nc.lineality[l]);
  }
  ctx.ball = primal_ball(spec.norm, d, cfg.ball_vertices);

  const Vec lo = cfg.lo.empty() ? sub(xbar, Vec(d, 1.0)) : cfg.lo;
  const Vec hi = cfg.hi.empty() ? add(xbar, Vec(d, 1.0)) : cfg.hi;
  if (lo.size() != d || hi.size() != d) throw DimensionError("pseudoconvex: sample box has the wrong dimension");
  std::vector<Vec> points;
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    Vec x(d);
    for (std::size_t k = 0; k < d; ++k) {
      x[k] = cfg.per_axis == 1 ? lo[k]
             : idx[k] + 1 == cfg.per_axis
                 ? hi[k]
                 : lo[k] + (hi[k] - lo[k]) * static_cast<double>(idx[k]) / static_cast<double>(cfg.per_axis - 1);
    }
    if (spec.omega.contains(x)) points.push_back(std::move(x));
    std::size_t k = 0;
    while (k < d && ++idx[k] == cfg.per_axis) idx[k++] = 0;
    if (k == d) break;
  }

  PseudoResult out;
  out.type = type;
  out.ystar_count = ctx.ystars.size();
  out.samples.resize(points.size());
  parallel_for(points.size(), [&](std::size_t s) { out.samples[s] = run_sample(ctx, points[s]); });
  for (const auto& s : out.samples) {
    switch (s.verdict) {
      case PseudoVerdict::VerifiedCandidateW:
        ++out.candidate;
        break;
      case PseudoVerdict::VerifiedCommonW:
        ++out.common;
        break;
      default:
        ++out.inconclusive;
    }
  }
  return out;
}

WitnessCheck check_pseudo_witness(const ProblemSpec& spec, std::span<const double> xbar, PseudoType type,
                                  const PseudoWitness& wit, std::size_t ball_vertices) {
  const std::size_t d = spec.dim, p = spec.num_objectives();
  if (xbar.size() != d || wit.x.size() != d) throw DimensionError("witness: point has the wrong dimension");
  if (wit.ystar.size() != p || wit.u.size() != p) throw DimensionError("witness: need y* and one u_j per objective");
  WitnessCheck out;
  const Vec diff = sub(wit.x, xbar);
  const double cnorm = norm_value(spec.norm, diff);
  const double ty = dot(wit.ystar, spec.theta);
  const double lhs = dot(wit.ystar, eval_objectives(spec, wit.x));
  const double rhs = dot(wit.ystar, eval_objectives(spec, xbar)) - cnorm * ty;
  const bool in_k = dual_cone(spec.cone).contains(wit.ystar, 1e-12);
  if (type == PseudoType::I) {
    out.premise = in_k && lhs < rhs - 1e-12;
  } else {
    out.premise = in_k && norm1(wit.ystar) > 0.0 && norm_inf(diff) > 0.0 && lhs <= rhs + 1e-12;
  }
  out.premise = out.premise && spec.omega.contains(wit.x);

  out.memberships = true;
  Vec u(d, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    if (wit.u[j].size() != d) throw DimensionError("witness: u_j has the wrong dimension");
    out.memberships = out.memberships && contains(objective_set(spec, j, xbar).set, wit.u[j], kMemberTol);
    axpy(u, wit.ystar[j], wit.u[j]);
  }

  Polytope ball;
  try {
    ball = dual_ball(dual_of(spec.norm), d, ball_vertices, BallMode::Outer);
  } catch (const std::exception& e) {
    out.note = std::string("no outer ball available: ") + e.what();
    return out;
  }
  // max -<u, w> over w = cnorm * sum beta_k p_k, sum beta <= 1, <n_l, w> <= 0.
  const std::size_t nv = ball.vertices.size();
  LinearProgram lp(nv);
  lp.objective.resize(nv);
  for (std::size_t k = 0; k < nv; ++k) lp.objective[k] = -cnorm * dot(u, ball.vertices[k]);
  const PolyCone nc = normal_cone(spec.omega, xbar);
  for (std::size_t l = 0; l < nc.generators.size(); ++l) {
    Vec row(nv);
    for (std::size_t k = 0; k < nv; ++k) row[k] = cnorm * dot(nc.generators[l], ball.vertices[k]);
    lp.add_row(row, nc.lineality[l] ? RowSense::Equal : RowSense::LessEq, 0.0);
  }
  lp.add_row(Vec(nv, 1.0), RowSense::LessEq, 1.0);
  LpOptions opt;
  opt.exact = true;
  const LpResult r = solve_lp(lp, opt);
  if (r.status != LpStatus::Optimal) {
    out.note = std::string("witness LP ended ") + to_string(r.status);
    return out;
  }
  out.lp_minimum = cnorm * ty - r.objective;
  if (!out.premise) out.note = "premise does not hold";
  else if (!out.memberships) out.note = "a subgradient is outside its set";
  else if (out.lp_minimum < -1e-12) out.note = "some admissible w satisfies the implication";
  if (out.premise && out.memberships && out.lp_minimum >= -1e-12) out.verdict = PseudoVerdict::WitnessedFailure;
  return out;
}

}  // namespace robustkkt
