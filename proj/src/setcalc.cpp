#include "robustkkt/setcalc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace robustkkt {

std::size_t PolytopeSet::vertex_count() const {
  std::size_t n = 0;
  for (const auto& c : components) n += c.vertices.size();
  return n;
}

PolyCone PolyCone::whole(std::size_t d) {
  PolyCone c{d, {}, {}};
  for (std::size_t i = 0; i < d; ++i) {
    Vec e(d, 0.0);
    e[i] = 1.0;
    c.generators.push_back(e);
    c.lineality.push_back(true);
  }
  return c;
}

ConeSpec ConeSpec::orthant(std::vector<int> signs) {
  for (int s : signs) {
    if (s != 1 && s != -1) throw std::invalid_argument("orthant sign must be +1 or -1");
  }
  ConeSpec k;
  k.kind = Kind::SignOrthant;
  k.signs = std::move(signs);
  return k;
}

ConeSpec ConeSpec::generated(PolyCone c) {
  ConeSpec k;
  k.kind = Kind::Generators;
  k.cone = std::move(c);
  return k;
}

PolyCone ConeSpec::to_polycone() const {
  if (kind == Kind::Generators) return cone;
  PolyCone c{signs.size(), {}, {}};
  for (std::size_t j = 0; j < signs.size(); ++j) {
    Vec e(signs.size(), 0.0);
    e[j] = signs[j];
    c.generators.push_back(e);
    c.lineality.push_back(false);
  }
  return c;
}

bool ConeSpec::contains(std::span<const double> y, double tol) const {
  if (y.size() != dim()) throw DimensionError("cone membership: dimension mismatch");
  if (kind == Kind::SignOrthant) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (signs[j] * y[j] < -tol) return false;
    }
    return true;
  }
  return robustkkt::contains(cone, y, tol);
}

bool ConeSpec::is_pointed() const {
  if (kind == Kind::SignOrthant) return true;
  if (cone.is_zero()) return true;
  for (bool l : cone.lineality) {
    if (l) return false;
  }
  // Pointed iff no nontrivial nonnegative combination of generators vanishes.
  const std::size_t g = cone.generators.size();
  LinearProgram lp(g);
  for (std::size_t i = 0; i < cone.dim; ++i) {
    Vec row(g);
    for (std::size_t k = 0; k < g; ++k) row[k] = cone.generators[k][i];
    lp.add_row(row, RowSense::Equal, 0.0);
  }
  lp.add_row(Vec(g, 1.0), RowSense::Equal, 1.0);
  return solve_lp(lp).status != LpStatus::Optimal;
}

OmegaSpec OmegaSpec::whole(std::size_t d) {
  OmegaSpec o;
  o.kind = Kind::Whole;
  o.dim = d;
  return o;
}

OmegaSpec OmegaSpec::box(Vec lo, Vec hi) {
  require_same_dim(lo, hi, "box");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) throw std::invalid_argument("box lower bound exceeds upper bound");
  }
  OmegaSpec o;
  o.kind = Kind::Box;
  o.dim = lo.size();
  o.lo = std::move(lo);
  o.hi = std::move(hi);
  return o;
}

OmegaSpec OmegaSpec::halfspaces(std::vector<Vec> rows, Vec rhs) {
  if (rows.size() != rhs.size()) throw std::invalid_argument("halfspace rows/rhs mismatch");
  if (rows.empty()) throw std::invalid_argument("halfspace description needs at least one row");
  OmegaSpec o;
  o.kind = Kind::Halfspaces;
  o.dim = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != o.dim) throw DimensionError("halfspace rows differ in dimension");
  }
  o.rows = std::move(rows);
  o.rhs = std::move(rhs);
  return o;
}

bool OmegaSpec::contains(std::span<const double> x, double tol) const {
  if (x.size() != dim) throw DimensionError("Omega membership: dimension mismatch");
  switch (kind) {
    case Kind::Whole:
      return true;
    case Kind::Box:
      for (std::size_t i = 0; i < dim; ++i) {
        if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
      }
      return true;
    case Kind::Halfspaces:
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (dot(rows[k], x) > rhs[k] + tol) return false;
      }
      return true;
  }
  return false;
}

Norm parse_norm(const std::string& s) {
  if (s == "l1") return Norm::L1;
  if (s == "l2") return Norm::L2;
  if (s == "linf") return Norm::Linf;
  throw std::invalid_argument("unknown norm '" + s + "' (expected l1, l2 or linf)");
}

const char* to_string(Norm n) {
  switch (n) {
    case Norm::L1:
      return "l1";
    case Norm::L2:
      return "l2";
    case Norm::Linf:
      return "linf";
  }
  return "?";
}

double norm_value(Norm n, std::span<const double> x) {
  switch (n) {
    case Norm::L1:
      return norm1(x);
    case Norm::L2:
      return norm2(x);
    case Norm::Linf:
      return norm_inf(x);
  }
  return 0.0;
}

double dual_norm_value(Norm n, std::span<const double> x) {
  switch (n) {
    case Norm::L1:
      return norm_inf(x);
    case Norm::L2:
      return norm2(x);
    case Norm::Linf:
      return norm1(x);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// polytopes

namespace {

bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void check_dims(const std::vector<Vec>& vs) {
  if (vs.empty()) throw std::invalid_argument("polytope needs at least one vertex");
  for (const auto& v : vs) {
    if (v.size() != vs.front().size()) throw DimensionError("polytope vertices differ in dimension");
  }
}

std::vector<Vec> dedup(std::vector<Vec> vs) {
  std::sort(vs.begin(), vs.end(), lex_less);
  std::vector<Vec> out;
  for (auto& v : vs) {
    bool dup = false;
    for (const auto& u : out) {
      if (max_abs_diff(u, v) <= kVertexDedupTol) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(std::move(v));
  }
  return out;
}

double cross(const Vec& o, const Vec& a, const Vec& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain; collinear points are dropped.
std::vector<Vec> hull2d(std::vector<Vec> pts) {
  if (pts.size() <= 2) return pts;
  std::vector<Vec> h(2 * pts.size());
  std::size_t k = 0;
  auto turn_ok = [](const Vec& o, const Vec& a, const Vec& b) {
    const double c = cross(o, a, b);
    const double scale = norm2(sub(a, o)) * norm2(sub(b, o));
    return c > 1e-12 * scale;
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && !turn_ok(h[k - 2], h[k - 1], pts[i])) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && !turn_ok(h[k - 2], h[k - 1], pts[i])) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

// A point lies in conv(others) iff this LP is feasible.
bool in_hull_of(const std::vector<Vec>& others, const Vec& p, double tol) {
  const std::size_t n = others.size(), d = p.size();
  LinearProgram lp(n);
  for (std::size_t i = 0; i < d; ++i) {
    Vec row(n);
    for (std::size_t k = 0; k < n; ++k) row[k] = others[k][i];
    lp.add_row(row, RowSense::LessEq, p[i] + tol);
    lp.add_row(row, RowSense::GreaterEq, p[i] - tol);
  }
  lp.add_row(Vec(n, 1.0), RowSense::Equal, 1.0);
  return solve_lp(lp).status == LpStatus::Optimal;
}

std::vector<Vec> extreme_points(std::vector<Vec> pts) {
  pts = dedup(std::move(pts));
  if (pts.size() <= 1) return pts;
  const std::size_t d = pts.front().size();
  if (d == 1) {
    auto [mn, mx] = std::minmax_element(pts.begin(), pts.end(), lex_less);
    if (max_abs_diff(*mn, *mx) <= kVertexDedupTol) return {*mn};
    return {*mn, *mx};
  }
  if (d == 2) {
    auto h = hull2d(pts);
    std::sort(h.begin(), h.end(), lex_less);
    return h;
  }
  // General dimension: drop points lying in the hull of the remaining ones.
  std::vector<Vec> keep = pts;
  for (std::size_t i = 0; i < keep.size();) {
    std::vector<Vec> others;
    others.reserve(keep.size() - 1);
    for (std::size_t j = 0; j < keep.size(); ++j) {
      if (j != i) others.push_back(keep[j]);
    }
    if (in_hull_of(others, keep[i], 1e-12)) {
      keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  return keep;
}

}  // namespace

Polytope make_polytope(std::vector<Vec> vertices) {
  check_dims(vertices);
  return Polytope{dedup(std::move(vertices))};
}

Polytope hull(const Polytope& a) {
  check_dims(a.vertices);
  return Polytope{extreme_points(a.vertices)};
}

Polytope hull(const PolytopeSet& a) {
  std::vector<Vec> all;
  for (const auto& c : a.components) all.insert(all.end(), c.vertices.begin(), c.vertices.end());
  check_dims(all);
  return Polytope{extreme_points(std::move(all))};
}

bool same_vertices(const Polytope& a, const Polytope& b, double tol) {
  if (a.vertices.size() != b.vertices.size()) return false;
  std::vector<bool> used(b.vertices.size(), false);
  for (const auto& v : a.vertices) {
    bool found = false;
    for (std::size_t k = 0; k < b.vertices.size(); ++k) {
      if (!used[k] && v.size() == b.vertices[k].size() && max_abs_diff(v, b.vertices[k]) <= tol) {
        used[k] = found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

PolytopeSet reduce(const PolytopeSet& a) {
  PolytopeSet out;
  for (const auto& c : a.components) {
    Polytope h = hull(c);
    bool dup = false;
    for (const auto& o : out.components) {
      if (same_vertices(o, h)) {
        dup = true;
        break;
      }
    }
    if (!dup) out.components.push_back(std::move(h));
  }
  return out;
}

Polytope minkowski_sum(const Polytope& a, const Polytope& b) {
  if (a.dim() != b.dim()) throw DimensionError("minkowski_sum: dimension mismatch");
  std::vector<Vec> sums;
  sums.reserve(a.vertices.size() * b.vertices.size());
  for (const auto& u : a.vertices) {
    for (const auto& v : b.vertices) sums.push_back(add(u, v));
  }
  return Polytope{extreme_points(std::move(sums))};
}

PolytopeSet minkowski_sum(const PolytopeSet& a, const PolytopeSet& b) {
  if (a.components.empty() || b.components.empty()) {
    throw std::invalid_argument("minkowski_sum: empty set");
  }
  if (a.dim() != b.dim()) throw DimensionError("minkowski_sum: dimension mismatch");
  PolytopeSet out;
  for (const auto& p : a.components) {
    for (const auto& q : b.components) out.components.push_back(minkowski_sum(p, q));
  }
  return reduce(out);
}

Polytope scale(const Polytope& a, double c) {
  if (c == 0.0) return Polytope::point(Vec(a.dim(), 0.0));
  std::vector<Vec> vs;
  vs.reserve(a.vertices.size());
  for (const auto& v : a.vertices) vs.push_back(scaled(v, c));
  std::sort(vs.begin(), vs.end(), lex_less);
  return Polytope{std::move(vs)};
}

PolytopeSet scale(const PolytopeSet& a, double c) {
  PolytopeSet out;
  for (const auto& p : a.components) out.components.push_back(scale(p, c));
  return c == 0.0 ? reduce(out) : out;
}

PolytopeSet union_of(const PolytopeSet& a, const PolytopeSet& b) {
  if (a.dim() != b.dim()) throw DimensionError("union_of: dimension mismatch");
  PolytopeSet out = a;
  for (const auto& q : b.components) {
    bool dup = false;
    for (const auto& p : out.components) {
      if (same_vertices(p, q)) {
        dup = true;
        break;
      }
    }
    if (!dup) out.components.push_back(q);
  }
  return out;
}

double support(const Polytope& a, std::span<const double> dir) {
  double best = -INFINITY;
  for (const auto& v : a.vertices) best = std::max(best, dot(v, dir));
  return best;
}

double support(const PolytopeSet& a, std::span<const double> dir) {
  double best = -INFINITY;
  for (const auto& c : a.components) best = std::max(best, support(c, dir));
  return best;
}

bool contains(const Polytope& a, std::span<const double> p, double tol) {
  if (a.dim() != p.size()) throw DimensionError("contains: dimension mismatch");
  if (a.vertices.size() == 1) return max_abs_diff(a.vertices[0], p) <= tol;
  if (p.size() == 1) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& v : a.vertices) {
      lo = std::min(lo, v[0]);
      hi = std::max(hi, v[0]);
    }
    return p[0] >= lo - tol && p[0] <= hi + tol;
  }
  return in_hull_of(a.vertices, Vec(p.begin(), p.end()), tol);
}

bool contains(const PolytopeSet& a, std::span<const double> p, double tol) {
  for (const auto& c : a.components) {
    if (contains(c, p, tol)) return true;
  }
  return false;
}

bool contains(const PolyCone& c, std::span<const double> p, double tol) {
  if (c.dim != p.size()) throw DimensionError("cone contains: dimension mismatch");
  if (c.is_zero()) return norm_inf(p) <= tol;
  std::vector<Vec> cols;
  for (std::size_t k = 0; k < c.generators.size(); ++k) {
    cols.push_back(c.generators[k]);
    if (c.lineality[k]) cols.push_back(scaled(c.generators[k], -1.0));
  }
  LinearProgram lp(cols.size());
  for (std::size_t i = 0; i < c.dim; ++i) {
    Vec row(cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) row[k] = cols[k][i];
    lp.add_row(row, RowSense::LessEq, p[i] + tol);
    lp.add_row(row, RowSense::GreaterEq, p[i] - tol);
  }
  return solve_lp(lp).status == LpStatus::Optimal;
}

bool is_subset(const PolytopeSet& a, const PolytopeSet& b, double tol) {
  for (const auto& comp : a.components) {
    bool inside = false;
    for (const auto& target : b.components) {
      bool all = true;
      for (const auto& v : comp.vertices) {
        if (!contains(target, v, tol)) {
          all = false;
          break;
        }
      }
      if (all) {
        inside = true;
        break;
      }
    }
    if (!inside) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// zero membership

ZeroInSumResult zero_in_sum(const std::vector<PolytopeSet>& parts,
                            const std::optional<PolyCone>& cone, const LpOptions& lpopt) {
  if (parts.empty() && !cone) throw std::invalid_argument("zero_in_sum: nothing to sum");
  std::size_t d = parts.empty() ? cone->dim : parts.front().dim();
  for (const auto& p : parts) {
    if (p.components.empty()) throw std::invalid_argument("zero_in_sum: empty part");
    if (p.dim() != d) throw DimensionError("zero_in_sum: dimension mismatch");
  }
  if (cone && cone->dim != d) throw DimensionError("zero_in_sum: cone dimension mismatch");

  std::vector<Vec> cone_cols;
  std::vector<std::size_t> cone_owner;
  std::vector<double> cone_sign;
  if (cone) {
    for (std::size_t k = 0; k < cone->generators.size(); ++k) {
      cone_cols.push_back(cone->generators[k]);
      cone_owner.push_back(k);
      cone_sign.push_back(1.0);
      if (cone->lineality[k]) {
        cone_cols.push_back(scaled(cone->generators[k], -1.0));
        cone_owner.push_back(k);
        cone_sign.push_back(-1.0);
      }
    }
  }

  ZeroInSumResult result;
  std::vector<std::size_t> sel(parts.size(), 0);
  while (true) {
    ++result.selections_tried;
    std::size_t nvars = cone_cols.size();
    for (std::size_t k = 0; k < parts.size(); ++k) {
      nvars += parts[k].components[sel[k]].vertices.size();
    }
    LinearProgram lp(nvars);
    std::size_t offset = 0;
    std::vector<std::size_t> starts;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const auto& vs = parts[k].components[sel[k]].vertices;
      Vec row(nvars, 0.0);
      for (std::size_t j = 0; j < vs.size(); ++j) row[offset + j] = 1.0;
      lp.add_row(row, RowSense::Equal, 1.0);
      starts.push_back(offset);
      offset += vs.size();
    }
    for (std::size_t i = 0; i < d; ++i) {
      Vec row(nvars, 0.0);
      for (std::size_t k = 0; k < parts.size(); ++k) {
        const auto& vs = parts[k].components[sel[k]].vertices;
        for (std::size_t j = 0; j < vs.size(); ++j) row[starts[k] + j] = vs[j][i];
      }
      for (std::size_t c = 0; c < cone_cols.size(); ++c) row[offset + c] = cone_cols[c][i];
      lp.add_row(row, RowSense::Equal, 0.0);
    }
    const LpResult r = solve_lp(lp, lpopt);
    if (r.status == LpStatus::Optimal) {
      ZeroInSumWitness w;
      w.selection = sel;
      Vec total(d, 0.0);
      for (std::size_t k = 0; k < parts.size(); ++k) {
        const auto& vs = parts[k].components[sel[k]].vertices;
        std::vector<double> wk(r.x.begin() + static_cast<std::ptrdiff_t>(starts[k]),
                               r.x.begin() + static_cast<std::ptrdiff_t>(starts[k] + vs.size()));
        Vec pt(d, 0.0);
        for (std::size_t j = 0; j < vs.size(); ++j) axpy(pt, wk[j], vs[j]);
        axpy(total, 1.0, pt);
        w.weights.push_back(std::move(wk));
        w.points.push_back(std::move(pt));
      }
      w.cone_point.assign(d, 0.0);
      if (cone) {
        w.cone_coeffs.assign(cone->generators.size(), 0.0);
        for (std::size_t c = 0; c < cone_cols.size(); ++c) {
          w.cone_coeffs[cone_owner[c]] += cone_sign[c] * r.x[offset + c];
          axpy(w.cone_point, r.x[offset + c], cone_cols[c]);
        }
      }
      axpy(total, 1.0, w.cone_point);
      w.residual = norm2(total);
      result.sat = true;
      result.witness = std::move(w);
      return result;
    }
    // advance the selection odometer
    std::size_t k = 0;
    for (; k < parts.size(); ++k) {
      if (++sel[k] < parts[k].components.size()) break;
      sel[k] = 0;
    }
    if (k == parts.size()) break;
  }
  return result;
}

// ---------------------------------------------------------------------------
// balls and cones

namespace {

std::vector<Vec> cross_polytope(std::size_t d) {
  std::vector<Vec> vs;
  for (std::size_t i = 0; i < d; ++i) {
    for (double s : {1.0, -1.0}) {
      Vec e(d, 0.0);
      e[i] = s;
      vs.push_back(e);
    }
  }
  return vs;
}

std::vector<Vec> cube(std::size_t d) {
  if (d > 16) throw std::invalid_argument("cube vertices: dimension too large");
  std::vector<Vec> vs;
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    Vec v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    vs.push_back(v);
  }
  return vs;
}

// Regular m-gon on the unit circle, vertex k at angle 2*pi*k/m.
std::vector<Vec> polygon(std::size_t m) {
  std::vector<Vec> vs(m);
  const bool even = m % 2 == 0;
  const std::size_t half = even ? m / 2 : m;
  for (std::size_t k = 0; k < half; ++k) {
    double c, s;
    if (m % 4 == 0 && k % (m / 4) == 0) {
      const std::size_t q = k / (m / 4);
      c = q == 0 ? 1.0 : q == 2 ? -1.0 : 0.0;
      s = q == 1 ? 1.0 : q == 3 ? -1.0 : 0.0;
    } else {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
      c = std::cos(t);
      s = std::sin(t);
    }
    vs[k] = {c, s};
    if (even) vs[k + half] = {-c, -s};
  }
  return vs;
}

std::vector<Vec> sphere_grid(std::size_t m) {
  const std::size_t lat = std::max<std::size_t>(2, m / 2);
  std::vector<Vec> vs{{0.0, 0.0, 1.0}, {0.0, 0.0, -1.0}};
  for (std::size_t i = 1; i < lat; ++i) {
    const double th = std::numbers::pi * static_cast<double>(i) / static_cast<double>(lat);
    for (const auto& p : polygon(m)) {
      vs.push_back({std::sin(th) * p[0], std::sin(th) * p[1], std::cos(th)});
    }
  }
  return vs;
}

std::vector<Vec> l2_ball(std::size_t d, std::size_t m, BallMode mode) {
  if (m < 8) throw std::invalid_argument("l2 ball needs at least 8 facets");
  if (d == 1) return {{-1.0}, {1.0}};
  if (d == 2) {
    auto vs = polygon(m);
    if (mode == BallMode::Outer) {
      const double r = 1.0 / std::cos(std::numbers::pi / static_cast<double>(m));
      for (auto& v : vs) v = scaled(v, r);
    }
    return vs;
  }
  if (d == 3) {
    if (mode == BallMode::Outer) {
      throw std::invalid_argument("outer l2 ball is only available for d <= 2");
    }
    return sphere_grid(m);
  }
  throw std::invalid_argument("l2 ball approximation unsupported for d > 3");
}

}  // namespace

Polytope dual_ball(Norm primal, std::size_t d, std::size_t m, BallMode mode) {
  if (d == 0) throw std::invalid_argument("dual_ball: dimension must be at least 1");
  switch (primal) {
    case Norm::Linf:
      return make_polytope(cross_polytope(d));
    case Norm::L1:
      return make_polytope(cube(d));
    case Norm::L2:
      return make_polytope(l2_ball(d, m, mode));
  }
  throw std::invalid_argument("dual_ball: unknown norm");
}

Polytope primal_ball(Norm primal, std::size_t d, std::size_t m) {
  if (d == 0) throw std::invalid_argument("primal_ball: dimension must be at least 1");
  switch (primal) {
    case Norm::L1:
      return make_polytope(cross_polytope(d));
    case Norm::Linf:
      return make_polytope(cube(d));
    case Norm::L2:
      return make_polytope(l2_ball(d, m, BallMode::Inner));
  }
  throw std::invalid_argument("primal_ball: unknown norm");
}

PolyCone normal_cone(const OmegaSpec& omega, std::span<const double> x, double tol) {
  if (!omega.contains(x, tol)) throw std::invalid_argument("normal_cone: point is not in Omega");
  PolyCone c = PolyCone::zero(omega.dim);
  switch (omega.kind) {
    case OmegaSpec::Kind::Whole:
      break;
    case OmegaSpec::Kind::Box:
      for (std::size_t i = 0; i < omega.dim; ++i) {
        if (x[i] <= omega.lo[i] + tol) {
          Vec e(omega.dim, 0.0);
          e[i] = -1.0;
          c.generators.push_back(e);
          c.lineality.push_back(false);
        }
        if (x[i] >= omega.hi[i] - tol) {
          Vec e(omega.dim, 0.0);
          e[i] = 1.0;
          c.generators.push_back(e);
          c.lineality.push_back(false);
        }
      }
      break;
    case OmegaSpec::Kind::Halfspaces:
      for (std::size_t k = 0; k < omega.rows.size(); ++k) {
        if (dot(omega.rows[k], x) >= omega.rhs[k] - tol && norm_inf(omega.rows[k]) > 0.0) {
          c.generators.push_back(omega.rows[k]);
          c.lineality.push_back(false);
        }
      }
      break;
  }
  return c;
}

PolyCone dual_cone(const PolyCone& c) {
  const std::size_t d = c.dim;
  if (c.is_zero()) return PolyCone::whole(d);
  if (d > 3) throw std::invalid_argument("dual_cone: generator cones supported only for d <= 3");

  std::vector<Vec> ineq, eq;
  for (std::size_t k = 0; k < c.generators.size(); ++k) {
    if (norm_inf(c.generators[k]) == 0.0) continue;
    (c.lineality[k] ? eq : ineq).push_back(c.generators[k]);
  }
  std::vector<Vec> all = ineq;
  all.insert(all.end(), eq.begin(), eq.end());
  const std::vector<Vec> lin = null_space(all, d);

  PolyCone out{d, {}, {}};
  auto add_ray = [&](Vec r) {
    const double n = norm2(r);
    if (n <= 1e-12) return;
    r = scaled(r, 1.0 / n);
    for (const auto& g : ineq) {
      if (dot(g, r) < -1e-10 * norm2(g)) return;
    }
    for (const auto& g : out.generators) {
      if (max_abs_diff(g, r) <= 1e-9) return;
    }
    out.generators.push_back(std::move(r));
    out.lineality.push_back(false);
  };

  // Extreme rays of the pointed part: directions where d-1 independent
  // constraints (tight inequalities, equalities, lineality) hold.
  const std::size_t n = ineq.size();
  const std::size_t max_tight = std::min<std::size_t>(n, d - 1);
  std::vector<std::size_t> idx;
  auto visit = [&](const std::vector<std::size_t>& subset) {
    std::vector<Vec> rows = eq;
    rows.insert(rows.end(), lin.begin(), lin.end());
    for (auto i : subset) rows.push_back(ineq[i]);
    const auto ns = null_space(rows, d);
    if (ns.size() != 1) return;
    add_ray(ns[0]);
    add_ray(scaled(ns[0], -1.0));
  };
  // enumerate subsets of size 0..max_tight
  for (std::size_t size = 0; size <= max_tight; ++size) {
    std::vector<std::size_t> s(size);
    for (std::size_t i = 0; i < size; ++i) s[i] = i;
    while (true) {
      visit(s);
      if (size == 0) break;
      std::size_t i = size;
      while (i-- > 0) {
        if (s[i] < n - size + i) break;
      }
      if (i == static_cast<std::size_t>(-1)) break;
      ++s[i];
      for (std::size_t j = i + 1; j < size; ++j) s[j] = s[j - 1] + 1;
    }
  }
  for (const auto& l : lin) {
    out.generators.push_back(l);
    out.lineality.push_back(true);
  }
  if (out.generators.empty()) return PolyCone::zero(d);
  return out;
}

ConeSpec dual_cone(const ConeSpec& k) {
  if (k.kind == ConeSpec::Kind::SignOrthant) return ConeSpec::orthant(k.signs);
  return ConeSpec::generated(dual_cone(k.cone));
}

}  // namespace robustkkt
