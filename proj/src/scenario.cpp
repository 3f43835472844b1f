#include "robustkkt/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace robustkkt {

UncertaintySet UncertaintySet::interval(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo <= hi)) {
    throw std::invalid_argument("uncertainty interval must satisfy lo <= hi with finite ends");
  }
  UncertaintySet u;
  u.kind = Kind::Interval;
  u.lo = lo;
  u.hi = hi;
  return u;
}

UncertaintySet UncertaintySet::finite(std::vector<double> pts) {
  if (pts.empty()) throw std::invalid_argument("scenario list must be nonempty");
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  UncertaintySet u;
  u.kind = Kind::Finite;
  u.points = std::move(pts);
  u.lo = u.points.front();
  u.hi = u.points.back();
  return u;
}

namespace {

constexpr double kInvPhi = 0.6180339887498949;

struct Candidate {
  double v;
  double value;
};

class Scan {
 public:
  Scan(const Program& prog, std::span<const double> x, const UncertaintySet& u,
       const MaximizerOptions& opt)
      : prog_(prog), x_(x), u_(u), opt_(opt) {}

  double f(double v) const { return prog_.run(x_, v); }

  double grid_point(std::size_t k) const {
    const std::size_t n = opt_.grid - 1;
    if (k == n) return u_.hi;
    return u_.lo + (u_.hi - u_.lo) * static_cast<double>(k) / static_cast<double>(n);
  }

  // Returns false if some value exceeded stop_above (grid left partial).
  bool sample(double stop_above) {
    const std::size_t n = std::max<std::size_t>(opt_.grid, 2);
    vs_.resize(n);
    ys_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      vs_[k] = grid_point(k);
      ys_[k] = f(vs_[k]);
      if (ys_[k] > stop_above) {
        early_ = ys_[k];
        return false;
      }
    }
    return true;
  }

  double early() const { return early_; }

  // Local maxima of the grid (runs of equal values count once), refined by
  // golden-section search on the neighbouring cells.
  std::vector<Candidate> refined_maxima() const {
    const std::size_t n = ys_.size();
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    for (std::size_t s = 0; s < n;) {
      std::size_t e = s;
      while (e + 1 < n && ys_[e + 1] == ys_[s]) ++e;
      const bool left_ok = s == 0 || ys_[s - 1] < ys_[s];
      const bool right_ok = e + 1 == n || ys_[e + 1] < ys_[e];
      if (left_ok && right_ok) runs.push_back({s, e});
      s = e + 1;
    }
    std::stable_sort(runs.begin(), runs.end(),
                     [&](const auto& a, const auto& b) { return ys_[a.first] > ys_[b.first]; });
    if (runs.size() > opt_.max_candidates) runs.resize(opt_.max_candidates);

    std::vector<Candidate> out;
    for (auto [s, e] : runs) {
      out.push_back({vs_[s], ys_[s]});
      if (e != s) {
        out.push_back({vs_[e], ys_[e]});
        continue;
      }
      const double a = s == 0 ? vs_[s] : vs_[s - 1];
      const double b = s + 1 == n ? vs_[s] : vs_[s + 1];
      if (a < b) {
        Candidate g = golden(a, b);
        if (g.value > out.back().value) out.back() = g;
      }
    }
    return out;
  }

  // Boundary between a failing point `out` and a passing point `in`.
  double boundary(double in, double out, double level) const {
    while (std::abs(out - in) > opt_.width) {
      const double mid = 0.5 * (in + out);
      (f(mid) >= level ? in : out) = mid;
    }
    return in;
  }

  const std::vector<double>& vs() const { return vs_; }
  const std::vector<double>& ys() const { return ys_; }

 private:
  Candidate golden(double a, double b) const {
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    Candidate best = fc >= fd ? Candidate{c, fc} : Candidate{d, fd};
    while (b - a > opt_.width) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - kInvPhi * (b - a);
        fc = f(c);
        if (fc > best.value) best = {c, fc};
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + kInvPhi * (b - a);
        fd = f(d);
        if (fd > best.value) best = {d, fd};
      }
    }
    return best;
  }

  const Program& prog_;
  std::span<const double> x_;
  const UncertaintySet& u_;
  const MaximizerOptions& opt_;
  std::vector<double> vs_, ys_;
  double early_ = 0.0;
};

double best_of(const std::vector<Candidate>& c, const std::vector<double>& ys) {
  double m = *std::max_element(ys.begin(), ys.end());
  for (const auto& k : c) m = std::max(m, k.value);
  return m;
}

}  // namespace

double envelope_value(const Expr& g, std::span<const double> x, const UncertaintySet& u,
                      const MaximizerOptions& opt, double stop_above) {
  if (!g.has_uncertainty()) return eval_node(g.root(), x, std::nullopt);
  const Program prog = Program::specialize(g.root(), x);
  if (u.kind == UncertaintySet::Kind::Finite || u.lo == u.hi) {
    double m = -INFINITY;
    const std::vector<double> pts = u.kind == UncertaintySet::Kind::Finite ? u.points
                                                                           : std::vector<double>{u.lo};
    for (double v : pts) {
      m = std::max(m, prog.run(x, v));
      if (m > stop_above) return m;
    }
    return m;
  }
  Scan scan(prog, x, u, opt);
  if (!scan.sample(stop_above)) return scan.early();
  return best_of(scan.refined_maxima(), scan.ys());
}

ScenarioMax maximize_scenarios(const Expr& g, std::span<const double> x, const UncertaintySet& u,
                               double tol, const MaximizerOptions& opt) {
  if (!(tol > 0.0)) throw std::invalid_argument("active-set tolerance must be positive");
  ScenarioMax out;
  if (!g.has_uncertainty()) {
    out.value = eval_node(g.root(), x, std::nullopt);
    if (u.kind == UncertaintySet::Kind::Finite) {
      out.active = u.points;
    } else if (u.lo == u.hi) {
      out.active = {u.lo};
    } else {
      out.active = {u.lo, u.hi};
      out.plateaus.push_back({u.lo, u.hi});
    }
    return out;
  }
  const Program prog = Program::specialize(g.root(), x);
  if (u.kind == UncertaintySet::Kind::Finite || u.lo == u.hi) {
    const std::vector<double> pts = u.kind == UncertaintySet::Kind::Finite ? u.points
                                                                           : std::vector<double>{u.lo};
    std::vector<double> vals;
    for (double v : pts) vals.push_back(prog.run(x, v));
    out.value = *std::max_element(vals.begin(), vals.end());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (vals[i] >= out.value - tol) out.active.push_back(pts[i]);
    }
    return out;
  }

  Scan scan(prog, x, u, opt);
  scan.sample(INFINITY);
  const auto cands = scan.refined_maxima();
  out.value = best_of(cands, scan.ys());
  const double level = out.value - tol;
  const auto& vs = scan.vs();
  const auto& ys = scan.ys();

  // Plateaus: at least three consecutive grid points within tol of the max.
  for (std::size_t s = 0; s < ys.size();) {
    if (ys[s] < level) {
      ++s;
      continue;
    }
    std::size_t e = s;
    while (e + 1 < ys.size() && ys[e + 1] >= level) ++e;
    if (e - s >= 2) {
      const double a = s == 0 ? vs[s] : scan.boundary(vs[s], vs[s - 1], level);
      const double b = e + 1 == ys.size() ? vs[e] : scan.boundary(vs[e], vs[e + 1], level);
      out.plateaus.push_back({a, b});
    }
    s = e + 1;
  }

  std::vector<Candidate> reps;
  for (const auto& [a, b] : out.plateaus) {
    reps.push_back({a, scan.f(a)});
    reps.push_back({b, scan.f(b)});
  }
  for (const auto& c : cands) {
    if (c.value < level) continue;
    bool covered = false;
    for (const auto& [a, b] : out.plateaus) {
      covered = covered || (c.v >= a - opt.cluster_radius && c.v <= b + opt.cluster_radius);
    }
    if (!covered) reps.push_back(c);
  }
  std::sort(reps.begin(), reps.end(), [](const Candidate& a, const Candidate& b) { return a.v < b.v; });

  // Merge clusters; an interval endpoint wins, otherwise the larger value.
  const bool has_lo_rep = scan.f(u.lo) >= level, has_hi_rep = scan.f(u.hi) >= level;
  std::vector<Candidate> merged;
  for (const auto& r : reps) {
    if (!merged.empty() && r.v - merged.back().v <= opt.cluster_radius) {
      auto& m = merged.back();
      const bool m_end = m.v == u.lo || m.v == u.hi;
      const bool r_end = r.v == u.lo || r.v == u.hi;
      if ((r_end && !m_end) || (r_end == m_end && r.value > m.value)) m = r;
      continue;
    }
    merged.push_back(r);
  }
  for (auto& m : merged) {
    if (has_lo_rep && m.v != u.lo && std::abs(m.v - u.lo) <= opt.cluster_radius) m = {u.lo, scan.f(u.lo)};
    if (has_hi_rep && m.v != u.hi && std::abs(m.v - u.hi) <= opt.cluster_radius) m = {u.hi, scan.f(u.hi)};
  }
  for (const auto& m : merged) {
    if (out.active.empty() || out.active.back() != m.v) out.active.push_back(m.v);
  }
  return out;
}

}  // namespace robustkkt
