#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "robustkkt/setcalc.hpp"

using namespace robustkkt;

namespace {

Polytope seg(double x0, double y0, double x1, double y1) {
  return make_polytope({{x0, y0}, {x1, y1}});
}

PolytopeSet one(Polytope p) { return PolytopeSet::single(std::move(p)); }

// Brute-force hull oracle for d = 2: a point is extreme iff some direction
// among many sampled ones has it as the unique maximizer.
std::vector<Vec> brute_extreme_2d(const std::vector<Vec>& pts) {
  std::vector<Vec> out;
  for (int k = 0; k < 3600; ++k) {
    const double t = 2 * M_PI * (k + 0.5) / 3600;
    const Vec dir{std::cos(t), std::sin(t)};
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (dot(pts[i], dir) > dot(pts[best], dir)) best = i;
    }
    bool have = false;
    for (const auto& o : out) have = have || max_abs_diff(o, pts[best]) < 1e-12;
    if (!have) out.push_back(pts[best]);
  }
  return out;
}

double dist_to_segment(double px, double py, const Vec& a, const Vec& b) {
  const double abx = b[0] - a[0], aby = b[1] - a[1];
  const double len2 = abx * abx + aby * aby;
  double t = len2 > 0 ? ((px - a[0]) * abx + (py - a[1]) * aby) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - a[0] - t * abx, py - a[1] - t * aby);
}

// Distance from 0 to the sum of parts, each part a union of segments (or points),
// with convex weights on a 1e-3 grid for all but the last part.
double brute_min_norm(const std::vector<PolytopeSet>& parts) {
  double best = INFINITY;
  std::vector<std::size_t> sel(parts.size(), 0);
  while (true) {
    std::vector<std::pair<Vec, Vec>> segs;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const auto& vs = parts[k].components[sel[k]].vertices;
      segs.push_back({vs.front(), vs.back()});
    }
    const std::size_t n = segs.size();
    const int steps = 1000;
    std::vector<int> idx(n - 1, 0);
    while (true) {
      double ax = 0.0, ay = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const double t = idx[k] / static_cast<double>(steps);
        ax += (1.0 - t) * segs[k].first[0] + t * segs[k].second[0];
        ay += (1.0 - t) * segs[k].first[1] + t * segs[k].second[1];
      }
      // -acc against the last segment, exactly.
      best = std::min(best, dist_to_segment(-ax, -ay, segs[n - 1].first, segs[n - 1].second));
      std::size_t k = 0;
      for (; k + 1 < n; ++k) {
        if (++idx[k] <= steps) break;
        idx[k] = 0;
      }
      if (k + 1 >= n) break;
    }
    std::size_t k = 0;
    for (; k < parts.size(); ++k) {
      if (++sel[k] < parts[k].components.size()) break;
      sel[k] = 0;
    }
    if (k == parts.size()) break;
  }
  return best;
}

}  // namespace

TEST_CASE("minkowski_sum: examples") {
  auto a = one(seg(-5, -0.4, 5, -0.4));
  auto s = minkowski_sum(a, PolytopeSet::point({0.0, 0.0}));
  REQUIRE(s.components.size() == 1);
  CHECK(same_vertices(s.components[0], seg(-5, -0.4, 5, -0.4)));

  auto b = minkowski_sum(one(seg(1, 0, 2, 0)), one(seg(0, 0, 1, 0)));
  CHECK(same_vertices(b.components[0], seg(1, 0, 3, 0)));

  PolytopeSet two{{Polytope::point({-3, 1}), Polytope::point({3, 1})}};
  auto t = minkowski_sum(two, PolytopeSet::point({0.0, 1.0}));
  REQUIRE(t.components.size() == 2);
  CHECK(same_vertices(t.components[0], Polytope::point({-3, 2})));
  CHECK(same_vertices(t.components[1], Polytope::point({3, 2})));
}

TEST_CASE("scale: examples") {
  auto s = scale(one(seg(1, 0, 2, 0)), 0.5);
  CHECK(same_vertices(s.components[0], seg(0.5, 0, 1, 0)));
  auto z = scale(PolytopeSet{{seg(1, 2, 3, 4), seg(-1, 0, 0, 0)}}, 0.0);
  REQUIRE(z.components.size() == 1);
  CHECK(same_vertices(z.components[0], Polytope::point({0, 0})));
  auto n = scale(one(seg(-1, 1, 1, 1)), -2.0);
  CHECK(same_vertices(n.components[0], seg(-2, -2, 2, -2)));
}

TEST_CASE("hull: examples") {
  PolytopeSet two{{Polytope::point({-3, 1}), Polytope::point({3, 1})}};
  CHECK(same_vertices(hull(two), seg(-3, 1, 3, 1)));
  CHECK(same_vertices(hull(Polytope::point({4, 2})), Polytope::point({4, 2})));
  Polytope sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}}};
  Polytope h = hull(sq);
  CHECK(h.vertices.size() == 4);
  CHECK_FALSE(contains(Polytope{brute_extreme_2d(h.vertices)}, Vec{2.0, 2.0}));
  CHECK(same_vertices(h, Polytope{brute_extreme_2d(sq.vertices)}));
}

TEST_CASE("property: hull agrees with a direction-sampling oracle and keeps only extreme points") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> c(-20, 20);
  for (int t = 0; t < 200; ++t) {
    std::vector<Vec> pts;
    const int n = 3 + t % 12;
    for (int i = 0; i < n; ++i) pts.push_back({c(rng) / 4.0, c(rng) / 4.0});
    Polytope h = hull(Polytope{pts});
    CHECK(same_vertices(h, Polytope{brute_extreme_2d(pts)}));
  }
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 50; ++t) {
    std::vector<Vec> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({u(rng), u(rng), u(rng)});
    Polytope h = hull(Polytope{pts});
    for (std::size_t i = 0; i < h.vertices.size(); ++i) {
      std::vector<Vec> others;
      for (std::size_t j = 0; j < h.vertices.size(); ++j) {
        if (j != i) others.push_back(h.vertices[j]);
      }
      CHECK_FALSE(contains(Polytope{others}, h.vertices[i], 1e-12));
    }
    for (const auto& p : pts) CHECK(contains(h, p, 1e-9));
  }
}

TEST_CASE("property: minkowski sum is commutative and associative") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3);
  auto rand_poly = [&](std::size_t d) {
    std::vector<Vec> pts;
    for (int i = 0; i < 4; ++i) {
      Vec p(d);
      for (auto& x : p) x = u(rng);
      pts.push_back(p);
    }
    return PolytopeSet::single(hull(Polytope{pts}));
  };
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = t % 2 ? 2 : 3;
    auto a = rand_poly(d), b = rand_poly(d), c = rand_poly(d);
    auto ab = minkowski_sum(a, b), ba = minkowski_sum(b, a);
    CHECK(same_vertices(ab.components[0], ba.components[0]));
    auto l = minkowski_sum(ab, c), r = minkowski_sum(a, minkowski_sum(b, c));
    CHECK(same_vertices(l.components[0], r.components[0]));
  }
}

TEST_CASE("zero_in_sum: examples") {
  const double h = std::sqrt(2.0) / 2;
  auto r = zero_in_sum({PolytopeSet::point({-h, 0}), PolytopeSet::point({h, 0})}, PolyCone::zero(2));
  CHECK(r.sat);
  REQUIRE(r.witness);
  CHECK(r.witness->residual <= 1e-12);

  CHECK_FALSE(zero_in_sum({one(seg(1, 0, 2, 0))}, PolyCone::zero(2)).sat);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int t = 0; t < 20; ++t) {
    Vec p{u(rng), u(rng)};
    CHECK(zero_in_sum({PolytopeSet::point(p), PolytopeSet::point(scaled(p, -1))}, std::nullopt).sat);
  }
}

TEST_CASE("zero_in_sum: cones and unions") {
  PolyCone c{2, {{-1.0, 0.0}}, {false}};
  CHECK(zero_in_sum({one(seg(1, 0, 2, 0))}, c).sat);
  CHECK_FALSE(zero_in_sum({one(seg(1, 1, 2, 1))}, c).sat);
  PolyCone line{2, {{0.0, 1.0}}, {true}};
  CHECK(zero_in_sum({PolytopeSet::point({0, 5})}, line).sat);
  CHECK(zero_in_sum({PolytopeSet::point({0, -5})}, line).sat);
  PolytopeSet u{{Polytope::point({-1, 0}), Polytope::point({1, 0})}};
  auto r = zero_in_sum({u, PolytopeSet::point({1, 0})}, std::nullopt);
  REQUIRE(r.sat);
  CHECK(r.witness->selection[0] == 0);
}

TEST_CASE("property: zero_in_sum agrees with grid brute force") {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<int> c(-6, 6);
  auto rand_seg = [&] {
    return seg(c(rng) / 2.0, c(rng) / 2.0, c(rng) / 2.0, c(rng) / 2.0);
  };
  int decided = 0, sat_count = 0;
  for (int t = 0; t < 1000 && decided < 250; ++t) {
    const std::size_t nparts = 1 + t % 3;
    std::vector<PolytopeSet> parts;
    for (std::size_t k = 0; k < nparts; ++k) {
      PolytopeSet p = one(rand_seg());
      if ((t + k) % 5 == 0) p.components.push_back(rand_seg());
      parts.push_back(p);
    }
    if (t % 2 == 0) {
      // Plant a grid-aligned zero: shift the last part by minus the sum of
      // grid points chosen in the others.
      Vec acc{0.0, 0.0};
      for (std::size_t k = 0; k + 1 < nparts; ++k) {
        const auto& vs = parts[k].components[0].vertices;
        const double w = (c(rng) + 6) / 12.0;
        axpy(acc, 1 - w, vs.front());
        axpy(acc, w, vs.back());
      }
      auto& last = parts.back().components[0];
      const Vec anchor = last.vertices.front();
      for (auto& v : last.vertices) v = sub(sub(v, anchor), acc);
    }
    const double dmin = brute_min_norm(parts);
    bool oracle;
    if (dmin <= 1e-9) {
      oracle = true;
    } else if (dmin > 2e-2) {
      oracle = false;
    } else {
      continue;
    }
    ++decided;
    sat_count += oracle ? 1 : 0;
    const auto r = zero_in_sum(parts, std::nullopt);
    CHECK(r.sat == oracle);
    if (r.sat) CHECK(r.witness->residual <= 1e-9);
  }
  CHECK(decided >= 200);
  CHECK(sat_count >= 50);
  CHECK(decided - sat_count >= 50);
}

TEST_CASE("dual_ball: shapes") {
  auto cross = dual_ball(Norm::Linf, 2);
  CHECK(same_vertices(cross, Polytope{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}}));
  auto box = dual_ball(Norm::L1, 2);
  CHECK(box.vertices.size() == 4);
  auto b64 = dual_ball(Norm::L2, 2, 64);
  REQUIRE(b64.vertices.size() == 64);
  for (const auto& v : b64.vertices) {
    CHECK(std::abs(norm2(v) - 1.0) <= 1e-12);
    bool neg = false;
    for (const auto& w : b64.vertices) neg = neg || max_abs_diff(w, scaled(v, -1.0)) == 0.0;
    CHECK(neg);
  }
  bool south = false;
  for (const auto& v : b64.vertices) south = south || (v[0] == 0.0 && v[1] == -1.0);
  CHECK(south);
  auto outer = dual_ball(Norm::L2, 2, 64, BallMode::Outer);
  CHECK(contains(outer, Vec{0.0, 1.0}));
  CHECK(contains(outer, Vec{std::cos(0.05), std::sin(0.05)}));
  CHECK_FALSE(contains(b64, Vec{std::cos(M_PI / 64), std::sin(M_PI / 64)}, 1e-12));
  auto s3 = dual_ball(Norm::L2, 3, 16);
  for (const auto& v : s3.vertices) CHECK(std::abs(norm2(v) - 1.0) <= 1e-12);
  CHECK_THROWS(dual_ball(Norm::L2, 4, 64));
  CHECK_THROWS(dual_ball(Norm::L2, 2, 4));
  CHECK(dual_ball(Norm::L2, 1, 64).vertices.size() == 2);
}

TEST_CASE("normal_cone: examples") {
  auto whole = normal_cone(OmegaSpec::whole(2), Vec{3.0, -1.0});
  CHECK(whole.is_zero());
  auto box = OmegaSpec::box({0, 0}, {1, 1});
  auto face = normal_cone(box, Vec{0.0, 0.5});
  REQUIRE(face.generators.size() == 1);
  CHECK(face.generators[0] == Vec{-1.0, 0.0});
  auto corner = normal_cone(box, Vec{0.0, 0.0});
  REQUIRE(corner.generators.size() == 2);
  // Oracle: every generator satisfies <n, y - x> <= 0 on sampled y in the box.
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const Vec y{u(rng), u(rng)};
    for (const auto& n : corner.generators) CHECK(dot(n, y) <= 0.0);
  }
  CHECK_THROWS(normal_cone(box, Vec{2.0, 0.0}));
  auto hs = OmegaSpec::halfspaces({{1.0, 1.0}}, {1.0});
  auto n = normal_cone(hs, Vec{0.5, 0.5});
  REQUIRE(n.generators.size() == 1);
  CHECK(n.generators[0] == Vec{1.0, 1.0});
}

TEST_CASE("dual_cone: examples and involution") {
  auto k = ConeSpec::orthant({-1, 1, 1});
  auto kd = dual_cone(k);
  CHECK(kd.signs == std::vector<int>{-1, 1, 1});
  CHECK(dual_cone(kd).signs == k.signs);
  auto w = dual_cone(PolyCone::zero(3));
  CHECK(w.generators.size() == 3);
  for (bool l : w.lineality) CHECK(l);
  auto r3 = dual_cone(ConeSpec::orthant({1, 1, 1}).to_polycone());
  REQUIRE(r3.generators.size() == 3);
  for (const auto& g : r3.generators) {
    CHECK(std::count(g.begin(), g.end(), 1.0) == 1);
    CHECK(std::count(g.begin(), g.end(), 0.0) == 2);
  }
  CHECK(dual_cone(PolyCone::whole(2)).is_zero());
  PolyCone wedge{2, {{1.0, 0.0}, {1.0, 1.0}}, {false, false}};
  auto wd = dual_cone(wedge);
  REQUIRE(wd.generators.size() == 2);
  for (const auto& g : wd.generators) {
    CHECK(dot(g, Vec{1.0, 0.0}) >= -1e-12);
    CHECK(dot(g, Vec{1.0, 1.0}) >= -1e-12);
  }
  CHECK(contains(wd, Vec{0.0, 1.0}));
  CHECK(contains(wd, Vec{1.0, -1.0}));
  CHECK_FALSE(contains(wd, Vec{-1.0, 0.5}));
  auto half = dual_cone(PolyCone{2, {{1.0, 0.0}}, {false}});
  CHECK(contains(half, Vec{0.0, -3.0}));
  CHECK(contains(half, Vec{2.0, 5.0}));
  CHECK_FALSE(contains(half, Vec{-1.0, 0.0}));
}

TEST_CASE("cone spec: membership and pointedness") {
  auto k = ConeSpec::orthant({-1, 1, 1});
  CHECK(k.contains(Vec{0.0, 0.0, 1.5}));
  CHECK_FALSE(k.contains(Vec{1.0, 0.0, 0.0}));
  CHECK(k.is_pointed());
  CHECK_FALSE(ConeSpec::generated(PolyCone{2, {{1, 0}, {-1, 0}}, {false, false}}).is_pointed());
  CHECK(ConeSpec::generated(PolyCone{2, {{1, 0}, {1, 1}}, {false, false}}).is_pointed());
}
