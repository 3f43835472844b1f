#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "random_expr.hpp"
#include "robustkkt/subdiff.hpp"

using namespace robustkkt;

namespace {

const Vec kOrigin{0.0, 0.0};

Polytope box2(double x0, double x1, double y0, double y1) {
  return hull(make_polytope({{x0, y0}, {x1, y0}, {x0, y1}, {x1, y1}}));
}

bool is_single(const PolytopeSet& s, const Polytope& p) {
  return s.components.size() == 1 && same_vertices(hull(s.components[0]), hull(p), 1e-12);
}

Vec random_unit(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> n;
  Vec u(d);
  for (auto& c : u) c = n(rng);
  return scaled(u, 1.0 / norm2(u));
}

Vec grid_point(std::mt19937_64& rng, std::size_t d) {
  static const double vals[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  std::uniform_int_distribution<int> pick(0, 4);
  Vec x(d);
  for (auto& c : x) c = vals[pick(rng)];
  return x;
}

// Sampled Clarke directional derivative: largest difference quotient over base
// points near x.
double clarke_sample(const Program& p, const Vec& x, const Vec& u, std::mt19937_64& rng) {
  const double delta = 1e-6, t = 1e-8;
  std::uniform_real_distribution<double> r(-1.0, 1.0);
  double best = -INFINITY;
  Vec y(x.size()), z(x.size());
  for (int k = 0; k < 400; ++k) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      y[i] = x[i] + delta * r(rng);
      z[i] = y[i] + t * u[i];
    }
    best = std::max(best, (p.run(z, 0.0) - p.run(y, 0.0)) / t);
  }
  return best;
}

}  // namespace

TEST_CASE("mode parsing") {
  CHECK(parse_mode("hull") == SubdiffMode::Hull);
  CHECK(parse_mode("limiting") == SubdiffMode::Limiting);
  CHECK_THROWS_AS(parse_mode("clarke"), std::invalid_argument);
  CHECK(std::string(to_string(Exactness::OuterEstimate)) == "outer-estimate");
}

TEST_CASE("subdifferentials of the worked examples") {
  SUBCASE("5|x1| - (2/5)x2 + 4/5 at the origin") {
    const Expr f = parse_expr("5*abs(x1) - (2/5)*x2 + 4/5", 2);
    for (auto mode : {SubdiffMode::Limiting, SubdiffMode::Hull}) {
      const auto r = limiting_subdiff(f, kOrigin, std::nullopt, mode);
      CHECK(is_single(r.set, box2(-5, 5, -0.4, -0.4)));
      CHECK(r.exactness == Exactness::Exact);
    }
  }
  SUBCASE("-3|x1| + v x2 - 2 at v = 1 in hull mode") {
    const Expr g = parse_expr("-3*abs(x1) + v*x2 - 2", 2);
    const auto r = limiting_subdiff(g, kOrigin, 1.0, SubdiffMode::Hull);
    CHECK(is_single(r.set, box2(-3, 3, 1, 1)));
    const auto lim = limiting_subdiff(g, kOrigin, 1.0, SubdiffMode::Limiting);
    CHECK(lim.set.components.size() == 2);
    CHECK(lim.set.vertex_count() == 2);
  }
  SUBCASE("1/(|x1|+1) - 3x2 + 2: concave kink") {
    const Expr f = parse_expr("1/(abs(x1) + 1) - 3*x2 + 2", 2);
    const auto lim = limiting_subdiff(f, kOrigin, std::nullopt, SubdiffMode::Limiting);
    REQUIRE(lim.set.components.size() == 2);
    CHECK(contains(lim.set, Vec{-1, -3}));
    CHECK(contains(lim.set, Vec{1, -3}));
    CHECK_FALSE(contains(lim.set, Vec{0, -3}));
    const auto h = limiting_subdiff(f, kOrigin, std::nullopt, SubdiffMode::Hull);
    CHECK(is_single(h.set, box2(-1, 1, -3, -3)));
    CHECK(std::find(lim.rules.begin(), lim.rules.end(), "abs-kink-concave") != lim.rules.end());
  }
  SUBCASE("-2x1 + |x2|") {
    const Expr f = parse_expr("-2*x1 + abs(x2)", 2);
    const auto r = limiting_subdiff(f, kOrigin, std::nullopt, SubdiffMode::Hull);
    CHECK(is_single(r.set, box2(-2, -2, -1, 1)));
  }
  SUBCASE("third objective: the engine gives slope +1 in x2") {
    const Expr f = parse_expr("1/sqrt(abs(x1) + 1) - abs(x2 - 1) - 1", 2);
    const auto r = limiting_subdiff(f, kOrigin, std::nullopt, SubdiffMode::Hull);
    CHECK(is_single(r.set, box2(-0.5, 0.5, 1, 1)));
  }
  SUBCASE("first example's remaining objectives") {
    const Expr f2 = parse_expr("(1/2)*abs(x1) + 6", 2);
    const Expr f3 = parse_expr("4*abs(x1) + (1/2)*x2 + 1", 2);
    CHECK(is_single(limiting_subdiff(f2, kOrigin, std::nullopt, SubdiffMode::Hull).set,
                    box2(-0.5, 0.5, 0, 0)));
    CHECK(is_single(limiting_subdiff(f3, kOrigin, std::nullopt, SubdiffMode::Hull).set,
                    box2(-4, 4, 0.5, 0.5)));
  }
}

TEST_CASE("finite max tie") {
  const Expr g = parse_expr("max(x1, 2*x1)", 2);
  const auto r = limiting_subdiff(g, kOrigin, std::nullopt, SubdiffMode::Limiting);
  CHECK(is_single(r.set, box2(1, 2, 0, 0)));
  CHECK(r.exactness == Exactness::Exact);
  // Negative scaling turns the tie into a union of the branch gradients.
  const auto n = scaled_subdiff(g, kOrigin, std::nullopt, -1.0, SubdiffMode::Limiting);
  CHECK(n.set.components.size() == 2);
  CHECK(contains(n.set, Vec{-1, 0}));
  CHECK(contains(n.set, Vec{-2, 0}));
  CHECK_FALSE(contains(n.set, Vec{-1.5, 0}));
  // Away from the tie only the active branch counts.
  const auto s = limiting_subdiff(g, Vec{1.0, 0.0}, std::nullopt, SubdiffMode::Limiting);
  CHECK(is_single(s.set, Polytope::point({2, 0})));
}

TEST_CASE("unsupported structures name the node") {
  const Expr p = parse_expr("abs(x1)*abs(x2)", 2);
  try {
    limiting_subdiff(p, kOrigin, std::nullopt, SubdiffMode::Hull);
    FAIL("expected UnsupportedStructure");
  } catch (const UnsupportedStructure& e) {
    CHECK(std::string(e.what()).find("abs(x1)*abs(x2)") != std::string::npos);
  }
  CHECK_THROWS_AS(limiting_subdiff(parse_expr("sqrt(abs(x1))", 2), kOrigin, std::nullopt,
                                   SubdiffMode::Hull),
                  UnsupportedStructure);
  // One nonsmooth factor is fine: |x1| * (x2 + 2) at the origin.
  const auto r = limiting_subdiff(parse_expr("abs(x1)*(x2 + 2)", 2), kOrigin, std::nullopt,
                                  SubdiffMode::Hull);
  CHECK(is_single(r.set, box2(-2, 2, 0, 0)));
}

TEST_CASE("uncertainty argument handling") {
  const Expr g = parse_expr("v*x1", 2);
  CHECK_THROWS_AS(limiting_subdiff(g, kOrigin, std::nullopt, SubdiffMode::Hull),
                  UncertaintyArgumentError);
  CHECK_THROWS_AS(limiting_subdiff(g, Vec{0.0}, 1.0, SubdiffMode::Hull), DimensionError);
}

TEST_CASE("exactness flag") {
  auto flag = [](const char* text, Vec x) {
    return limiting_subdiff(parse_expr(text, 2), x, std::nullopt, SubdiffMode::Hull).exactness;
  };
  CHECK(flag("abs(x1) + max(x2, -x2)", kOrigin) == Exactness::Exact);
  CHECK(flag("abs(x1) - abs(x1)", kOrigin) == Exactness::OuterEstimate);
  CHECK(flag("abs(x1 + x2) + abs(x2)", kOrigin) == Exactness::OuterEstimate);
  CHECK(flag("abs(max(x1, -x1))", kOrigin) == Exactness::OuterEstimate);
  // A kink reached with zero weight is not applied.
  CHECK(flag("abs(x1) + 0*abs(x1)", kOrigin) == Exactness::Exact);
}

TEST_CASE("component cap collapses to the hull") {
  std::string text;
  const std::size_t d = 9;
  for (std::size_t i = 1; i <= d; ++i) text += " - abs(x" + std::to_string(i) + ")";
  const Expr e = parse_expr(text, d);
  const Vec x(d, 0.0);
  const auto r = limiting_subdiff(e, x, std::nullopt, SubdiffMode::Limiting);
  CHECK(r.set.components.size() == 1);
  CHECK(r.exactness == Exactness::OuterEstimate);
  CHECK(std::find(r.rules.begin(), r.rules.end(), "component-cap") != r.rules.end());
  CHECK(contains(r.set, Vec(d, 0.0)));
  CHECK(contains(r.set, Vec(d, 1.0)));
}

TEST_CASE("sup rule over the uncertainty set") {
  SUBCASE("g1 of the first robust example") {
    const Expr g = parse_expr("v^2*abs(x2) + max(x1, 2*x1) - 3*abs(v)", 2);
    const auto r = sup_rule(g, kOrigin, UncertaintySet::interval(-1, 1), 1e-9, SubdiffMode::Hull);
    CHECK(r.scenarios.active.size() == 1);
    CHECK(is_single(r.result.set, box2(1, 2, 0, 0)));
  }
  SUBCASE("g1 of the second robust example") {
    const Expr g = parse_expr("(1/4)*v^2*abs(x1) + (1/2)*v^2*x2 - v^2 + (1/4)*abs(v)", 2);
    const auto r =
        sup_rule(g, kOrigin, UncertaintySet::interval(-1, -0.25), 1e-9, SubdiffMode::Hull);
    CHECK(r.used_scenarios == std::vector<double>{-0.25});
    CHECK(is_single(r.result.set, box2(-1.0 / 64, 1.0 / 64, 1.0 / 32, 1.0 / 32)));
    CHECK(r.result.exactness == Exactness::Exact);
    const auto lim =
        sup_rule(g, kOrigin, UncertaintySet::interval(-1, -0.25), 1e-9, SubdiffMode::Limiting);
    CHECK(lim.result.exactness == Exactness::OuterEstimate);
  }
  SUBCASE("g2 of the second robust example is smooth at the origin") {
    const Expr g = parse_expr("(1/8)*x1^2 + abs(v)*x2 - abs(v) + 1/4", 2);
    const auto r =
        sup_rule(g, kOrigin, UncertaintySet::interval(-1, -0.25), 1e-9, SubdiffMode::Hull);
    CHECK(is_single(r.result.set, Polytope::point({0, 0.25})));
  }
  SUBCASE("a plateau is sampled and flagged") {
    const Expr g = parse_expr("-3*abs(x1) + v*x2 - 2", 2);
    const auto r = sup_rule(g, kOrigin, UncertaintySet::interval(-1, 1), 1e-9, SubdiffMode::Hull);
    CHECK(r.used_scenarios.size() == 17);
    CHECK(is_single(r.result.set, box2(-3, 3, -1, 1)));
    CHECK(r.result.exactness == Exactness::OuterEstimate);
  }
  SUBCASE("v-independent g reduces to the plain subdifferential") {
    const Expr g = parse_expr("abs(x1) + x2", 2);
    const auto r = sup_rule(g, kOrigin, UncertaintySet::interval(0, 1), 1e-9, SubdiffMode::Hull);
    const auto p = limiting_subdiff(g, kOrigin, std::nullopt, SubdiffMode::Hull);
    CHECK(is_single(r.result.set, p.set.components[0]));
  }
}

TEST_CASE("scalarized subdifferential") {
  const std::vector<Expr> f{parse_expr("-2*x1 + abs(x2)", 2),
                            parse_expr("1/(abs(x1) + 1) - 3*x2 + 2", 2),
                            parse_expr("1/sqrt(abs(x1) + 1) - abs(x2 - 1) - 1", 2)};
  SUBCASE("multipliers of the first robust example") {
    const double s = std::sqrt(2.0) / 4;
    const Vec y{s, 0.0, s};
    const auto r = scalarized_subdiff(y, f, kOrigin, SubdiffMode::Hull);
    CHECK(contains(r.combination.set, Vec{-std::sqrt(2.0) / 2, 0.0}));
    CHECK(is_subset(r.direct.set, r.combination.set));
  }
  SUBCASE("zero multipliers") {
    const auto r = scalarized_subdiff(Vec{0, 0, 0}, f, kOrigin, SubdiffMode::Limiting);
    CHECK(is_single(r.direct.set, Polytope::point({0, 0})));
    CHECK(is_single(r.combination.set, Polytope::point({0, 0})));
  }
  SUBCASE("unit multipliers select one objective") {
    for (std::size_t j = 0; j < 3; ++j) {
      Vec y(3, 0.0);
      y[j] = 1.0;
      const auto r = scalarized_subdiff(y, f, kOrigin, SubdiffMode::Hull);
      const auto p = limiting_subdiff(f[j], kOrigin, std::nullopt, SubdiffMode::Hull);
      CHECK(is_single(r.direct.set, p.set.components[0]));
      CHECK(is_single(r.combination.set, p.set.components[0]));
    }
  }
  SUBCASE("fixtures replace engine output in the combination") {
    std::vector<std::optional<PolytopeSet>> fx(3);
    fx[2] = PolytopeSet{{box2(-0.5, 0.5, 1, 1), box2(-0.5, 0.5, -1, -1)}};
    const auto r = scalarized_subdiff(Vec{0, 0, 2}, f, kOrigin, SubdiffMode::Limiting, fx);
    CHECK(r.from_fixture == std::vector<bool>{false, false, true});
    CHECK(contains(r.combination.set, Vec{0, -2}));
    CHECK_FALSE(contains(r.direct.set, Vec{0, -2}));
  }
  CHECK_THROWS_AS(scalarized_subdiff(Vec{1, 0}, f, kOrigin, SubdiffMode::Hull), DimensionError);
}

TEST_CASE("property: smooth expressions give the gradient in both modes") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> pt(-1.5, 1.5);
  int checked = 0;
  for (int it = 0; it < 400 && checked < 300; ++it) {
    const std::string text = testing_support::ExprGenerator(rng, 3, false).gen(3);
    const Expr e = parse_expr(text, 3);
    const Vec x{pt(rng), pt(rng), pt(rng)};
    Vec g;
    try {
      g = smooth_gradient(e, x, std::nullopt);
    } catch (const NonsmoothError&) {
      continue;
    } catch (const DomainError&) {
      continue;
    }
    for (auto mode : {SubdiffMode::Limiting, SubdiffMode::Hull}) {
      const auto r = limiting_subdiff(e, x, std::nullopt, mode);
      REQUIRE(r.set.vertex_count() == 1);
      CHECK(max_abs_diff(r.set.components[0].vertices[0], g) <= 1e-9 * (1 + norm_inf(g)));
    }
    // Central differences.
    for (std::size_t i = 0; i < 3; ++i) {
      const double h = 1e-6;
      Vec a = x, b = x;
      a[i] += h;
      b[i] -= h;
      const double fd = (eval(e, a) - eval(e, b)) / (2 * h);
      CHECK(std::abs(fd - g[i]) <= 1e-4 * (1 + std::abs(g[i])));
    }
    ++checked;
  }
  CHECK(checked >= 200);
}

TEST_CASE("property: convex subclass support equals the directional derivative") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> coef(-3, 3), pos(0, 4), kind(0, 2);
  int directions = 0;
  for (int it = 0; it < 120; ++it) {
    auto affine = [&] {
      return "(" + std::to_string(coef(rng)) + "*x1 + (" + std::to_string(coef(rng)) + ")*x2 + (" +
             std::to_string(coef(rng)) + "))";
    };
    std::string text = "0";
    const int terms = 1 + pos(rng) % 3;
    for (int k = 0; k < terms; ++k) {
      const std::string w = std::to_string(1 + pos(rng));
      switch (kind(rng)) {
        case 0:
          text += " + " + w + "*abs(" + affine() + ")";
          break;
        case 1:
          text += " + " + w + "*max(" + affine() + ", " + affine() + ")";
          break;
        default:
          text += " + " + w + "*" + affine() + "^2";
      }
    }
    const Expr e = parse_expr(text, 2);
    const Vec x = grid_point(rng, 2);
    const auto r = limiting_subdiff(e, x, std::nullopt, SubdiffMode::Limiting);
    const Program p = Program::compile(e.root());
    for (int k = 0; k < 5; ++k) {
      const Vec u = random_unit(rng, 2);
      const double t = 1e-8;
      const Vec z = add(x, scaled(u, t));
      const double dd = (p.run(z, 0.0) - p.run(x, 0.0)) / t;
      CHECK(std::abs(support(r.set, u) - dd) <= 1e-5 * std::max(1.0, std::abs(dd)));
      ++directions;
    }
  }
  CHECK(directions >= 500);
}

TEST_CASE("property: hull support matches sampled Clarke derivative; limiting within hull") {
  std::mt19937_64 rng(41);
  int exact_instances = 0, exact_with_kink = 0, total = 0;
  for (int it = 0; it < 8000 && (exact_instances < 220 || exact_with_kink < 60); ++it) {
    const std::string text = testing_support::ExprGenerator(rng, 2, false).gen(3);
    const Expr e = parse_expr(text, 2);
    const Vec x = grid_point(rng, 2);
    SubdiffResult lim, h;
    try {
      lim = limiting_subdiff(e, x, std::nullopt, SubdiffMode::Limiting);
      h = limiting_subdiff(e, x, std::nullopt, SubdiffMode::Hull);
    } catch (const UnsupportedStructure&) {
      continue;
    } catch (const DomainError&) {
      continue;
    }
    ++total;
    CHECK(is_subset(lim.set, h.set));
    CHECK(same_vertices(hull(lim.set), h.set.components[0], 1e-9));

    // Skip points where a kink is inactive but within reach of the sampling radius.
    if (active_kinks(e, x, std::nullopt, 1e-3).size() != active_kinks(e, x, std::nullopt, 1e-9).size()) {
      continue;
    }
    const Program p = Program::compile(e.root());
    const bool exact = h.exactness == Exactness::Exact;
    for (int k = 0; k < 4; ++k) {
      const Vec u = random_unit(rng, 2);
      const double s = support(h.set, u);
      const double c = clarke_sample(p, x, u, rng);
      const double tol = 1e-4 * std::max(1.0, std::abs(s));
      CHECK(s >= c - tol);
      if (exact) CHECK(std::abs(s - c) <= tol);
    }
    if (exact) {
      ++exact_instances;
      if (!active_kinks(e, x, std::nullopt, 1e-9).empty()) ++exact_with_kink;
    }
  }
  CHECK(exact_instances >= 200);
  CHECK(exact_with_kink >= 50);
  MESSAGE("instances: " << total << ", exact: " << exact_instances << ", exact with kink: "
                        << exact_with_kink);
}

TEST_CASE("property: direct scalarization lies in the combination") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> yd(-2.0, 2.0);
  int checked = 0;
  for (int it = 0; it < 400 && checked < 150; ++it) {
    std::vector<Expr> f;
    for (int j = 0; j < 3; ++j) f.push_back(parse_expr(testing_support::ExprGenerator(rng, 2, false).gen(2), 2));
    const Vec x = grid_point(rng, 2);
    const Vec y{yd(rng), yd(rng), yd(rng)};
    try {
      for (auto mode : {SubdiffMode::Limiting, SubdiffMode::Hull}) {
        const auto r = scalarized_subdiff(y, f, x, mode);
        CHECK(is_subset(r.direct.set, r.combination.set));
      }
    } catch (const UnsupportedStructure&) {
      continue;
    } catch (const DomainError&) {
      continue;
    }
    ++checked;
  }
  CHECK(checked >= 100);
}
