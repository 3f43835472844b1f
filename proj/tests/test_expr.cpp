#include <cmath>
#include <random>

#include "doctest.h"
#include "random_expr.hpp"
#include "robustkkt/expr.hpp"

using namespace robustkkt;

namespace {

int count_kind(const Node& n, NodeKind k) {
  int c = n.kind == k ? 1 : 0;
  for (const auto& ch : n.children) c += count_kind(*ch, k);
  return c;
}

const char* kF1 = "5*abs(x1) - (2/5)*x2 + 4/5";
const char* kG1 = "max(x1, 2*x1) + v^2*abs(x2) - 3*abs(v)";

}  // namespace

TEST_CASE("parse: objective with one abs node") {
  Expr e = parse_expr(kF1, 2);
  CHECK(count_kind(e.root(), NodeKind::Abs) == 1);
  CHECK_FALSE(e.has_uncertainty());
}

TEST_CASE("parse: constant expression") {
  Expr e = parse_expr("0", 3);
  CHECK(e.root().kind == NodeKind::Constant);
  CHECK(e.root().value == 0.0);
}

TEST_CASE("parse: constraint with max, abs and v") {
  Expr e = parse_expr(kG1, 2);
  CHECK(count_kind(e.root(), NodeKind::Max) == 1);
  CHECK(count_kind(e.root(), NodeKind::Abs) == 2);
  CHECK(count_kind(e.root(), NodeKind::Uncertainty) == 2);
  CHECK(e.has_uncertainty());
}

TEST_CASE("parse: literal quotient folds") {
  Expr e = parse_expr("2/5", 1);
  REQUIRE(e.root().kind == NodeKind::Constant);
  CHECK(e.root().value == 0.4);
  CHECK(parse_constant("sqrt(2)/4") == doctest::Approx(std::sqrt(2.0) / 4).epsilon(1e-15));
  CHECK(parse_constant("-5/8") == -0.625);
}

TEST_CASE("parse: errors carry positions") {
  try {
    parse_expr("x1 + * x2", 2);
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 5);
  }
  CHECK_THROWS_AS(parse_expr("x3 + 1", 2), ParseError);
  CHECK_THROWS_AS(parse_expr("x0", 2), ParseError);
  CHECK_THROWS_AS(parse_expr("y1", 2), ParseError);
  CHECK_THROWS_AS(parse_expr("x1^0", 2), ParseError);
  CHECK_THROWS_AS(parse_expr("x1^-1", 2), ParseError);
  CHECK_THROWS_AS(parse_expr("abs(x1", 2), ParseError);
  CHECK_THROWS_AS(parse_expr("1/0", 2), ParseError);
  CHECK_THROWS_AS(parse_expr("", 2), ParseError);
}

TEST_CASE("eval: worked values") {
  Expr g2 = parse_expr("-3*abs(x1) + v*x2 - 2", 2);
  const Vec origin{0.0, 0.0};
  // -3*0 + 1*0 - 2; the value does not depend on v at the origin.
  CHECK(eval(g2, origin, 1.0) == -2.0);
  CHECK(eval(g2, origin, -1.0) == -2.0);

  Expr f1 = parse_expr(kF1, 2);
  CHECK(eval(f1, origin) == doctest::Approx(0.8).epsilon(1e-15));
  const Vec p{1.0, 5.0};
  CHECK(eval(f1, p) == doctest::Approx(3.8).epsilon(1e-15));
}

TEST_CASE("eval: argument and domain errors") {
  Expr f1 = parse_expr(kF1, 2);
  Expr g1 = parse_expr(kG1, 2);
  const Vec x{0.0, 0.0};
  CHECK_THROWS_AS(eval(f1, x, 1.0), UncertaintyArgumentError);
  CHECK_THROWS_AS(eval(g1, x), UncertaintyArgumentError);
  CHECK_THROWS_AS(eval(parse_expr("1/x1", 2), x), DomainError);
  const Vec neg{-1.0, 0.0};
  CHECK_THROWS_AS(eval(parse_expr("sqrt(x1)", 2), neg), DomainError);
  const Vec short_point{0.0};
  CHECK_THROWS_AS(eval(f1, short_point), DimensionError);
}

TEST_CASE("smooth_gradient: examples") {
  Expr f1 = parse_expr("-2*x1 + abs(x2)", 2);
  const Vec p{1.0, 2.0};
  Vec g = smooth_gradient(f1, p);
  CHECK(g == Vec{-2.0, 1.0});

  Expr c = parse_expr("7/3", 3);
  const Vec q{0.3, -1.0, 2.0};
  CHECK(smooth_gradient(c, q) == Vec{0.0, 0.0, 0.0});

  Expr example_f1 = parse_expr(kF1, 2);
  const Vec origin{0.0, 0.0};
  try {
    smooth_gradient(example_f1, origin);
    FAIL("expected nonsmooth error");
  } catch (const NonsmoothError& e) {
    CHECK(std::string(e.what()) == "abs(x1) active");
  }
}

TEST_CASE("smooth_gradient: kinks in v alone do not block x-gradients") {
  Expr g = parse_expr("x1*abs(v) + x2", 2);
  const Vec x{1.0, 1.0};
  CHECK(smooth_gradient(g, x, 0.0) == Vec{0.0, 1.0});
  CHECK_THROWS_AS(partial_v(g, x, 0.0), NonsmoothError);
  CHECK(partial_v(g, x, 0.5) == 1.0);
}

TEST_CASE("active_kinks: examples") {
  const Vec origin{0.0, 0.0};
  auto k1 = active_kinks(parse_expr(kF1, 2), origin, std::nullopt, 1e-9);
  REQUIRE(k1.size() == 1);
  CHECK(k1[0].text == "abs(x1)");

  auto k2 = active_kinks(parse_expr(kG1, 2), origin, 0.0, 1e-9);
  REQUIRE(k2.size() == 3);
  CHECK(k2[0].text == "max(x1, 2*x1)");
  CHECK(k2[0].active_branches == 2);
  CHECK(k2[1].text == "abs(x2)");
  CHECK(k2[2].text == "abs(v)");
  CHECK(k2[2].depends_on_v);
  CHECK_FALSE(k2[2].depends_on_x);

  const Vec p{0.3, -0.7};
  CHECK(active_kinks(parse_expr("x1^2 + 3*x1*x2 - 1", 2), p, std::nullopt, 1e-9).empty());
}

TEST_CASE("print: canonical forms") {
  CHECK(print(parse_expr(kF1, 2)) == "5*abs(x1) + (-0.4)*x2 + 0.8");
  CHECK(print(parse_expr("1/(abs(x1)+1) - 3*x2 + 2", 2)) == "1/(abs(x1) + 1) + (-3)*x2 + 2");
  CHECK(print(parse_expr("-x1^2", 1)) == "(-1)*x1^2");
  CHECK(print(parse_expr("(x1+1)*(x1-1)", 1)) == "(x1 + 1)*(x1 + (-1))");
  CHECK(print(parse_expr("x1/x2/x1", 2)) == "x1/x2/x1");
}

TEST_CASE("property: parse . print . parse is idempotent") {
  std::mt19937_64 rng(20261016);
  testing_support::ExprGenerator gen(rng, 3, true);
  for (int i = 0; i < 1000; ++i) {
    const std::string text = gen.gen(4);
    Expr a = parse_expr(text, 3);
    const std::string once = print(a);
    Expr b = parse_expr(once, 3);
    INFO(text);
    CHECK(structurally_equal(a.root(), b.root()));
    CHECK(print(b) == once);
  }
}

TEST_CASE("property: evaluation is deterministic and compiled programs agree bitwise") {
  std::mt19937_64 rng(7);
  testing_support::ExprGenerator gen(rng, 2, true);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 300; ++i) {
    Expr e = parse_expr(gen.gen(4), 2);
    const Vec x{u(rng), u(rng)};
    const double v = u(rng);
    const std::optional<double> vv = e.has_uncertainty() ? std::optional<double>(v) : std::nullopt;
    const double a = eval(e, x, vv);
    CHECK(eval(e, x, vv) == a);
    const Program p = Program::compile(e.root());
    CHECK(p.run(x, v) == a);
    const Program s = Program::specialize(e.root(), x);
    CHECK(s.run(Vec{99.0, 99.0}, v) == a);
  }
}

TEST_CASE("property: smooth_gradient matches central differences") {
  std::mt19937_64 rng(12345);
  testing_support::ExprGenerator gen(rng, 3, true);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  int checked = 0;
  for (int attempt = 0; attempt < 20000 && checked < 1200; ++attempt) {
    Expr e = parse_expr(gen.gen(3), 3);
    const Vec x{u(rng), u(rng), u(rng)};
    const std::optional<double> v =
        e.has_uncertainty() ? std::optional<double>(u(rng)) : std::nullopt;
    // Stay clear of kinks so the difference quotient sees one smooth piece.
    if (!active_kinks(e, x, v, 1e-3).empty()) continue;
    Vec g;
    try {
      g = smooth_gradient(e, x, v);
    } catch (const DomainError&) {
      continue;
    }
    const double h = 1e-6;
    for (std::size_t k = 0; k < 3; ++k) {
      Vec xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const double fd = (eval(e, xp, v) - eval(e, xm, v)) / (2 * h);
      const double scale = std::max(1.0, std::abs(g[k]));
      CHECK(std::abs(fd - g[k]) <= 1e-5 * scale);
    }
    ++checked;
  }
  CHECK(checked >= 1000);
}
