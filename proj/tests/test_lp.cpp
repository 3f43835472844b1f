#include <random>

#include "doctest.h"
#include "robustkkt/lp.hpp"

using namespace robustkkt;

TEST_CASE("lp: textbook maximum") {
  // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  -> (2, 6), 36
  LinearProgram lp(2);
  lp.objective = {3.0, 5.0};
  lp.add_row({1.0, 0.0}, RowSense::LessEq, 4.0);
  lp.add_row({0.0, 2.0}, RowSense::LessEq, 12.0);
  lp.add_row({3.0, 2.0}, RowSense::LessEq, 18.0);
  for (bool exact : {false, true}) {
    LpOptions o;
    o.exact = exact;
    auto r = solve_lp(lp, o);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(36.0));
    CHECK(r.x[0] == doctest::Approx(2.0));
    CHECK(r.x[1] == doctest::Approx(6.0));
  }
}

TEST_CASE("lp: infeasible, unbounded, equality and negative rhs") {
  LinearProgram inf(1);
  inf.add_row({1.0}, RowSense::GreaterEq, 2.0);
  inf.add_row({1.0}, RowSense::LessEq, 1.0);
  CHECK(solve_lp(inf).status == LpStatus::Infeasible);

  LinearProgram unb(2);
  unb.objective = {1.0, 0.0};
  unb.add_row({1.0, -1.0}, RowSense::LessEq, 1.0);
  CHECK(solve_lp(unb).status == LpStatus::Unbounded);

  LinearProgram eq(2);
  eq.objective = {-1.0, -1.0};
  eq.add_row({1.0, 1.0}, RowSense::Equal, 3.0);
  eq.add_row({-1.0, 0.0}, RowSense::LessEq, -1.0);  // x >= 1
  auto r = solve_lp(eq);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-3.0));
  CHECK(r.x[0] >= 1.0 - 1e-12);
}

TEST_CASE("lp: redundant equalities are tolerated") {
  LinearProgram lp(3);
  lp.objective = {1.0, 2.0, 3.0};
  lp.add_row({1.0, 1.0, 1.0}, RowSense::Equal, 1.0);
  lp.add_row({2.0, 2.0, 2.0}, RowSense::Equal, 2.0);
  auto r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(3.0));
}

TEST_CASE("property: floating and exact simplex agree") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> coef(-5, 5);
  std::uniform_int_distribution<int> pos(0, 6);
  int agree = 0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + t % 4, m = 1 + t % 5;
    LinearProgram lp(n);
    lp.objective.resize(n);
    for (auto& c : lp.objective) c = coef(rng);
    for (std::size_t i = 0; i < m; ++i) {
      Vec row(n);
      for (auto& a : row) a = coef(rng);
      const int s = t % 3;
      lp.add_row(row, s == 0 ? RowSense::LessEq : s == 1 ? RowSense::GreaterEq : RowSense::Equal,
                 coef(rng));
    }
    // Keep it bounded.
    lp.add_row(Vec(n, 1.0), RowSense::LessEq, pos(rng) + 1.0);
    LpOptions ex;
    ex.exact = true;
    const auto a = solve_lp(lp);
    const auto b = solve_lp(lp, ex);
    CHECK(a.status == b.status);
    if (a.status == b.status) ++agree;
    if (a.status == LpStatus::Optimal && b.status == LpStatus::Optimal) {
      CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
    }
  }
  CHECK(agree == 300);
}
