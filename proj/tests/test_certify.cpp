#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "robustkkt/certify.hpp"
#include "robustkkt/problem_file.hpp"
#include "random_problem.hpp"

using namespace robustkkt;
using robustkkt::testing::random_problem;

namespace {

ProblemSpec bundled(const std::string& name) {
  return load_problem(std::string(ROBUSTKKT_PROBLEMS_DIR) + "/" + name + ".problem");
}

const Vec kOrigin{0.0, 0.0};
const double kR2 = std::sqrt(2.0);

KKTCertificate cert_32() {
  KKTCertificate c;
  c.ystar = {kR2 / 4, 0, kR2 / 4};
  c.mu = {0.5, 0};
  c.u = {{-2, 1}, {0, -3}, {0, -1}};
  c.v = {{kR2, 0}, {0, 1}};
  c.vbar = {0.0, 1.0};
  c.b = {0, 0};
  c.a = {0, 0};
  return c;
}

KKTCertificate cert_35() {
  KKTCertificate c;
  c.ystar = {-5.0 / 8, 0, 0.5};
  c.mu = {0, 1};
  c.u = {{8.0 / 5, -2.0 / 5}, {0, 0}, {2, 0.5}};
  c.v = {{0, 1.0 / 32}, {0, 0.25}};
  c.vbar = {-0.25, -0.25};
  c.b = {0, -1};
  c.a = {0, 0};
  return c;
}

}  // namespace

TEST_CASE("constraint qualification") {
  SUBCASE("single active index") {
    const auto r = check_cq(bundled("example_3_2"), kOrigin);
    CHECK(r.holds);
    REQUIRE(r.per_index.size() == 1);
    CHECK(r.per_index[0].index == 0);
    CHECK_FALSE(r.per_index[0].zero_in_sum);
    const auto& verts = r.per_index[0].set.set.components.at(0).vertices;
    CHECK(verts == std::vector<Vec>{{1, 0}, {2, 0}});
  }
  SUBCASE("two active indices") {
    const auto r = check_cq(bundled("example_3_5"), kOrigin);
    REQUIRE(r.per_index.size() == 2);
    // Sets [-1/64, 1/64] x {1/32} and {(0, 1/4)}: neither contains the origin.
    for (const auto& v : r.per_index) CHECK_FALSE(v.zero_in_sum);
    CHECK(r.holds);
  }
  SUBCASE("zero constraint") {
    const auto s = parse_problem(
        "[space]\ndim = 2\n[cone]\nsigns = +\n[objectives]\nf = \"x1\"\n[constraints]\ng = \"0*v\", v in [0, 1]\n");
    const auto r = check_cq(s, kOrigin);
    CHECK_FALSE(r.holds);
    CHECK(r.per_index.at(0).zero_in_sum);
  }
  SUBCASE("infeasible point") { CHECK_THROWS_AS(check_cq(bundled("example_3_2"), Vec{1, 0}), InfeasiblePoint); }
}

TEST_CASE("checking KKT certificates") {
  SUBCASE("bundled certificate with fixtures") {
    auto s = bundled("example_3_2");
    s.use_fixtures = true;
    const auto r = check_kkt(s, kOrigin, cert_32(), 1e-9);
    CHECK(r.valid);
    CHECK(r.residual <= 1e-9);
    CHECK(r.objective_sets[2].provenance == Provenance::Fixture);
  }
  SUBCASE("bundled certificate against the engine") {
    // The engine set for f3 is [-1/2, 1/2] x {1}; u3 = (0, -1) lies outside it.
    const auto r = check_kkt(bundled("example_3_2"), kOrigin, cert_32(), 1e-9);
    CHECK_FALSE(r.valid);
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures[0].find("f3") != std::string::npos);
  }
  SUBCASE("corrected certificate") {
    const auto r = check_kkt(bundled("example_3_5"), kOrigin, cert_35(), 1e-9);
    CHECK(r.valid);
    CHECK(r.residual <= 1e-9);
    for (const auto& e : r.objective_sets) CHECK(e.provenance == Provenance::Engine);
  }
  SUBCASE("display variant of the constraint term fails") {
    auto c = cert_35();
    c.v[1] = {1.0 / 32, 0.25};
    const auto r = check_kkt(bundled("example_3_5"), kOrigin, c, 1e-9);
    CHECK_FALSE(r.valid);
    CHECK(r.residual == doctest::Approx(1.0 / 32));
  }
  SUBCASE("non-stationary smooth point") {
    const auto s = parse_problem("[space]\ndim = 1\n[cone]\nsigns = +\n[objectives]\nf = \"x1^2 + x1\"\n");
    KKTCertificate c;
    c.ystar = {1};
    c.u = {{3}};
    c.b = {0};
    c.a = {0};
    const auto r = check_kkt(s, Vec{1.0}, c, 1e-9);
    CHECK_FALSE(r.valid);
    CHECK(r.residual == doctest::Approx(3.0));
  }
  SUBCASE("complementarity and sign failures") {
    auto s = bundled("example_3_2");
    s.use_fixtures = true;
    auto c = cert_32();
    c.mu[1] = 0.1;  // phi_2(xbar) = -2
    CHECK_FALSE(check_kkt(s, kOrigin, c, 1e-9).valid);
    c = cert_32();
    c.ystar = {0, 0, 0};
    CHECK_FALSE(check_kkt(s, kOrigin, c, 1e-9).valid);
    c = cert_32();
    c.b = {0.8, 0.8};
    CHECK_FALSE(check_kkt(s, kOrigin, c, 1e-9).valid);
  }
  SUBCASE("dimension mismatch") {
    auto c = cert_32();
    c.mu.pop_back();
    CHECK_THROWS_AS(check_kkt(bundled("example_3_2"), kOrigin, c, 1e-9), DimensionError);
  }
}

TEST_CASE("searching KKT certificates") {
  for (const char* name : {"example_3_2", "example_3_5"}) {
    for (bool fixtures : {false, true}) {
      auto s = bundled(name);
      s.use_fixtures = fixtures;
      const auto r = search_kkt(s, kOrigin);
      REQUIRE(r.certificate);
      CHECK_FALSE(r.heuristic);
      CHECK(r.check->valid);
      CHECK(r.certificate->residual <= 1e-9);
      CHECK(std::abs(norm1(r.certificate->ystar) + norm1(r.certificate->mu) - 1.0) <= 1e-12);
    }
  }
  SUBCASE("identity objective") {
    const auto s = parse_problem("[space]\ndim = 1\n[cone]\nsigns = +\n[objectives]\nf = \"x1\"\n");
    const auto r = search_kkt(s, Vec{0.3});
    CHECK_FALSE(r.certificate);
    CHECK(r.lps_solved == 1);
  }
  SUBCASE("generator cone falls back to the grid") {
    const auto s = parse_problem(
        "[space]\ndim = 1\n[cone]\ngenerators = (1, 0); (1, 1)\n[objectives]\nf = \"x1^2\"\ng = \"x1^2 + x1\"\n");
    const auto r = search_kkt(s, Vec{0.0});
    CHECK(r.heuristic);
    REQUIRE(r.certificate);
    CHECK(r.check->valid);
  }
}

TEST_CASE("fuzzy condition demonstrator") {
  SUBCASE("example data") {
    const auto s = bundled("example_3_2");
    const Vec y{kR2 / 4, 0, kR2 / 4};
    const auto r = fuzzy_kkt_demo(s, kOrigin, y, 0.1);
    REQUIRE(r.found);
    const auto& w = *r.witness;
    CHECK(norm2(w.x_eta) <= 0.1);
    CHECK(w.lambda2 == 1.0);
    CHECK(w.normalization_residual <= 1e-8);
    CHECK(w.objective_residual <= 1e-6);
    for (double c : w.constraint_residuals) CHECK(c <= 1e-6);
    CHECK(w.inclusion_residual <= 1e-6);
  }
  SUBCASE("smooth convex problem at its minimizer") {
    const auto s = parse_problem(
        "[space]\ndim = 2\n[cone]\nsigns = +\n[objectives]\nf = \"(x1 - 1)^2 + x2^2\"\n");
    const auto r = fuzzy_kkt_demo(s, Vec{1, 0}, Vec{1}, 0.05);
    REQUIRE(r.found);
    CHECK(r.witness->x_eta == Vec{1, 0});
    CHECK(r.witness->lambda1 == 1.0);
    CHECK(r.witness->inclusion_residual <= 1e-12);
  }
  SUBCASE("eta below the lattice step") {
    const auto r = fuzzy_kkt_demo(bundled("example_3_2"), kOrigin, Vec{1, 0, 0}, 0.001);
    CHECK_FALSE(r.found);
    CHECK_FALSE(r.diagnostic.empty());
  }
}

TEST_CASE("pseudo convexity") {
  const auto s22 = bundled("example_2_2");
  const auto s23 = bundled("example_2_3");
  const PseudoWitness bundled_witness{{0, 1}, {0, 1, 0}, {{0, -0.4}, {0, 0}, {0, 0.5}}};

  SUBCASE("bundled type II witness") {
    for (const auto* s : {&s22, &s23}) {
      const auto w = check_pseudo_witness(*s, kOrigin, PseudoType::II, bundled_witness);
      CHECK(w.verdict == PseudoVerdict::WitnessedFailure);
      CHECK(w.lp_minimum == 0.0);
    }
    // The premise is an equality, so the strict type I premise is false.
    CHECK(check_pseudo_witness(s22, kOrigin, PseudoType::I, bundled_witness).verdict == PseudoVerdict::Inconclusive);
  }
  SUBCASE("type I counterexample with y1 < 0") {
    const PseudoWitness w{{-1, -1}, {-0.25, 1, 0.125}, {{0, -0.4}, {0, 0}, {0, 0.5}}};
    const auto r = check_pseudo_witness(s22, kOrigin, PseudoType::I, w);
    CHECK(r.premise);
    CHECK(r.memberships);
    // On the true ball the minimum is ||x|| (<y*, theta> - |u*_2|) = sqrt(2) (3/16 - 13/80);
    // the outer 64-gon lowers it by at most sqrt(2) (13/80) (sec(pi/64) - 1).
    const double exact = kR2 * (3.0 / 16 - 13.0 / 80);
    const double slack = kR2 * (13.0 / 80) * (1.0 / std::cos(M_PI / 64) - 1.0);
    CHECK(r.lp_minimum <= exact + 1e-12);
    CHECK(r.lp_minimum >= exact - slack - 1e-12);
    CHECK(r.verdict == PseudoVerdict::WitnessedFailure);
  }
  SUBCASE("subgradient outside its set") {
    const PseudoWitness w{{0, 1}, {0, 1, 0}, {{0, -0.4}, {1, 0}, {0, 0.5}}};
    const auto r = check_pseudo_witness(s22, kOrigin, PseudoType::II, w);
    CHECK_FALSE(r.memberships);
    CHECK(r.verdict == PseudoVerdict::Inconclusive);
  }
  SUBCASE("sampled grids") {
    const auto r1 = pseudoconvex_test(s22, kOrigin, PseudoType::I);
    CHECK(r1.samples.size() == 441);
    CHECK(r1.ystar_count > 500);
    CHECK(r1.candidate + r1.common + r1.inconclusive == 441);
    for (const auto& smp : r1.samples) {
      if (smp.verdict != PseudoVerdict::Inconclusive) continue;
      REQUIRE(smp.failing_ystar);
      CHECK((*smp.failing_ystar)[0] < 0.0);
    }
    // On the axis x1 = 0 with y* = (0, 1, 0) the type II premise holds with
    // equality and d f2(xbar) contains 0.
    const auto r2 = pseudoconvex_test(s23, kOrigin, PseudoType::II);
    for (const auto& smp : r2.samples) {
      if (smp.x[0] == 0.0 && smp.x[1] != 0.0) CHECK(smp.verdict == PseudoVerdict::Inconclusive);
    }
    CHECK_FALSE(r2.all_verified());
  }
  SUBCASE("single smooth objective") {
    // f = x1^2 + x2^2 at its minimizer: the strict premise never holds.
    const auto s = parse_problem("[space]\ndim = 2\n[cone]\nsigns = +\n[objectives]\nf = \"x1^2 + x2^2\"\n");
    const auto r = pseudoconvex_test(s, kOrigin, PseudoType::II);
    CHECK(r.all_verified());
    CHECK(r.candidate == r.samples.size());
  }
}

TEST_CASE("sphere grids on dual cones") {
  const auto g = dual_sphere_grid(ConeSpec::orthant({-1, 1, 1}), 24);
  CHECK(g.size() == 23 * 24 + 1);
  for (const auto& y : g) {
    CHECK(std::abs(norm2(y) - 1.0) <= 1e-12);
    CHECK(y[0] <= 0.0);
  }
  CHECK(dual_sphere_grid(ConeSpec::orthant({1}), 24) == std::vector<Vec>{{1}});
  PolyCone c{2, {{1, 0}, {1, 1}}, {false, false}};
  for (const auto& y : dual_sphere_grid(ConeSpec::generated(c), 24)) {
    CHECK(y[0] >= -1e-12);
    CHECK(y[0] + y[1] >= -1e-12);
  }
}

TEST_CASE("property: search_kkt certificates re-verify") {
  std::mt19937_64 rng(83);
  int found = 0, total = 0;
  for (int it = 0; it < 260; ++it) {
    const auto s = random_problem(rng, it % 3 == 0);
    if (!is_feasible(s, kOrigin, s.tol.feasibility)) continue;
    ++total;
    const auto r = search_kkt(s, kOrigin);
    if (!r.certificate) continue;
    ++found;
    CHECK(r.check->valid);
    CHECK(check_kkt(s, kOrigin, *r.certificate, 1e-9).valid);
    CHECK(std::abs(norm1(r.certificate->ystar) + norm1(r.certificate->mu) - 1.0) <= 1e-12);
    CHECK(norm1(r.certificate->ystar) >= 1e-6 - 1e-12);
  }
  CHECK(total >= 200);
  CHECK(found >= 50);
}

TEST_CASE("property: type II verdicts imply type I verdicts") {
  std::mt19937_64 rng(89);
  PseudoConfig cfg;
  cfg.per_axis = 7;
  cfg.ystar_per_dim = 8;
  int instances = 0;
  for (int it = 0; it < 60; ++it) {
    const auto s = random_problem(rng, false);
    const auto r1 = pseudoconvex_test(s, kOrigin, PseudoType::I, cfg);
    const auto r2 = pseudoconvex_test(s, kOrigin, PseudoType::II, cfg);
    REQUIRE(r1.samples.size() == r2.samples.size());
    for (std::size_t k = 0; k < r1.samples.size(); ++k) {
      ++instances;
      if (r2.samples[k].verdict != PseudoVerdict::Inconclusive) {
        CHECK(r1.samples[k].verdict != PseudoVerdict::Inconclusive);
      }
    }
  }
  CHECK(instances >= 200);
}

TEST_CASE("property: fuzzy witnesses respect eta and the normalization") {
  std::mt19937_64 rng(97);
  std::uniform_real_distribution<double> eta(0.01, 0.2);
  int found = 0;
  for (int it = 0; it < 200; ++it) {
    const auto s = random_problem(rng, it % 4 == 0);
    if (!is_feasible(s, kOrigin, s.tol.feasibility)) continue;
    const auto grid = dual_sphere_grid(s.cone, 6);
    const Vec& y = grid[static_cast<std::size_t>(it) % grid.size()];
    FuzzyConfig cfg;
    cfg.grid_step = 0.01;
    const double e = eta(rng);
    const auto r = fuzzy_kkt_demo(s, kOrigin, y, e, cfg);
    if (!r.found) continue;
    ++found;
    CHECK(norm_value(s.norm, r.witness->x_eta) <= e + 1e-12);
    CHECK(r.witness->normalization_residual <= 1e-8);
    CHECK(r.witness->lambda2 != 0.0);
  }
  CHECK(found >= 50);
}
