// Acceptance run: one PASS/FAIL line per criterion. Exit status is 0 once every
// line has been written; --strict makes any FAIL line exit 1.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "robustkkt/certify.hpp"
#include "robustkkt/problem_file.hpp"
#include "robustkkt/report.hpp"
#include "robustkkt/robustfeas.hpp"
#include "robustkkt/subdiff.hpp"
#include "robustkkt/verify.hpp"

using namespace robustkkt;

namespace {

std::string g_dir;
std::string g_unit_tests;

const Vec kOrigin{0.0, 0.0};

ProblemSpec bundled(const std::string& name) { return load_problem(g_dir + "/" + name + ".problem"); }

nlohmann::json bundled_json(const std::string& file) {
  return nlohmann::json::parse(read_file(g_dir + "/" + file));
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

std::string fmt(std::span<const double> v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + ")";
}

std::string fmt(const PolytopeSet& s) {
  std::string out;
  for (const auto& c : s.components) {
    out += out.empty() ? "{" : " | {";
    for (std::size_t i = 0; i < c.vertices.size(); ++i) out += (i ? ", " : "") + fmt(c.vertices[i]);
    out += "}";
  }
  return out;
}

/// Collects failed sub-checks of one criterion.
struct Criterion {
  std::vector<std::string> failures;
  std::vector<std::string> info;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void time_limit(double seconds, double limit) {
    info.push_back(fmt(std::round(seconds * 1000) / 1000) + " s");
    expect(seconds < limit, "runtime " + fmt(seconds) + " s exceeds " + fmt(limit) + " s");
  }
};

bool same_set(const PolytopeSet& got, const std::vector<Vec>& expected, double tol) {
  if (got.components.size() != 1) return false;
  return same_vertices(hull(got.components[0]), hull(Polytope{expected}), tol);
}

/// V_i as one scenario within tol, with no plateau.
bool single_scenario(const ScenarioMax& s, double v, double tol) {
  return s.plateaus.empty() && s.active.size() == 1 && std::abs(s.active[0] - v) <= tol;
}

std::string scenarios_text(const ScenarioMax& s) {
  if (!s.plateaus.empty()) {
    std::string out;
    for (const auto& [a, b] : s.plateaus) out += (out.empty() ? "[" : " u [") + fmt(a) + ", " + fmt(b) + "]";
    return out;
  }
  return "{" + fmt(s.active).substr(1, fmt(s.active).size() - 2) + "}";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void criterion_1(Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = bundled("example_2_2");
  const std::array<std::vector<Vec>, 3> expect_f = {{{{-5, -0.4}, {5, -0.4}}, {{-0.5, 0}, {0.5, 0}}, {{-4, 0.5}, {4, 0.5}}}};
  for (std::size_t j = 0; j < 3; ++j) {
    const auto r = limiting_subdiff(spec.objectives[j].f, kOrigin, std::nullopt, SubdiffMode::Hull);
    c.expect(same_set(r.set, expect_f[j], 1e-12), spec.objectives[j].name + " = " + fmt(r.set));
  }
  for (double v : {-1.0, -0.75, -0.5, -0.3, -0.25}) {
    const double s = v * v;
    const auto r1 = limiting_subdiff(spec.constraints[0].g, kOrigin, v, SubdiffMode::Hull);
    c.expect(same_set(r1.set, {{-s / 4, s / 2}, {s / 4, s / 2}}, 1e-12), "g1 at v=" + fmt(v) + " = " + fmt(r1.set));
    const auto r2 = limiting_subdiff(spec.constraints[1].g, kOrigin, v, SubdiffMode::Hull);
    c.expect(same_set(r2.set, {{0, std::abs(v)}}, 1e-12), "g2 at v=" + fmt(v) + " = " + fmt(r2.set));
  }
  c.time_limit(seconds_since(t0), 1.0);
}

void criterion_2(Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  auto spec = bundled("example_3_2");
  const double tol = spec.tol.active;
  const auto s1 = maximize_scenarios(spec.constraints[0].g, kOrigin, spec.constraints[0].u, tol);
  const auto s2 = maximize_scenarios(spec.constraints[1].g, kOrigin, spec.constraints[1].u, tol);
  c.expect(std::abs(s1.value - 0.0) <= 1e-8, "phi1 = " + fmt(s1.value) + ", expected 0");
  c.expect(std::abs(s2.value + 1.0) <= 1e-8, "phi2 = " + fmt(s2.value) + ", expected -1");
  c.expect(single_scenario(s1, 0.0, 1e-6), "V1 = " + scenarios_text(s1) + ", expected {0}");
  c.expect(single_scenario(s2, 1.0, 1e-6), "V2 = " + scenarios_text(s2) + ", expected {1}");

  c.expect(check_cq(spec, kOrigin).holds, "CQ fails");
  const auto found = search_kkt(spec, kOrigin);
  if (!found.certificate) {
    c.expect(false, "search_kkt found no certificate");
  } else {
    const auto& k = *found.certificate;
    double mass = 0;
    for (double y : k.ystar) mass += std::abs(y);
    for (double m : k.mu) mass += std::abs(m);
    c.expect(std::abs(mass - 1.0) <= 1e-12, "search_kkt normalization " + fmt(mass));
    c.expect(k.residual <= 1e-9, "search_kkt residual " + fmt(k.residual));
  }
  spec.use_fixtures = true;
  const auto cert = report::read_certificate(bundled_json("example_3_2.certificate.json"));
  const auto chk = check_kkt(spec, kOrigin, cert, 1e-9);
  c.expect(chk.valid, "explicit certificate INVALID with fixtures");
  c.time_limit(seconds_since(t0), 5.0);
}

void criterion_3(Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = bundled("example_3_5");
  const double tol = spec.tol.active;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto s = maximize_scenarios(spec.constraints[i].g, kOrigin, spec.constraints[i].u, tol);
    c.expect(single_scenario(s, -0.25, 1e-6), "V" + std::to_string(i + 1) + " = " + scenarios_text(s));
  }
  const auto g1 = sup_rule(spec.constraints[0].g, kOrigin, spec.constraints[0].u, tol, SubdiffMode::Hull);
  c.expect(same_set(g1.result.set, {{-1.0 / 64, 1.0 / 32}, {1.0 / 64, 1.0 / 32}}, 1e-12),
           "g1 sup-rule set = " + fmt(g1.result.set));
  const auto cert = report::read_certificate(bundled_json("example_3_5.certificate.json"));
  const auto chk = check_kkt(spec, kOrigin, cert, 1e-9);
  c.expect(chk.valid && chk.residual <= 1e-9, "corrected certificate residual " + fmt(chk.residual));
  c.expect(search_kkt(spec, kOrigin).certificate.has_value(), "search_kkt found no certificate");
  c.time_limit(seconds_since(t0), 5.0);
}

bool closed_form_32(double x1, double x2) { return x1 <= 0 && std::abs(x2) <= std::min(3 - x1, 2 - 3 * x1); }
bool closed_form_35(double x1, double x2) { return x2 <= std::min(-std::abs(x1) / 2, -x1 * x1 / 2); }

void raster_check(Criterion& c, const std::string& name, const Region& region, bool (*closed)(double, double)) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = bundled(name);
  const auto r = raster(spec, region, 401, 401, spec.tol.feasibility);
  std::size_t agree = 0, far = 0;
  for (std::size_t j = 0; j < r.ny; ++j) {
    for (std::size_t i = 0; i < r.nx; ++i) {
      const bool expect = closed(r.x_at(i), r.y_at(j));
      if (r.at(i, j) == expect) {
        ++agree;
        continue;
      }
      bool near = false;
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          const long ii = static_cast<long>(i) + di, jj = static_cast<long>(j) + dj;
          if (ii < 0 || jj < 0 || ii >= static_cast<long>(r.nx) || jj >= static_cast<long>(r.ny)) continue;
          near = near || closed(r.x_at(ii), r.y_at(jj)) != expect;
        }
      }
      if (!near) ++far;
    }
  }
  const double share = static_cast<double>(agree) / static_cast<double>(r.nx * r.ny);
  c.info.push_back(name + " agreement " + fmt(share));
  c.expect(share >= 0.999, name + " agreement " + fmt(share));
  c.expect(far == 0, name + " has " + std::to_string(far) + " disagreements away from the boundary");
  c.time_limit(seconds_since(t0), 30.0);
}

void criterion_4(Criterion& c) {
  raster_check(c, "example_3_2", {-5, 1, -5, 5}, closed_form_32);
  raster_check(c, "example_3_5", {-3, 3, -4, 1}, closed_form_35);
}

void criterion_5(Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  struct Run {
    const char* name;
    EfficiencyKind kind;
    Region region;
  };
  for (const Run& r : {Run{"example_3_2", EfficiencyKind::WeakQuasiEfficient, {-5, 1, -5, 5}},
                       Run{"example_3_5", EfficiencyKind::WeakQuasiEfficient, {-3, 3, -4, 1}},
                       Run{"example_3_5_ex23", EfficiencyKind::QuasiEfficient, {-3, 3, -4, 1}}}) {
    const auto spec = bundled(r.name);
    const auto v = classify_point(spec, kOrigin, r.kind, SampleBox::from(r.region), 401);
    c.expect(v.no_counterexample, std::string(r.name) + " " + to_string(r.kind) + " counterexample at " +
                                      (v.counterexample ? fmt(*v.counterexample) : std::string("?")));
  }
  c.time_limit(seconds_since(t0), 60.0);
}

void criterion_6(Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  PseudoConfig cfg;
  cfg.per_axis = 21;
  const auto p22 = bundled("example_2_2");
  const auto r1 = pseudoconvex_test(p22, kOrigin, PseudoType::I, cfg);
  c.expect(r1.all_verified(), "example_2_2 type I: " + std::to_string(r1.inconclusive) + " of " +
                                  std::to_string(r1.samples.size()) + " samples INCONCLUSIVE");

  const auto w = report::read_witness(bundled_json("example_2_2.type2_witness.json"));
  const auto chk = check_pseudo_witness(p22, kOrigin, PseudoType::II, w);
  c.expect(chk.verdict == PseudoVerdict::WitnessedFailure && std::abs(chk.lp_minimum) <= 1e-12,
           std::string("type II witness: ") + to_string(chk.verdict) + ", LP minimum " + fmt(chk.lp_minimum));

  const auto p23 = bundled("example_2_3");
  const auto r2 = pseudoconvex_test(p23, kOrigin, PseudoType::II, cfg);
  c.expect(r2.all_verified(), "example_2_3 type II: " + std::to_string(r2.inconclusive) + " of " +
                                  std::to_string(r2.samples.size()) + " samples INCONCLUSIVE");
  c.info.push_back(fmt(std::round(seconds_since(t0) * 1000) / 1000) + " s");
}

void criterion_7(Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  struct Run {
    const char* name;
    Region region;
  };
  for (const Run& r : {Run{"example_3_2", {-5, 1, -5, 5}}, Run{"example_3_5", {-3, 3, -4, 1}}}) {
    const auto spec = bundled(r.name);
    const auto strong = strong_duality_from(spec, kOrigin);
    c.expect(strong.feasibility.verdict == Feasibility::Feasible,
             std::string(r.name) + " strong triple " + to_string(strong.feasibility.verdict));
    const auto samples = feasible_samples(spec, SampleBox::from(r.region), 1000);
    const auto weak = weak_duality_check(spec, samples, {strong.triple}, PseudoType::I);
    c.expect(!weak.violated, std::string(r.name) + " weak duality violated at sample " +
                                 (weak.first ? std::to_string(weak.first->sample) : std::string("?")));
    c.expect(samples.size() == 1000, std::string(r.name) + " drew " + std::to_string(samples.size()) + " samples");
  }
  c.time_limit(seconds_since(t0), 60.0);
}

struct Suite {
  const char* label;
  const char* filter;
};

/// Runs the named doctest property cases in the unit test binary.
void criterion_8(Criterion& c) {
  if (g_unit_tests.empty()) {
    c.expect(false, "no --unit-tests binary given");
    return;
  }
  const std::array<Suite, 6> suites = {{
      {"support oracle", "property: convex subclass support*,property: hull support matches*"},
      {"zero_in_sum brute force", "property: zero_in_sum*"},
      {"minkowski/hull algebra", "property: minkowski*,property: hull agrees*"},
      {"finite-difference gradients", "property: smooth_gradient*,property: smooth expressions*"},
      {"implication chains", "property: efficiency implication*,property: type II verdicts imply*"},
      {"limiting within hull", "*limiting within hull*"},
  }};
  const std::regex summary(R"(test cases:\s*(\d+)\s*\|\s*(\d+) passed\s*\|\s*(\d+) failed)");
  for (const auto& s : suites) {
    const std::string cmd = "'" + g_unit_tests + "' --no-intro --no-version '--test-case=" + s.filter + "' 2>&1";
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(::popen(cmd.c_str(), "r"), ::pclose);
    if (!pipe) {
      c.expect(false, std::string(s.label) + ": cannot run unit tests");
      continue;
    }
    std::string out;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe.get())) out += buf.data();
    const int status = ::pclose(pipe.release());
    std::smatch m;
    const bool parsed = std::regex_search(out, m, summary);
    const int cases = parsed ? std::stoi(m[1]) : 0;
    const int failed = parsed ? std::stoi(m[3]) : -1;
    c.expect(status == 0 && parsed && cases > 0 && failed == 0,
             std::string(s.label) + ": " + (parsed ? std::to_string(failed) + " of " + std::to_string(cases) + " cases failed"
                                                   : std::string("no summary")));
    c.info.push_back(std::string(s.label) + " " + std::to_string(cases) + " cases");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance run for the robustkkt toolkit"};
  g_dir = ROBUSTKKT_PROBLEMS_DIR;
  bool strict = false;
  app.add_option("--problems", g_dir, "directory with the bundled problem files");
  app.add_option("--unit-tests", g_unit_tests, "unit test binary for the property suites");
  app.add_flag("--strict", strict, "exit 1 when any criterion fails");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<void(Criterion&)>>> criteria = {
      {"example_2_2 subdifferentials", criterion_1},
      {"example_3_2 pipeline", criterion_2},
      {"example_3_5 pipeline", criterion_3},
      {"feasibility rasters", criterion_4},
      {"efficiency classification", criterion_5},
      {"pseudo convexity", criterion_6},
      {"duality", criterion_7},
      {"property suites", criterion_8},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Criterion c;
    try {
      criteria[k].second(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    std::string line = (c.failures.empty() ? "PASS " : "FAIL ") + std::to_string(k + 1) + " " + criteria[k].first;
    std::string detail;
    for (const auto& s : c.failures) detail += (detail.empty() ? "" : "; ") + s;
    for (const auto& s : c.info) detail += (detail.empty() ? "" : "; ") + s;
    if (!detail.empty()) line += " [" + detail + "]";
    std::cout << line << std::endl;
    failed += !c.failures.empty();
  }
  return strict && failed ? 1 : 0;
}
