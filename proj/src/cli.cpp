#include "robustkkt/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "robustkkt/certify.hpp"
#include "robustkkt/problem_file.hpp"
#include "robustkkt/report.hpp"
#include "robustkkt/verify.hpp"

namespace robustkkt {

namespace {

using report::Json;

struct Options {
  std::string problem;
  bool fixtures = false;
  bool exact_lp = false;
  bool timings = false;
  std::string mode;

  std::string at, ystar, region, function, certificate, witness, triples, out_csv;
  std::optional<double> v;
  std::string type = "I", kind;
  std::size_t res = 401, per_axis = 21, ystar_per_dim = 24, samples = 1000, ball_vertices = 64;
  std::uint64_t seed = 1;
  double eta = 0.1, grid_step = 0.005, eps_min = 1e-6;
  std::optional<double> tol;
};

/// A finished command: verdict, exit code, result body and the sets it used.
struct Outcome {
  std::string verdict;
  int code = kAffirmative;
  Json result = Json::object();
  std::vector<SetEvidence> sets;
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Vec parse_list(const std::string& text, const char* what) {
  if (text.empty()) throw UsageError(std::string("missing ") + what);
  Vec out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_constant(item));
  return out;
}

Vec point(const ProblemSpec& spec, const std::string& text, const char* what) {
  Vec x = parse_list(text, what);
  if (x.size() != spec.dim) {
    throw UsageError(std::string(what) + " needs " + std::to_string(spec.dim) + " coordinates");
  }
  return x;
}

/// "lo1,hi1,lo2,hi2,..." as a box.
SampleBox box_from(const std::string& text, std::size_t d) {
  const Vec r = parse_list(text, "--region");
  if (r.size() != 2 * d) throw UsageError("--region needs lo,hi per coordinate (" + std::to_string(2 * d) + " numbers)");
  SampleBox b;
  for (std::size_t k = 0; k < d; ++k) {
    if (!(r[2 * k] < r[2 * k + 1])) throw UsageError("--region bounds must satisfy lo < hi");
    b.lo.push_back(r[2 * k]);
    b.hi.push_back(r[2 * k + 1]);
  }
  return b;
}

Json read_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

PseudoType pseudo_type(const Options& o) {
  try {
    return parse_pseudo_type(o.type);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

LpOptions lp_options(const Options& o) {
  LpOptions lp;
  lp.exact = o.exact_lp;
  return lp;
}

// ---- commands --------------------------------------------------------------

Outcome cmd_feasible(const Options& o, const ProblemSpec& spec) {
  const Vec x = point(spec, o.at, "--at");
  Outcome r;
  const bool ok = is_feasible(spec, x, spec.tol.feasibility);
  const ActiveSets act = active_sets(spec, x, spec.tol.active);
  r.result["point"] = report::vec(x);
  r.result["in_omega"] = spec.omega.contains(x);
  r.result["phi"] = report::vec(act.phi_i);
  r.result["phi_max"] = report::num(act.phi);
  Json sc = Json::array();
  for (std::size_t i = 0; i < spec.num_constraints(); ++i) {
    Json e = report::scenarios(act.scenarios[i]);
    e["constraint"] = spec.constraints[i].name;
    sc.push_back(e);
  }
  r.result["scenarios"] = sc;
  Json ai = Json::array();
  for (std::size_t i : act.active_indices) ai.push_back(spec.constraints[i].name);
  r.result["active_constraints"] = ai;
  r.verdict = ok ? "FEASIBLE" : "INFEASIBLE";
  r.code = ok ? kAffirmative : kNegative;
  return r;
}

Outcome cmd_raster(const Options& o, const ProblemSpec& spec) {
  if (spec.dim != 2) throw UsageError("raster needs a two-dimensional problem");
  const SampleBox b = box_from(o.region, 2);
  if (o.res < 2) throw UsageError("--res must be at least 2");
  const Raster ras = raster(spec, Region{b.lo[0], b.hi[0], b.lo[1], b.hi[1]}, o.res, o.res, spec.tol.feasibility);
  Outcome r;
  r.result["region"] = {{"lo", report::vec(b.lo)}, {"hi", report::vec(b.hi)}};
  r.result["resolution"] = o.res;
  r.result["cells"] = ras.nx * ras.ny;
  r.result["feasible_cells"] = ras.count();
  if (!o.out_csv.empty()) {
    std::ofstream f(o.out_csv, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot write " + o.out_csv);
    write_csv(ras, f);
    r.result["csv"] = o.out_csv;
  }
  r.verdict = "COMPUTED";
  return r;
}

Outcome cmd_subdiff(const Options& o, const ProblemSpec& spec) {
  const Vec x = point(spec, o.at, "--at");
  Outcome r;
  bool matched = false;
  for (std::size_t j = 0; j < spec.num_objectives(); ++j) {
    if (!o.function.empty() && o.function != spec.objectives[j].name) continue;
    matched = true;
    r.sets.push_back(objective_set(spec, j, x));
  }
  for (std::size_t i = 0; i < spec.num_constraints(); ++i) {
    const Constraint& c = spec.constraints[i];
    if (!o.function.empty() && o.function != c.name) continue;
    matched = true;
    if (o.v) {
      const SubdiffResult s = limiting_subdiff(c.g, x, *o.v, spec.mode);
      SetEvidence e;
      e.function = c.name + "(., " + format_number(*o.v) + ")";
      e.set = s.set;
      e.exactness = s.exactness;
      e.rules = s.rules;
      r.sets.push_back(std::move(e));
    } else {
      r.sets.push_back(constraint_set(spec, i, x));
    }
  }
  if (!matched) throw UsageError("no function named '" + o.function + "'");
  if (!o.ystar.empty()) {
    const Vec y = parse_list(o.ystar, "--ystar");
    if (y.size() != spec.num_objectives()) throw UsageError("--ystar needs one entry per objective");
    std::vector<Expr> fs;
    std::vector<std::optional<PolytopeSet>> fx;
    for (std::size_t j = 0; j < spec.num_objectives(); ++j) {
      fs.push_back(spec.objectives[j].f);
      const Fixture* f = spec.fixture_for(spec.objectives[j].name, x);
      fx.push_back(f ? std::optional<PolytopeSet>(f->set) : std::nullopt);
    }
    const ScalarizedSubdiff s = scalarized_subdiff(y, fs, x, spec.mode, fx);
    r.result["scalarized"] = {{"ystar", report::vec(y)},
                              {"direct", report::set(s.direct.set)},
                              {"direct_exactness", to_string(s.direct.exactness)},
                              {"combination", report::set(s.combination.set)}};
  }
  r.result["point"] = report::vec(x);
  r.verdict = "COMPUTED";
  return r;
}

Outcome cmd_cq(const Options& o, const ProblemSpec& spec) {
  const Vec x = point(spec, o.at, "--at");
  const CqResult c = check_cq(spec, x);
  Outcome r;
  r.result = report::cq(c);
  for (const auto& v : c.per_index) r.sets.push_back(v.set);
  r.verdict = c.holds ? "HOLDS" : "FAILS";
  r.code = c.holds ? kAffirmative : kNegative;
  return r;
}

Outcome cmd_kkt_check(const Options& o, const ProblemSpec& spec) {
  const Vec x = point(spec, o.at, "--at");
  if (o.certificate.empty()) throw UsageError("kkt check needs --certificate");
  const KKTCertificate cert = report::read_certificate(read_json(o.certificate));
  const double tol = o.tol.value_or(spec.tol.kkt);
  const KktCheck c = check_kkt(spec, x, cert, tol);
  Outcome r;
  r.result["certificate"] = report::certificate(cert);
  r.result["check"] = report::kkt_check(c, tol);
  r.sets = c.objective_sets;
  r.sets.insert(r.sets.end(), c.constraint_sets.begin(), c.constraint_sets.end());
  r.verdict = c.valid ? "VALID" : "INVALID";
  r.code = c.valid ? kAffirmative : kNegative;
  return r;
}

Outcome cmd_kkt_search(const Options& o, const ProblemSpec& spec) {
  const Vec x = point(spec, o.at, "--at");
  SearchConfig cfg;
  cfg.eps_min = o.eps_min;
  cfg.ball_vertices = o.ball_vertices;
  cfg.lp = lp_options(o);
  const KktSearch s = search_kkt(spec, x, cfg);
  Outcome r;
  r.result["lps_solved"] = s.lps_solved;
  r.result["heuristic"] = s.heuristic;
  r.result["normalization"] = "sum |y*_j| + sum mu_i = 1";
  if (s.certificate) {
    r.result["certificate"] = report::certificate(*s.certificate);
    r.result["check"] = report::kkt_check(*s.check, spec.tol.kkt);
  }
  r.sets = s.objective_sets;
  r.sets.insert(r.sets.end(), s.constraint_sets.begin(), s.constraint_sets.end());
  if (s.certificate && s.check->valid) {
    r.verdict = "FOUND";
  } else {
    r.verdict = "NONE-FOUND";
    r.code = s.heuristic ? kInconclusive : kNegative;
  }
  return r;
}

Outcome cmd_fuzzy(const Options& o, const ProblemSpec& spec) {
  const Vec x = point(spec, o.at, "--at");
  const Vec y = parse_list(o.ystar, "--ystar");
  if (y.size() != spec.num_objectives()) throw UsageError("--ystar needs one entry per objective");
  FuzzyConfig cfg;
  cfg.grid_step = o.grid_step;
  cfg.ball_vertices = o.ball_vertices;
  cfg.lp = lp_options(o);
  const FuzzyResult f = fuzzy_kkt_demo(spec, x, y, o.eta, cfg);
  Outcome r;
  r.result = report::fuzzy(f);
  r.result["eta"] = report::num(o.eta);
  r.result["grid_step"] = report::num(o.grid_step);
  r.result["residual_tol"] = report::num(1e-8);
  if (f.witness) {
    for (std::size_t j = 0; j < spec.num_objectives(); ++j) r.sets.push_back(objective_set(spec, j, f.witness->x_eta));
  }
  r.verdict = f.found ? "FOUND" : "NONE-FOUND";
  r.code = f.found ? kAffirmative : kInconclusive;
  return r;
}

Outcome cmd_pseudoconvex(const Options& o, const ProblemSpec& spec) {
  const Vec x = point(spec, o.at, "--at");
  const PseudoType type = pseudo_type(o);
  Outcome r;
  for (std::size_t j = 0; j < spec.num_objectives(); ++j) r.sets.push_back(objective_set(spec, j, x));
  if (!o.witness.empty()) {
    const PseudoWitness w = report::read_witness(read_json(o.witness));
    const WitnessCheck c = check_pseudo_witness(spec, x, type, w, o.ball_vertices);
    r.result["type"] = to_string(type);
    r.result["witness"] = {{"x", report::vec(w.x)}, {"ystar", report::vec(w.ystar)}, {"u", report::vecs(w.u)}};
    r.result["check"] = report::witness_check(c);
    r.verdict = to_string(c.verdict);
    r.code = c.verdict == PseudoVerdict::WitnessedFailure ? kNegative : kInconclusive;
    return r;
  }
  PseudoConfig cfg;
  cfg.per_axis = o.per_axis;
  cfg.ystar_per_dim = o.ystar_per_dim;
  cfg.ball_vertices = o.ball_vertices;
  cfg.lp = lp_options(o);
  if (!o.region.empty()) {
    const SampleBox b = box_from(o.region, spec.dim);
    cfg.lo = b.lo;
    cfg.hi = b.hi;
  }
  const PseudoResult p = pseudoconvex_test(spec, x, type, cfg);
  r.result = report::pseudo(p);
  r.result["premise_tol"] = report::num(cfg.premise_tol);
  r.result["eps_strict"] = report::num(cfg.eps_strict);
  r.verdict = p.all_verified() ? "VERIFIED" : "INCONCLUSIVE";
  r.code = p.all_verified() ? kAffirmative : kInconclusive;
  return r;
}

EfficiencyKind efficiency_kind(const std::string& s) {
  try {
    return parse_efficiency_kind(s);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

Outcome from_efficiency(const EfficiencyVerdict& v) {
  Outcome r;
  r.result = report::efficiency(v);
  r.verdict = v.no_counterexample ? "NO-COUNTEREXAMPLE" : "COUNTEREXAMPLE";
  r.code = v.no_counterexample ? kAffirmative : kNegative;
  return r;
}

Outcome cmd_efficiency(const Options& o, const ProblemSpec& spec) {
  const Vec x = point(spec, o.at, "--at");
  if (o.kind.empty()) throw UsageError("efficiency needs --kind");
  return from_efficiency(classify_point(spec, x, efficiency_kind(o.kind), box_from(o.region, spec.dim), o.res, o.seed));
}

std::vector<DualTriple> triples_for(const Options& o, const ProblemSpec& spec, Json& source) {
  if (!o.triples.empty()) {
    source = o.triples;
    return report::read_triples(spec, read_json(o.triples));
  }
  const Vec x = point(spec, o.at, "--at");
  source = "strong duality at --at";
  return {strong_duality_from(spec, x).triple};
}

Outcome cmd_duality_strong(const Options& o, const ProblemSpec& spec) {
  const Vec x = point(spec, o.at, "--at");
  Outcome r;
  try {
    const StrongDuality s = strong_duality_from(spec, x);
    r.result["triple"] = report::triple(s.triple);
    r.result["certificate"] = report::certificate(s.certificate);
    r.result["feasibility"] = report::dual_feasibility(s.feasibility);
    r.sets = s.feasibility.objective_sets;
    r.sets.insert(r.sets.end(), s.feasibility.constraint_sets.begin(), s.feasibility.constraint_sets.end());
    r.verdict = to_string(s.feasibility.verdict);
    r.code = s.feasibility.verdict == Feasibility::Feasible     ? kAffirmative
             : s.feasibility.verdict == Feasibility::Infeasible ? kNegative
                                                                : kInconclusive;
  } catch (const NoCertificate& e) {
    r.result["diagnostic"] = e.what();
    r.verdict = "NONE-FOUND";
    r.code = kNegative;
  }
  return r;
}

Outcome cmd_duality_weak(const Options& o, const ProblemSpec& spec) {
  Json source;
  const std::vector<DualTriple> ts = triples_for(o, spec, source);
  const std::vector<Vec> xs = feasible_samples(spec, box_from(o.region, spec.dim), o.samples, o.seed);
  const WeakDualityResult w = weak_duality_check(spec, xs, ts, pseudo_type(o), o.tol.value_or(spec.tol.kkt));
  Outcome r;
  r.result["triples_from"] = source;
  Json tj = Json::array();
  for (const auto& t : ts) tj.push_back(report::triple(t));
  r.result["triples"] = tj;
  r.result["samples_requested"] = o.samples;
  r.result["samples"] = xs.size();
  r.result["check"] = report::weak_duality(w, xs);
  r.verdict = w.violated ? "VIOLATION" : "NO-VIOLATION";
  r.code = w.violated ? kNegative : kAffirmative;
  return r;
}

Outcome cmd_duality_converse(const Options& o, const ProblemSpec& spec) {
  Json source;
  const std::vector<DualTriple> ts = triples_for(o, spec, source);
  if (ts.size() != 1) throw UsageError("converse duality takes exactly one triple");
  const ConverseDuality c = converse_duality_check(spec, ts.front(), pseudo_type(o), box_from(o.region, spec.dim),
                                                   o.res, o.tol.value_or(spec.tol.kkt));
  Outcome r = from_efficiency(c.verdict);
  r.result["triples_from"] = source;
  r.result["triple"] = report::triple(ts.front());
  r.result["feasibility"] = report::dual_feasibility(c.feasibility);
  r.sets = c.feasibility.objective_sets;
  r.sets.insert(r.sets.end(), c.feasibility.constraint_sets.begin(), c.feasibility.constraint_sets.end());
  return r;
}

// ---- plumbing --------------------------------------------------------------

void add_common(CLI::App* c, Options& o) {
  c->add_option("--problem", o.problem, "Problem file")->required();
  c->add_flag("--fixtures", o.fixtures, "Use fixture sets from the problem file");
  c->add_flag("--exact-lp", o.exact_lp, "Rational LP arithmetic where configurable");
  c->add_flag("--timings", o.timings, "Add wall-clock timings to the report");
  c->add_option("--mode", o.mode, "Subdifferential mode override (hull | limiting)");
}

void add_at(CLI::App* c, Options& o, bool required = true) {
  auto* opt = c->add_option("--at", o.at, "Point, comma separated (use --at=-1,2 for negative entries)");
  if (required) opt->required();
}

Json config_echo(const Options& o, const ProblemSpec& spec, const std::string& command) {
  Json c;
  c["fixtures"] = spec.use_fixtures;
  c["mode"] = to_string(spec.mode);
  c["norm"] = to_string(spec.norm);
  c["exact_lp"] = o.exact_lp;
  c["tolerances"] = {{"feasibility", report::num(spec.tol.feasibility)},
                     {"active", report::num(spec.tol.active)},
                     {"kkt", report::num(spec.tol.kkt)}};
  if (!o.at.empty()) c["at"] = o.at;
  if (command == "raster" || command == "efficiency" || command == "duality converse") c["res"] = o.res;
  if (!o.region.empty()) c["region"] = o.region;
  if (!o.kind.empty()) c["kind"] = o.kind;
  if (command == "pseudoconvex" || command.rfind("duality ", 0) == 0) c["type"] = o.type;
  if (command == "pseudoconvex") {
    c["per_axis"] = o.per_axis;
    c["ystar_per_dim"] = o.ystar_per_dim;
  }
  if (command == "fuzzy") {
    c["eta"] = report::num(o.eta);
    c["grid_step"] = report::num(o.grid_step);
  }
  if (command == "duality weak") {
    c["samples"] = o.samples;
    c["seed"] = o.seed;
  }
  if (o.tol) c["tol"] = report::num(*o.tol);
  return c;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Verification toolkit for nonsmooth robust multiobjective problems", "robustkkt"};
  app.require_subcommand(1);
  Options o;
  std::string command;
  std::function<Outcome(const Options&, const ProblemSpec&)> run;

  auto sub = [&](CLI::App* parent, const std::string& name, const std::string& desc, const std::string& full,
                 Outcome (*fn)(const Options&, const ProblemSpec&)) {
    CLI::App* c = parent->add_subcommand(name, desc);
    add_common(c, o);
    c->callback([&, full, fn] {
      command = full;
      run = fn;
    });
    return c;
  };

  auto* feasible = sub(&app, "feasible", "Robust feasibility of a point", "feasible", cmd_feasible);
  add_at(feasible, o);

  auto* ras = sub(&app, "raster", "Feasibility raster of a two-dimensional problem", "raster", cmd_raster);
  ras->add_option("--region", o.region, "x_lo,x_hi,y_lo,y_hi")->required();
  ras->add_option("--res", o.res, "Grid points per axis");
  ras->add_option("--out", o.out_csv, "CSV output path");

  auto* sd = sub(&app, "subdiff", "Subdifferential sets at a point", "subdiff", cmd_subdiff);
  add_at(sd, o);
  sd->add_option("--function", o.function, "Restrict to one function");
  sd->add_option("--v", o.v, "Fixed scenario for constraints");
  sd->add_option("--ystar", o.ystar, "Also report the scalarized set for y*");

  auto* cq = sub(&app, "cq", "Constraint qualification", "cq", cmd_cq);
  add_at(cq, o);

  CLI::App* kkt = app.add_subcommand("kkt", "KKT certificates");
  kkt->require_subcommand(1);
  auto* kc = sub(kkt, "check", "Verify a certificate", "kkt check", cmd_kkt_check);
  add_at(kc, o);
  kc->add_option("--certificate", o.certificate, "Certificate JSON")->required();
  kc->add_option("--tol", o.tol, "Residual tolerance");
  auto* ks = sub(kkt, "search", "Search a certificate by LP", "kkt search", cmd_kkt_search);
  add_at(ks, o);
  ks->add_option("--eps-min", o.eps_min, "Lower bound on sum |y*_j|");
  ks->add_option("--ball-vertices", o.ball_vertices, "Vertices of the polygonal dual ball");

  auto* fz = sub(&app, "fuzzy", "Fuzzy condition demonstrator", "fuzzy", cmd_fuzzy);
  add_at(fz, o);
  fz->add_option("--ystar", o.ystar, "y* in K+")->required();
  fz->add_option("--eta", o.eta, "Neighbourhood radius");
  fz->add_option("--grid-step", o.grid_step, "Lattice step");

  auto* pc = sub(&app, "pseudoconvex", "Pseudo convexity sampler or witness check", "pseudoconvex", cmd_pseudoconvex);
  add_at(pc, o);
  pc->add_option("--type", o.type, "I or II");
  pc->add_option("--per-axis", o.per_axis, "Sample grid points per axis");
  pc->add_option("--ystar-per-dim", o.ystar_per_dim, "Angular grid points for y*");
  pc->add_option("--region", o.region, "Sample box lo1,hi1,lo2,hi2,... (default xbar -/+ 1)");
  pc->add_option("--witness", o.witness, "Failure witness JSON");
  pc->add_option("--ball-vertices", o.ball_vertices, "Vertices of polygonal balls");

  auto* ef = sub(&app, "efficiency", "Counterexample search for efficiency notions", "efficiency", cmd_efficiency);
  add_at(ef, o);
  ef->add_option("--kind", o.kind, "efficient | weak | quasi | weak-quasi")->required();
  ef->add_option("--region", o.region, "lo1,hi1,lo2,hi2,...")->required();
  ef->add_option("--res", o.res, "Raster points per axis (d = 2) or sample count");
  ef->add_option("--seed", o.seed, "Sampling seed for d != 2");

  CLI::App* du = app.add_subcommand("duality", "Mond-Weir duality");
  du->require_subcommand(1);
  auto* ds = sub(du, "strong", "Dual triple from a KKT certificate", "duality strong", cmd_duality_strong);
  add_at(ds, o);
  auto* dw = sub(du, "weak", "Weak duality over feasible samples", "duality weak", cmd_duality_weak);
  add_at(dw, o, false);
  dw->add_option("--triples", o.triples, "Triples JSON (default: strong triple at --at)");
  dw->add_option("--type", o.type, "I or II");
  dw->add_option("--region", o.region, "Sample box")->required();
  dw->add_option("--samples", o.samples, "Feasible samples");
  dw->add_option("--seed", o.seed, "Sampling seed");
  dw->add_option("--tol", o.tol, "Dual feasibility tolerance");
  auto* dc = sub(du, "converse", "Classify the primal point of a dual triple", "duality converse",
                 cmd_duality_converse);
  add_at(dc, o, false);
  dc->add_option("--triples", o.triples, "Triple JSON (default: strong triple at --at)");
  dc->add_option("--type", o.type, "I (weak-quasi) or II (quasi)");
  dc->add_option("--region", o.region, "lo1,hi1,lo2,hi2,...")->required();
  dc->add_option("--res", o.res, "Raster points per axis");
  dc->add_option("--tol", o.tol, "Dual feasibility tolerance");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kUsageError;
  }
  if (!run) {
    err << "error: missing subcommand\n" << app.help();
    return kUsageError;
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    ProblemSpec spec = load_problem(o.problem);
    if (o.fixtures) spec.use_fixtures = true;
    if (!o.mode.empty()) spec.mode = parse_mode(o.mode);
    const std::string hash = report::fnv1a64(read_file(o.problem));
    Outcome res = run(o, spec);

    Json rep;
    rep["report_version"] = report::kReportVersion;
    rep["command"] = command;
    rep["problem"] = {{"path", o.problem}, {"name", spec.name}, {"hash", hash}};
    rep["config"] = config_echo(o, spec, command);
    rep["verdict"] = res.verdict;
    rep["exit_code"] = res.code;
    rep["result"] = std::move(res.result);
    Json sets = Json::array();
    for (const auto& e : res.sets) sets.push_back(report::evidence(e));
    rep["sets"] = sets;
    if (!spec.notes.empty()) rep["notes"] = spec.notes;
    if (o.timings) {
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rep["timings"] = {{"total_seconds", s}};
    }
    out << report::dump(rep);
    return res.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
}

}  // namespace robustkkt
