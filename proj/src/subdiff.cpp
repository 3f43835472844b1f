#include "robustkkt/subdiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace robustkkt {

const char* to_string(SubdiffMode m) { return m == SubdiffMode::Hull ? "hull" : "limiting"; }

const char* to_string(Exactness e) { return e == Exactness::Exact ? "exact" : "outer-estimate"; }

SubdiffMode parse_mode(const std::string& s) {
  if (s == "hull") return SubdiffMode::Hull;
  if (s == "limiting") return SubdiffMode::Limiting;
  throw std::invalid_argument("unknown subdifferential mode '" + s + "' (expected hull or limiting)");
}

namespace {

struct Info {
  double val = 0.0;
  bool smooth = true;
  Vec grad;
  std::uint64_t coords = 0;  // syntactic coordinate support
  std::vector<Info> kids;
  std::vector<std::size_t> active;  // tied branches of a max node
};

class Engine {
 public:
  Engine(std::span<const double> x, std::optional<double> v, SubdiffMode mode,
         const SubdiffOptions& opt)
      : x_(x), v_(v), d_(x.size()), mode_(mode), opt_(opt) {}

  Info analyze(const Node& n) {
    Info in;
    in.grad.assign(d_, 0.0);
    for (const auto& c : n.children) {
      in.kids.push_back(analyze(*c));
      in.coords |= in.kids.back().coords;
    }
    auto all_smooth = [&] {
      return std::all_of(in.kids.begin(), in.kids.end(), [](const Info& k) { return k.smooth; });
    };
    switch (n.kind) {
      case NodeKind::Constant:
        in.val = n.value;
        break;
      case NodeKind::Coordinate:
        in.val = x_[n.index];
        in.grad[n.index] = 1.0;
        in.coords = std::uint64_t{1} << (n.index % 64);
        break;
      case NodeKind::Uncertainty:
        if (!v_) throw UncertaintyArgumentError("expression needs a value for v");
        in.val = *v_;
        break;
      case NodeKind::Sum:
        in.smooth = all_smooth();
        for (const auto& k : in.kids) {
          in.val += k.val;
          if (in.smooth) axpy(in.grad, 1.0, k.grad);
        }
        break;
      case NodeKind::Product: {
        in.smooth = all_smooth();
        in.val = in.kids[0].val;
        in.grad = in.kids[0].grad;
        for (std::size_t i = 1; i < in.kids.size(); ++i) {
          const Info& k = in.kids[i];
          for (std::size_t j = 0; j < d_; ++j) in.grad[j] = in.grad[j] * k.val + in.val * k.grad[j];
          in.val *= k.val;
        }
        break;
      }
      case NodeKind::Power: {
        const Info& k = in.kids[0];
        in.smooth = k.smooth;
        in.val = std::pow(k.val, n.index);
        in.grad = scaled(k.grad, n.index * std::pow(k.val, n.index - 1));
        break;
      }
      case NodeKind::Reciprocal: {
        const Info& k = in.kids[0];
        if (k.val == 0.0) throw DomainError("division by zero");
        in.smooth = k.smooth;
        in.val = 1.0 / k.val;
        in.grad = scaled(k.grad, -1.0 / (k.val * k.val));
        break;
      }
      case NodeKind::Sqrt: {
        const Info& k = in.kids[0];
        if (k.val < 0.0) throw DomainError("square root of negative value");
        in.smooth = k.smooth;
        in.val = std::sqrt(k.val);
        if (k.val == 0.0) {
          if (!k.smooth || norm_inf(k.grad) != 0.0) {
            throw UnsupportedStructure(print(n) + ": square root at zero is not Lipschitz");
          }
        } else {
          in.grad = scaled(k.grad, 0.5 / in.val);
        }
        break;
      }
      case NodeKind::Abs: {
        const Info& k = in.kids[0];
        in.val = std::abs(k.val);
        const bool kink = n.children[0]->has_x && std::abs(k.val) <= opt_.kink_tol;
        in.smooth = k.smooth && !kink;
        if (in.smooth) in.grad = scaled(k.grad, k.val >= 0.0 ? 1.0 : -1.0);
        break;
      }
      case NodeKind::Max: {
        in.val = in.kids[0].val;
        for (const auto& k : in.kids) in.val = std::max(in.val, k.val);
        bool any_x = false;
        for (std::size_t i = 0; i < in.kids.size(); ++i) {
          if (in.val - in.kids[i].val <= opt_.kink_tol) {
            in.active.push_back(i);
            any_x = any_x || n.children[i]->has_x;
          }
        }
        if (in.active.size() == 1) {
          const Info& k = in.kids[in.active[0]];
          in.smooth = k.smooth;
          in.grad = k.grad;
        } else {
          in.smooth = !any_x;  // tie between x-free branches: gradient zero
        }
        break;
      }
    }
    if (!in.smooth) in.grad.assign(d_, 0.0);
    return in;
  }

  PolytopeSet collect(const Node& n, const Info& in, double kappa) {
    if (kappa == 0.0) return PolytopeSet::point(Vec(d_, 0.0));
    if (in.smooth) {
      rule("gradient");
      return PolytopeSet::point(scaled(in.grad, kappa));
    }
    switch (n.kind) {
      case NodeKind::Sum: {
        rule("sum");
        PolytopeSet acc = collect(*n.children[0], in.kids[0], kappa);
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          acc = tidy(minkowski_sum(acc, collect(*n.children[i], in.kids[i], kappa)));
        }
        return acc;
      }
      case NodeKind::Product: {
        std::size_t rough = in.kids.size(), count = 0;
        for (std::size_t i = 0; i < in.kids.size(); ++i) {
          if (!in.kids[i].smooth) {
            rough = i;
            ++count;
          }
        }
        if (count > 1) {
          throw UnsupportedStructure("product of nonsmooth factors: " + print(n));
        }
        rule("product");
        // Others' product and its gradient.
        double p = 1.0;
        Vec gp(d_, 0.0);
        for (std::size_t i = 0; i < in.kids.size(); ++i) {
          if (i == rough) continue;
          for (std::size_t j = 0; j < d_; ++j) gp[j] = gp[j] * in.kids[i].val + p * in.kids[i].grad[j];
          p *= in.kids[i].val;
        }
        PolytopeSet s = collect(*n.children[rough], in.kids[rough], kappa * p);
        return tidy(minkowski_sum(s, PolytopeSet::point(scaled(gp, kappa * in.kids[rough].val))));
      }
      case NodeKind::Power:
      case NodeKind::Reciprocal:
      case NodeKind::Sqrt: {
        rule("chain");
        const double c = in.kids[0].val;
        double h = 0.0;
        if (n.kind == NodeKind::Power) h = n.index * std::pow(c, n.index - 1);
        if (n.kind == NodeKind::Reciprocal) h = -1.0 / (c * c);
        if (n.kind == NodeKind::Sqrt) h = 0.5 / std::sqrt(c);
        return collect(*n.children[0], in.kids[0], kappa * h);
      }
      case NodeKind::Abs: {
        const Info& k = in.kids[0];
        if (std::abs(k.val) > opt_.kink_tol) {
          rule("chain");
          return collect(*n.children[0], k, k.val >= 0.0 ? kappa : -kappa);
        }
        note_kink(k.coords, k.smooth);
        PolytopeSet a = collect(*n.children[0], k, kappa);
        PolytopeSet b = collect(*n.children[0], k, -kappa);
        if (kappa > 0.0) {
          rule("abs-kink");
          PolytopeSet out;
          for (const auto& p : a.components) {
            for (const auto& q : b.components) {
              out.components.push_back(hull(PolytopeSet{{p, q}}));
            }
          }
          return tidy(reduce(out));
        }
        rule("abs-kink-concave");
        return tidy(union_of(a, b));
      }
      case NodeKind::Max: {
        if (in.active.size() == 1) {
          rule("max-branch");
          const std::size_t i = in.active[0];
          return collect(*n.children[i], in.kids[i], kappa);
        }
        std::uint64_t coords = 0;
        bool inner_smooth = true;
        std::vector<PolytopeSet> sets;
        for (std::size_t i : in.active) {
          coords |= in.kids[i].coords;
          inner_smooth = inner_smooth && in.kids[i].smooth;
          sets.push_back(collect(*n.children[i], in.kids[i], kappa));
        }
        note_kink(coords, inner_smooth);
        if (kappa < 0.0) {
          rule("max-tie-concave");
          PolytopeSet out = sets[0];
          for (std::size_t i = 1; i < sets.size(); ++i) out = union_of(out, sets[i]);
          return tidy(out);
        }
        rule("max-tie");
        PolytopeSet out;
        std::vector<std::size_t> sel(sets.size(), 0);
        while (true) {
          PolytopeSet pick;
          for (std::size_t i = 0; i < sets.size(); ++i) pick.components.push_back(sets[i].components[sel[i]]);
          out.components.push_back(hull(pick));
          std::size_t i = 0;
          for (; i < sets.size(); ++i) {
            if (++sel[i] < sets[i].components.size()) break;
            sel[i] = 0;
          }
          if (i == sets.size()) break;
          if (out.components.size() > opt_.max_components) {
            collapse_note();
            return PolytopeSet::single(hull(union_all(sets)));
          }
        }
        return tidy(reduce(out));
      }
      default:
        break;
    }
    throw UnsupportedStructure("no subdifferential rule for " + print(n));
  }

  Exactness exactness() const { return exact_ ? Exactness::Exact : Exactness::OuterEstimate; }
  std::vector<std::string> rules() const { return rules_; }

 private:
  void rule(const char* r) {
    if (std::find(rules_.begin(), rules_.end(), r) == rules_.end()) rules_.push_back(r);
  }

  void note_kink(std::uint64_t coords, bool inner_smooth) {
    if (!inner_smooth) exact_ = false;
    for (auto s : supports_) {
      if (s & coords) exact_ = false;
    }
    supports_.push_back(coords);
  }

  void collapse_note() {
    exact_ = false;
    rule("component-cap");
  }

  static PolytopeSet union_all(const std::vector<PolytopeSet>& sets) {
    PolytopeSet u;
    for (const auto& s : sets) u.components.insert(u.components.end(), s.components.begin(), s.components.end());
    return u;
  }

  PolytopeSet tidy(PolytopeSet s) {
    if (mode_ == SubdiffMode::Hull && s.components.size() > 1) return PolytopeSet::single(hull(s));
    if (s.components.size() > opt_.max_components) {
      collapse_note();
      return PolytopeSet::single(hull(s));
    }
    return s;
  }

  std::span<const double> x_;
  std::optional<double> v_;
  std::size_t d_;
  SubdiffMode mode_;
  SubdiffOptions opt_;
  bool exact_ = true;
  std::vector<std::uint64_t> supports_;
  std::vector<std::string> rules_;
};

}  // namespace

SubdiffResult scaled_subdiff(const Expr& e, std::span<const double> x, std::optional<double> v,
                             double kappa, SubdiffMode mode, const SubdiffOptions& opt) {
  if (x.size() != e.dim()) throw DimensionError("subdifferential: point dimension mismatch");
  if (e.has_uncertainty() && !v) throw UncertaintyArgumentError("expression needs a value for v");
  Engine eng(x, e.has_uncertainty() ? v : std::nullopt, mode, opt);
  const Info in = eng.analyze(e.root());
  PolytopeSet s = eng.collect(e.root(), in, kappa);
  SubdiffResult r;
  r.mode = mode;
  r.set = mode == SubdiffMode::Hull ? PolytopeSet::single(hull(s)) : reduce(s);
  r.exactness = eng.exactness();
  r.rules = eng.rules();
  return r;
}

SupRuleResult sup_rule(const Expr& g, std::span<const double> x, const UncertaintySet& u,
                       double tol, SubdiffMode mode, const SubdiffOptions& opt,
                       std::size_t plateau_samples) {
  SupRuleResult out;
  out.scenarios = maximize_scenarios(g, x, u, tol);
  if (out.scenarios.active.empty()) {
    throw std::runtime_error("sup rule: empty active scenario set");
  }
  if (!g.has_uncertainty()) {
    out.result = scaled_subdiff(g, x, std::nullopt, 1.0, mode, opt);
    out.used_scenarios = out.scenarios.active;
    return out;
  }
  std::vector<double> used = out.scenarios.active;
  for (const auto& [a, b] : out.scenarios.plateaus) {
    for (std::size_t k = 1; k + 1 < plateau_samples; ++k) {
      used.push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(plateau_samples - 1));
    }
  }
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());

  PolytopeSet acc;
  bool exact = true;
  std::vector<std::string> rules{"sup-rule"};
  for (double v : used) {
    SubdiffResult r = scaled_subdiff(g, x, v, 1.0, SubdiffMode::Limiting, opt);
    exact = exact && r.exactness == Exactness::Exact;
    for (const auto& rn : r.rules) {
      if (std::find(rules.begin(), rules.end(), rn) == rules.end()) rules.push_back(rn);
    }
    acc = acc.components.empty() ? r.set : union_of(acc, r.set);
  }
  if (!out.scenarios.plateaus.empty()) {
    rules.push_back("plateau-sampled");
    exact = false;
  }
  out.result.mode = mode;
  out.result.rules = rules;
  if (mode == SubdiffMode::Hull) {
    out.result.set = PolytopeSet::single(hull(acc));
    out.result.exactness = exact ? Exactness::Exact : Exactness::OuterEstimate;
  } else {
    out.result.set = reduce(acc);
    out.result.exactness = Exactness::OuterEstimate;
  }
  out.used_scenarios = std::move(used);
  return out;
}

ScalarizedSubdiff scalarized_subdiff(std::span<const double> ystar, const std::vector<Expr>& f,
                                     std::span<const double> x, SubdiffMode mode,
                                     const std::vector<std::optional<PolytopeSet>>& fixtures,
                                     const SubdiffOptions& opt) {
  if (ystar.size() != f.size()) throw DimensionError("scalarized_subdiff: y* length mismatch");
  if (f.empty()) throw std::invalid_argument("scalarized_subdiff: no objectives");
  const std::size_t d = x.size();
  ScalarizedSubdiff out;

  std::vector<NodePtr> terms;
  for (std::size_t j = 0; j < f.size(); ++j) {
    terms.push_back(make_product({make_constant(ystar[j]), f[j].root_ptr()}));
  }
  const Expr combined(terms.size() == 1 ? terms[0] : make_sum(terms), f[0].dim());
  out.direct = scaled_subdiff(combined, x, std::nullopt, 1.0, mode, opt);

  PolytopeSet acc = PolytopeSet::point(Vec(d, 0.0));
  bool exact = true;
  std::size_t nontrivial = 0;
  std::vector<std::string> rules{"sum"};
  for (std::size_t j = 0; j < f.size(); ++j) {
    PolytopeSet part;
    const bool fixture = j < fixtures.size() && fixtures[j].has_value();
    out.from_fixture.push_back(fixture);
    if (fixture) {
      part = scale(*fixtures[j], ystar[j]);
      if (mode == SubdiffMode::Hull) part = PolytopeSet::single(hull(part));
      exact = false;
    } else {
      SubdiffResult r = scaled_subdiff(f[j], x, std::nullopt, ystar[j], mode, opt);
      exact = exact && r.exactness == Exactness::Exact;
      part = r.set;
    }
    if (part.vertex_count() > 1) ++nontrivial;
    acc = minkowski_sum(acc, part);
  }
  out.combination.mode = mode;
  out.combination.set = mode == SubdiffMode::Hull ? PolytopeSet::single(hull(acc)) : acc;
  out.combination.exactness = exact && nontrivial <= 1 ? Exactness::Exact : Exactness::OuterEstimate;
  out.combination.rules = rules;
  return out;
}

}  // namespace robustkkt
