#include "robustkkt/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

namespace robustkkt {

// ---------------------------------------------------------------------------
// construction

namespace {

std::shared_ptr<Node> new_node(NodeKind kind, SourceSpan span) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->span = span;
  return n;
}

void absorb_flags(Node& n) {
  for (const auto& c : n.children) {
    n.has_x = n.has_x || c->has_x;
    n.has_v = n.has_v || c->has_v;
  }
}

std::shared_ptr<Node> with_children(NodeKind kind, std::vector<NodePtr> children, SourceSpan span) {
  for (const auto& c : children) {
    if (!c) throw std::invalid_argument("expression node has a null child");
  }
  auto n = new_node(kind, span);
  n->children = std::move(children);
  absorb_flags(*n);
  return n;
}

}  // namespace

NodePtr make_constant(double c, SourceSpan span) {
  auto n = new_node(NodeKind::Constant, span);
  n->value = c;
  return n;
}

NodePtr make_coordinate(int index, SourceSpan span) {
  if (index < 0) throw std::invalid_argument("coordinate index must be nonnegative");
  auto n = new_node(NodeKind::Coordinate, span);
  n->index = index;
  n->has_x = true;
  return n;
}

NodePtr make_uncertainty(SourceSpan span) {
  auto n = new_node(NodeKind::Uncertainty, span);
  n->has_v = true;
  return n;
}

NodePtr make_sum(std::vector<NodePtr> children, SourceSpan span) {
  if (children.empty()) throw std::invalid_argument("sum needs at least one term");
  return with_children(NodeKind::Sum, std::move(children), span);
}

NodePtr make_product(std::vector<NodePtr> children, SourceSpan span) {
  if (children.empty()) throw std::invalid_argument("product needs at least one factor");
  return with_children(NodeKind::Product, std::move(children), span);
}

NodePtr make_power(NodePtr base, int exponent, SourceSpan span) {
  if (exponent < 1) throw std::invalid_argument("power exponent must be a positive integer");
  auto n = with_children(NodeKind::Power, {std::move(base)}, span);
  n->index = exponent;
  return n;
}

NodePtr make_reciprocal(NodePtr child, SourceSpan span) {
  return with_children(NodeKind::Reciprocal, {std::move(child)}, span);
}

NodePtr make_sqrt(NodePtr child, SourceSpan span) {
  return with_children(NodeKind::Sqrt, {std::move(child)}, span);
}

NodePtr make_abs(NodePtr child, SourceSpan span) {
  return with_children(NodeKind::Abs, {std::move(child)}, span);
}

NodePtr make_max(std::vector<NodePtr> children, SourceSpan span) {
  if (children.empty()) throw std::invalid_argument("max needs at least one argument");
  return with_children(NodeKind::Max, std::move(children), span);
}

namespace {

int max_coordinate(const Node& n) {
  int m = n.kind == NodeKind::Coordinate ? n.index : -1;
  for (const auto& c : n.children) m = std::max(m, max_coordinate(*c));
  return m;
}

}  // namespace

Expr::Expr(NodePtr root, std::size_t dim) : root_(std::move(root)), dim_(dim) {
  if (!root_) throw std::invalid_argument("expression root is null");
  if (dim_ == 0) throw std::invalid_argument("expression dimension must be at least 1");
  const int m = max_coordinate(*root_);
  if (m >= 0 && static_cast<std::size_t>(m) >= dim_) {
    throw std::invalid_argument("coordinate x" + std::to_string(m + 1) +
                                " exceeds dimension " + std::to_string(dim_));
  }
}

// ---------------------------------------------------------------------------
// parsing

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::size_t dim) : s_(text), dim_(dim) {}

  NodePtr parse_all() {
    auto e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= s_.size()) fail(std::string("expected '") + c + "' but reached end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  NodePtr expr() {
    skip_ws();
    const std::size_t begin = pos_;
    std::vector<NodePtr> terms{term()};
    while (true) {
      if (accept('+')) {
        terms.push_back(term());
      } else if (peek('-')) {
        const std::size_t at = pos_++;
        terms.push_back(negate(term(), at));
      } else {
        break;
      }
    }
    if (terms.size() == 1) return terms.front();
    return make_sum(std::move(terms), {begin, pos_});
  }

  NodePtr term() {
    skip_ws();
    const std::size_t begin = pos_;
    std::vector<NodePtr> factors{unary()};
    while (true) {
      if (accept('*')) {
        factors.push_back(unary());
      } else if (peek('/')) {
        const std::size_t at = pos_++;
        auto rhs = unary();
        if (rhs->kind == NodeKind::Constant) {
          if (rhs->value == 0.0) {
            pos_ = at;
            fail("division by zero literal");
          }
          auto& last = factors.back();
          if (last->kind == NodeKind::Constant) {
            last = make_constant(last->value / rhs->value, {last->span.begin, pos_});
          } else {
            factors.push_back(make_constant(1.0 / rhs->value, rhs->span));
          }
        } else {
          factors.push_back(make_reciprocal(rhs, {at, pos_}));
        }
      } else {
        break;
      }
    }
    if (factors.size() == 1) return factors.front();
    return make_product(std::move(factors), {begin, pos_});
  }

  NodePtr negate(NodePtr t, std::size_t at) {
    if (t->kind == NodeKind::Constant) return make_constant(-t->value, {at, t->span.end});
    if (t->kind == NodeKind::Product && t->children.front()->kind == NodeKind::Constant) {
      auto factors = t->children;
      factors.front() = make_constant(-factors.front()->value, factors.front()->span);
      return make_product(std::move(factors), {at, t->span.end});
    }
    return make_product({make_constant(-1.0, {at, at + 1}), t}, {at, t->span.end});
  }

  NodePtr unary() {
    skip_ws();
    const std::size_t at = pos_;
    if (accept('-')) return negate(unary(), at);
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    skip_ws();
    const std::size_t begin = pos_;
    auto base = primary();
    if (!accept('^')) return base;
    skip_ws();
    const std::size_t at = pos_;
    std::size_t end = pos_;
    while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end]))) ++end;
    if (end == at) fail("exponent must be a positive integer literal");
    int n = 0;
    auto r = std::from_chars(s_.data() + at, s_.data() + end, n);
    if (r.ec != std::errc() || n < 1) fail("exponent must be a positive integer literal");
    pos_ = end;
    return make_power(base, n, {begin, pos_});
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const std::size_t begin = pos_;
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      auto e = expr();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end]))) ++end;
      const std::string_view id = s_.substr(pos_, end - pos_);
      pos_ = end;
      if (id == "v") return make_uncertainty({begin, pos_});
      if (id == "abs" || id == "sqrt") {
        expect('(');
        auto arg = expr();
        expect(')');
        return id == "abs" ? make_abs(arg, {begin, pos_}) : make_sqrt(arg, {begin, pos_});
      }
      if (id == "max") {
        expect('(');
        std::vector<NodePtr> args{expr()};
        while (accept(',')) args.push_back(expr());
        expect(')');
        return make_max(std::move(args), {begin, pos_});
      }
      if (id.size() >= 2 && id[0] == 'x') {
        int k = 0;
        auto r = std::from_chars(id.data() + 1, id.data() + id.size(), k);
        if (r.ec == std::errc() && r.ptr == id.data() + id.size() && id[1] != '0') {
          if (k < 1 || static_cast<std::size_t>(k) > dim_) {
            pos_ = begin;
            fail("coordinate " + std::string(id) + " out of range 1.." + std::to_string(dim_));
          }
          return make_coordinate(k - 1, {begin, pos_});
        }
      }
      pos_ = begin;
      fail("unknown identifier '" + std::string(id) + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t begin = pos_;
    std::size_t end = pos_;
    auto digits = [&] {
      while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end]))) ++end;
    };
    digits();
    if (end < s_.size() && s_[end] == '.') {
      ++end;
      digits();
    }
    if (end < s_.size() && (s_[end] == 'e' || s_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < s_.size() && (s_[e] == '+' || s_[e] == '-')) ++e;
      if (e < s_.size() && std::isdigit(static_cast<unsigned char>(s_[e]))) {
        end = e;
        digits();
      }
    }
    double value = 0.0;
    auto r = std::from_chars(s_.data() + begin, s_.data() + end, value);
    if (r.ec != std::errc() || r.ptr != s_.data() + end) fail("malformed number");
    pos_ = end;
    return make_constant(value, {begin, end});
  }

  std::string_view s_;
  std::size_t dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("dimension must be at least 1");
  Parser p(text, dim);
  return Expr(p.parse_all(), dim);
}

double parse_constant(std::string_view text) {
  Parser p(text, 0);
  auto root = p.parse_all();
  if (root->has_v) throw ParseError("constant expression may not mention v", 0);
  return eval_node(*root, {}, std::nullopt);
}

// ---------------------------------------------------------------------------
// printing

std::string format_number(double x) {
  std::array<char, 64> buf{};
  auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), r.ptr);
}

namespace {

int precedence(const Node& n) {
  switch (n.kind) {
    case NodeKind::Sum:
      return 1;
    case NodeKind::Product:
    case NodeKind::Reciprocal:
      return 2;
    case NodeKind::Power:
      return 3;
    default:
      return 4;
  }
}

void print_into(const Node& n, std::string& out);

void print_at(const Node& n, int min_prec, std::string& out) {
  if (precedence(n) < min_prec) {
    out += '(';
    print_into(n, out);
    out += ')';
  } else {
    print_into(n, out);
  }
}

void print_into(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Constant:
      if (n.value < 0.0 || (n.value == 0.0 && std::signbit(n.value))) {
        out += "(-" + format_number(-n.value) + ")";
      } else {
        out += format_number(n.value);
      }
      return;
    case NodeKind::Coordinate:
      out += "x" + std::to_string(n.index + 1);
      return;
    case NodeKind::Uncertainty:
      out += "v";
      return;
    case NodeKind::Sum:
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += " + ";
        print_at(*n.children[i], 2, out);
      }
      return;
    case NodeKind::Product:
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        const Node& c = *n.children[i];
        if (i > 0 && c.kind == NodeKind::Reciprocal) {
          out += "/";
          print_at(*c.children[0], 3, out);
          continue;
        }
        if (i) out += "*";
        print_at(c, 3, out);
      }
      return;
    case NodeKind::Power:
      print_at(*n.children[0], 4, out);
      out += "^" + std::to_string(n.index);
      return;
    case NodeKind::Reciprocal:
      out += "1/";
      print_at(*n.children[0], 3, out);
      return;
    case NodeKind::Sqrt:
    case NodeKind::Abs:
    case NodeKind::Max:
      out += n.kind == NodeKind::Sqrt ? "sqrt(" : n.kind == NodeKind::Abs ? "abs(" : "max(";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ", ";
        print_into(*n.children[i], out);
      }
      out += ")";
      return;
  }
}

}  // namespace

std::string print(const Node& n) {
  std::string out;
  print_into(n, out);
  return out;
}

std::string print(const Expr& e) { return print(e.root()); }

bool structurally_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.children.size() != b.children.size()) return false;
  if (a.kind == NodeKind::Constant && a.value != b.value) return false;
  if ((a.kind == NodeKind::Coordinate || a.kind == NodeKind::Power) && a.index != b.index) {
    return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!structurally_equal(*a.children[i], *b.children[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// evaluation

namespace {

double checked_reciprocal(double a) {
  if (a == 0.0) throw DomainError("division by zero");
  return 1.0 / a;
}

double checked_sqrt(double a) {
  if (a < 0.0) throw DomainError("square root of negative value " + format_number(a));
  return std::sqrt(a);
}

double int_pow(double b, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= b;
  return r;
}

void check_point(const Expr& e, std::span<const double> x) {
  if (x.size() != e.dim()) {
    throw DimensionError("point has dimension " + std::to_string(x.size()) +
                         ", expression expects " + std::to_string(e.dim()));
  }
}

void check_v(const Expr& e, const std::optional<double>& v) {
  if (e.has_uncertainty() && !v) throw UncertaintyArgumentError("expression needs a value for v");
  if (!e.has_uncertainty() && v) {
    throw UncertaintyArgumentError("expression does not mention v but a value was supplied");
  }
}

}  // namespace

double eval_node(const Node& n, std::span<const double> x, std::optional<double> v) {
  switch (n.kind) {
    case NodeKind::Constant:
      return n.value;
    case NodeKind::Coordinate:
      if (static_cast<std::size_t>(n.index) >= x.size()) {
        throw DimensionError("coordinate x" + std::to_string(n.index + 1) + " outside point");
      }
      return x[n.index];
    case NodeKind::Uncertainty:
      if (!v) throw UncertaintyArgumentError("expression needs a value for v");
      return *v;
    case NodeKind::Sum: {
      double s = eval_node(*n.children[0], x, v);
      for (std::size_t i = 1; i < n.children.size(); ++i) s += eval_node(*n.children[i], x, v);
      return s;
    }
    case NodeKind::Product: {
      double s = eval_node(*n.children[0], x, v);
      for (std::size_t i = 1; i < n.children.size(); ++i) s *= eval_node(*n.children[i], x, v);
      return s;
    }
    case NodeKind::Power:
      return int_pow(eval_node(*n.children[0], x, v), n.index);
    case NodeKind::Reciprocal:
      return checked_reciprocal(eval_node(*n.children[0], x, v));
    case NodeKind::Sqrt:
      return checked_sqrt(eval_node(*n.children[0], x, v));
    case NodeKind::Abs:
      return std::abs(eval_node(*n.children[0], x, v));
    case NodeKind::Max: {
      double m = eval_node(*n.children[0], x, v);
      for (std::size_t i = 1; i < n.children.size(); ++i) {
        m = std::max(m, eval_node(*n.children[i], x, v));
      }
      return m;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double eval(const Expr& e, std::span<const double> x, std::optional<double> v) {
  check_point(e, x);
  check_v(e, v);
  return eval_node(e.root(), x, v);
}

// ---------------------------------------------------------------------------
// forward-mode differentiation over (x, v)

namespace {

struct Dual {
  double val = 0.0;
  Vec grad;  // d entries for x, one for v
};

struct Differentiator {
  std::span<const double> x;
  std::optional<double> v;
  double kink_tol;
  bool wrt_x;  // which kinks are fatal
  std::size_t n;

  Dual constant(double c) const { return {c, Vec(n, 0.0)}; }

  [[noreturn]] void kink(const Node& atom) const {
    throw NonsmoothError(print(atom) + " active");
  }

  bool fatal(const Node& child) const { return wrt_x ? child.has_x : child.has_v; }

  Dual run(const Node& node) const {
    switch (node.kind) {
      case NodeKind::Constant:
        return constant(node.value);
      case NodeKind::Coordinate: {
        Dual d = constant(x[node.index]);
        d.grad[node.index] = 1.0;
        return d;
      }
      case NodeKind::Uncertainty: {
        if (!v) throw UncertaintyArgumentError("expression needs a value for v");
        Dual d = constant(*v);
        d.grad[n - 1] = 1.0;
        return d;
      }
      case NodeKind::Sum: {
        Dual s = run(*node.children[0]);
        for (std::size_t i = 1; i < node.children.size(); ++i) {
          Dual c = run(*node.children[i]);
          s.val += c.val;
          for (std::size_t k = 0; k < n; ++k) s.grad[k] += c.grad[k];
        }
        return s;
      }
      case NodeKind::Product: {
        Dual s = run(*node.children[0]);
        for (std::size_t i = 1; i < node.children.size(); ++i) {
          Dual c = run(*node.children[i]);
          for (std::size_t k = 0; k < n; ++k) s.grad[k] = s.grad[k] * c.val + s.val * c.grad[k];
          s.val *= c.val;
        }
        return s;
      }
      case NodeKind::Power: {
        Dual b = run(*node.children[0]);
        const int p = node.index;
        const double slope = p * int_pow(b.val, p - 1);
        Dual r = constant(int_pow(b.val, p));
        for (std::size_t k = 0; k < n; ++k) r.grad[k] = slope * b.grad[k];
        return r;
      }
      case NodeKind::Reciprocal: {
        Dual b = run(*node.children[0]);
        const double r0 = checked_reciprocal(b.val);
        Dual r = constant(r0);
        for (std::size_t k = 0; k < n; ++k) r.grad[k] = -r0 * r0 * b.grad[k];
        return r;
      }
      case NodeKind::Sqrt: {
        Dual b = run(*node.children[0]);
        const double s0 = checked_sqrt(b.val);
        Dual r = constant(s0);
        const bool moves = std::any_of(b.grad.begin(), b.grad.end(), [](double g) { return g != 0.0; });
        if (moves && s0 == 0.0) throw DomainError("sqrt not differentiable at 0");
        for (std::size_t k = 0; k < n; ++k) r.grad[k] = moves ? b.grad[k] / (2.0 * s0) : 0.0;
        return r;
      }
      case NodeKind::Abs: {
        Dual b = run(*node.children[0]);
        if (std::abs(b.val) <= kink_tol && fatal(*node.children[0])) kink(node);
        const double sg = b.val >= 0.0 ? 1.0 : -1.0;
        b.val = std::abs(b.val);
        for (double& g : b.grad) g *= sg;
        return b;
      }
      case NodeKind::Max: {
        std::vector<Dual> branches;
        branches.reserve(node.children.size());
        std::size_t best = 0;
        for (std::size_t i = 0; i < node.children.size(); ++i) {
          branches.push_back(run(*node.children[i]));
          if (branches[i].val > branches[best].val) best = i;
        }
        for (std::size_t i = 0; i < branches.size(); ++i) {
          if (i == best) continue;
          if (branches[best].val - branches[i].val <= kink_tol &&
              (fatal(*node.children[i]) || fatal(*node.children[best]))) {
            kink(node);
          }
        }
        return branches[best];
      }
    }
    return constant(0.0);
  }
};

}  // namespace

Vec smooth_gradient(const Expr& e, std::span<const double> x, std::optional<double> v,
                    double kink_tol) {
  check_point(e, x);
  check_v(e, v);
  Differentiator d{x, v, kink_tol, true, e.dim() + 1};
  Dual r = d.run(e.root());
  r.grad.pop_back();
  return r.grad;
}

double partial_v(const Expr& e, std::span<const double> x, double v, double kink_tol) {
  check_point(e, x);
  if (!e.has_uncertainty()) return 0.0;
  Differentiator d{x, v, kink_tol, false, e.dim() + 1};
  return d.run(e.root()).grad.back();
}

// ---------------------------------------------------------------------------
// kinks

namespace {

void collect_kinks(const Node& n, std::span<const double> x, std::optional<double> v,
                   double tol, std::vector<KinkAtom>& out) {
  if (n.kind == NodeKind::Abs) {
    if (std::abs(eval_node(*n.children[0], x, v)) <= tol) {
      out.push_back({NodeKind::Abs, print(n), n.span, 1, n.children[0]->has_x,
                     n.children[0]->has_v});
    }
  } else if (n.kind == NodeKind::Max && n.children.size() >= 2) {
    std::vector<double> vals;
    for (const auto& c : n.children) vals.push_back(eval_node(*c, x, v));
    const double m = *std::max_element(vals.begin(), vals.end());
    int tied = 0;
    for (double val : vals) tied += m - val <= tol ? 1 : 0;
    if (tied >= 2) out.push_back({NodeKind::Max, print(n), n.span, tied, n.has_x, n.has_v});
  }
  for (const auto& c : n.children) collect_kinks(*c, x, v, tol, out);
}

}  // namespace

std::vector<KinkAtom> active_kinks(const Expr& e, std::span<const double> x,
                                   std::optional<double> v, double tol) {
  check_point(e, x);
  check_v(e, v);
  std::vector<KinkAtom> out;
  collect_kinks(e.root(), x, v, tol, out);
  return out;
}

// ---------------------------------------------------------------------------
// compiled programs

void Program::emit(const Node& n, std::span<const double> fold_x, bool fold) {
  if (fold && !n.has_v) {
    code_.push_back({Op::Const, 0, eval_node(n, fold_x, std::nullopt)});
    return;
  }
  const int argc = static_cast<int>(n.children.size());
  for (const auto& c : n.children) emit(*c, fold_x, fold);
  switch (n.kind) {
    case NodeKind::Constant:
      code_.push_back({Op::Const, 0, n.value});
      break;
    case NodeKind::Coordinate:
      code_.push_back({Op::X, n.index, 0.0});
      break;
    case NodeKind::Uncertainty:
      reads_v_ = true;
      code_.push_back({Op::V, 0, 0.0});
      break;
    case NodeKind::Sum:
      code_.push_back({Op::Add, argc, 0.0});
      break;
    case NodeKind::Product:
      code_.push_back({Op::Mul, argc, 0.0});
      break;
    case NodeKind::Power:
      code_.push_back({Op::Pow, n.index, 0.0});
      break;
    case NodeKind::Reciprocal:
      code_.push_back({Op::Recip, 0, 0.0});
      break;
    case NodeKind::Sqrt:
      code_.push_back({Op::Sqrt, 0, 0.0});
      break;
    case NodeKind::Abs:
      code_.push_back({Op::Abs, 0, 0.0});
      break;
    case NodeKind::Max:
      code_.push_back({Op::Max, argc, 0.0});
      break;
  }
}

namespace {

template <typename Instr, typename Op>
std::size_t stack_depth(const std::vector<Instr>& code) {
  std::size_t depth = 0, peak = 0;
  for (const auto& in : code) {
    switch (in.op) {
      case Op::Const:
      case Op::X:
      case Op::V:
        ++depth;
        break;
      case Op::Add:
      case Op::Mul:
      case Op::Max:
        depth -= static_cast<std::size_t>(in.arg) - 1;
        break;
      default:
        break;
    }
    peak = std::max(peak, depth);
  }
  return peak;
}

}  // namespace

Program Program::compile(const Node& root) {
  Program p;
  p.emit(root, {}, false);
  p.max_depth_ = stack_depth<Instr, Op>(p.code_);
  return p;
}

Program Program::specialize(const Node& root, std::span<const double> x) {
  Program p;
  p.emit(root, x, true);
  p.max_depth_ = stack_depth<Instr, Op>(p.code_);
  return p;
}

#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wmaybe-uninitialized"
double Program::run(std::span<const double> x, double v) const {
  std::array<double, 64> small;
  std::vector<double> big;
  double* st = small.data();
  if (max_depth_ > small.size()) {
    big.resize(max_depth_);
    st = big.data();
  }
  std::size_t sp = 0;
  for (const auto& in : code_) {
    switch (in.op) {
      case Op::Const:
        st[sp++] = in.c;
        break;
      case Op::X:
        st[sp++] = x[in.arg];
        break;
      case Op::V:
        st[sp++] = v;
        break;
      case Op::Add: {
        const std::size_t base = sp - in.arg;
        double s = st[base];
        for (std::size_t i = base + 1; i < sp; ++i) s += st[i];
        sp = base;
        st[sp++] = s;
        break;
      }
      case Op::Mul: {
        const std::size_t base = sp - in.arg;
        double s = st[base];
        for (std::size_t i = base + 1; i < sp; ++i) s *= st[i];
        sp = base;
        st[sp++] = s;
        break;
      }
      case Op::Max: {
        const std::size_t base = sp - in.arg;
        double s = st[base];
        for (std::size_t i = base + 1; i < sp; ++i) s = std::max(s, st[i]);
        sp = base;
        st[sp++] = s;
        break;
      }
      case Op::Pow:
        st[sp - 1] = int_pow(st[sp - 1], in.arg);
        break;
      case Op::Recip:
        st[sp - 1] = checked_reciprocal(st[sp - 1]);
        break;
      case Op::Sqrt:
        st[sp - 1] = checked_sqrt(st[sp - 1]);
        break;
      case Op::Abs:
        st[sp - 1] = std::abs(st[sp - 1]);
        break;
    }
  }
  return st[0];
}
#pragma GCC diagnostic pop

}  // namespace robustkkt
