#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "robustkkt/linalg.hpp"

namespace robustkkt {

// Piecewise-smooth scalar expressions in the decision variables x1..xd and one
// optional uncertainty scalar v.

enum class NodeKind {
  Constant,
  Coordinate,
  Uncertainty,
  Sum,
  Product,
  Power,
  Reciprocal,
  Sqrt,
  Abs,
  Max,
};

struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;  ///< Constant value.
  int index = 0;       ///< 0-based coordinate for Coordinate, exponent for Power.
  std::vector<NodePtr> children;
  SourceSpan span;
  bool has_x = false;  ///< subtree mentions some coordinate
  bool has_v = false;  ///< subtree mentions the uncertainty symbol
};

// Node factories. Flags are derived from the children.
NodePtr make_constant(double c, SourceSpan span = {});
NodePtr make_coordinate(int index, SourceSpan span = {});
NodePtr make_uncertainty(SourceSpan span = {});
NodePtr make_sum(std::vector<NodePtr> children, SourceSpan span = {});
NodePtr make_product(std::vector<NodePtr> children, SourceSpan span = {});
NodePtr make_power(NodePtr base, int exponent, SourceSpan span = {});
NodePtr make_reciprocal(NodePtr child, SourceSpan span = {});
NodePtr make_sqrt(NodePtr child, SourceSpan span = {});
NodePtr make_abs(NodePtr child, SourceSpan span = {});
NodePtr make_max(std::vector<NodePtr> children, SourceSpan span = {});

/// An immutable expression tree bound to a decision-space dimension.
class Expr {
 public:
  Expr(NodePtr root, std::size_t dim);

  const Node& root() const { return *root_; }
  const NodePtr& root_ptr() const { return root_; }
  std::size_t dim() const { return dim_; }
  bool has_uncertainty() const { return root_->has_v; }

 private:
  NodePtr root_;
  std::size_t dim_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Division by zero, square root of a negative number, etc.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a classical gradient is requested at an active kink.
class NonsmoothError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing or superfluous uncertainty value.
class UncertaintyArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parses the expression grammar: x1..xd, v, + - * / ^, abs(), sqrt(), max(...),
/// decimal literals. A quotient of two literals folds into one constant.
Expr parse_expr(std::string_view text, std::size_t dim);

/// Parses and evaluates an expression with no variables, e.g. "sqrt(2)/4".
double parse_constant(std::string_view text);

/// Canonical textual form; parse_expr(print(e)) reproduces e structurally.
std::string print(const Expr& e);
std::string print(const Node& n);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double x);

bool structurally_equal(const Node& a, const Node& b);

/// Strict evaluation: v must be supplied iff the expression mentions it.
double eval(const Expr& e, std::span<const double> x, std::optional<double> v = std::nullopt);

/// Evaluation that ignores a superfluous v.
double eval_node(const Node& n, std::span<const double> x, std::optional<double> v);

/// Classical gradient with respect to x. Throws NonsmoothError when an abs or max
/// atom whose argument depends on x is active within kink_tol.
Vec smooth_gradient(const Expr& e, std::span<const double> x,
                    std::optional<double> v = std::nullopt, double kink_tol = 1e-9);

/// d/dv at (x, v); throws NonsmoothError at kinks whose argument depends on v.
double partial_v(const Expr& e, std::span<const double> x, double v, double kink_tol = 1e-9);

struct KinkAtom {
  NodeKind kind = NodeKind::Abs;  ///< Abs or Max
  std::string text;               ///< atom text, e.g. "abs(x1)"
  SourceSpan span;
  int active_branches = 0;  ///< 1 for abs, number of tied branches for max
  bool depends_on_x = false;
  bool depends_on_v = false;
};

/// Every abs atom whose argument is within tol of zero and every max atom with at
/// least two branches within tol of the maximum, in depth-first order.
std::vector<KinkAtom> active_kinks(const Expr& e, std::span<const double> x,
                                   std::optional<double> v, double tol);

/// Postfix program for repeated evaluation in hot loops.
class Program {
 public:
  static Program compile(const Node& root);
  /// Folds every v-free subtree at the given x; the result only reads v.
  static Program specialize(const Node& root, std::span<const double> x);

  double run(std::span<const double> x, double v) const;
  bool reads_v() const { return reads_v_; }

 private:
  enum class Op : unsigned char { Const, X, V, Add, Mul, Pow, Recip, Sqrt, Abs, Max };
  struct Instr {
    Op op;
    int arg;  ///< operand count, coordinate or exponent
    double c;
  };
  void emit(const Node& n, std::span<const double> fold_x, bool fold);

  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
  bool reads_v_ = false;
};

}  // namespace robustkkt
