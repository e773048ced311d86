#ifndef PERISOLVE_EXPR_HPP
#define PERISOLVE_EXPR_HPP

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "perisolve/errors.hpp"

namespace perisolve::expr {

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Func { Sin, Cos, Exp, Abs, Log, Sqrt };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Immutable expression tree. Grammar accepted by parse():
///
///   expr    := term (('+'|'-') term)*
///   term    := factor (('*'|'/') factor)*
///   factor  := '-' factor | power
///   power   := primary ('^' factor)?            // right-associative
///   primary := number | 't' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
///
/// '^' binds tighter than unary minus, so -t^2 parses as -(t^2).
struct Node {
  struct Constant {
    double value;
  };
  struct Time {};
  struct Negate {
    NodePtr child;
  };
  struct Binary {
    BinaryOp op;
    NodePtr lhs;
    NodePtr rhs;
  };
  struct Call {
    Func fn;
    NodePtr arg;
  };

  std::variant<Constant, Time, Negate, Binary, Call> v;
};

/// Parses the source text into an expression tree. Throws ParseError with the
/// byte offset of the first offending token.
NodePtr parse(std::string_view source);

/// Evaluates the tree at time t. Domain violations and non-finite
/// intermediates raise EvalError; the result is always finite.
double eval(const Node& node, double t);

/// Fully parenthesised rendering; parse(to_string(n)) reproduces n.
std::string to_string(const Node& node);

bool structurally_equal(const Node& a, const Node& b);

struct PeriodicityCheck {
  bool periodic = false;
  double max_discrepancy = 0.0;
  double worst_t = 0.0;
};

/// Samples |f(t+omega) - f(t)| at `samples` uniform points of [0, omega) and
/// accepts when the maximum stays below 1e-9 * (1 + |f(t)|).
PeriodicityCheck check_periodicity(const Node& node, double omega, int samples);

namespace detail {
// Flat postfix program for fast repeated evaluation of one tree.
struct Instr {
  enum class Op : unsigned char {
    PushConst,
    PushTime,
    Negate,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Sin,
    Cos,
    Exp,
    Abs,
    Log,
    Sqrt
  };
  Op op;
  double imm = 0.0;
};
using Tape = std::vector<Instr>;
Tape compile(const Node& node);
double run(const Tape& tape, double t);
}  // namespace detail

/// A parsed coefficient that all share the model period. Immutable and safe
/// to evaluate concurrently. Constant expressions are folded at construction.
class PeriodicExpr {
 public:
  PeriodicExpr() = default;
  PeriodicExpr(NodePtr ast, double period, std::string source);

  /// Convenience: parse + wrap.
  static PeriodicExpr parse(std::string_view source, double period);

  double operator()(double t) const {
    if (constant_) return constant_value_;
    if (!tape_.empty()) return detail::run(tape_, t);
    return eval(*ast_, t);  // pathological nesting depth, rare
  }

  bool is_constant() const { return constant_; }
  double period() const { return period_; }
  const std::string& source() const { return source_; }
  const NodePtr& ast() const { return ast_; }
  bool empty() const { return ast_ == nullptr; }

 private:
  NodePtr ast_;
  detail::Tape tape_;
  double period_ = 0.0;
  std::string source_;
  bool constant_ = false;
  double constant_value_ = 0.0;
};

}  // namespace perisolve::expr

#endif
