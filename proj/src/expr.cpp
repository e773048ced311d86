#include "perisolve/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace perisolve::expr {

namespace {

struct Token {
  enum class Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
  Kind kind;
  double value = 0.0;
  std::string text;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::size_t at = pos_;
    if (pos_ >= src_.size()) return {Token::Kind::End, 0.0, "", at};
    const char c = src_[pos_];
    switch (c) {
      case '+': ++pos_; return {Token::Kind::Plus, 0.0, "+", at};
      case '-': ++pos_; return {Token::Kind::Minus, 0.0, "-", at};
      case '*': ++pos_; return {Token::Kind::Star, 0.0, "*", at};
      case '/': ++pos_; return {Token::Kind::Slash, 0.0, "/", at};
      case '^': ++pos_; return {Token::Kind::Caret, 0.0, "^", at};
      case '(': ++pos_; return {Token::Kind::LParen, 0.0, "(", at};
      case ')': ++pos_; return {Token::Kind::RParen, 0.0, ")", at};
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return lex_number(at);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
        ++end;
      Token t{Token::Kind::Ident, 0.0, std::string(src_.substr(pos_, end - pos_)), at};
      pos_ = end;
      return t;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", at);
  }

 private:
  Token lex_number(std::size_t at) {
    std::size_t end = pos_;
    while (end < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.'))
      ++end;
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t exp = end + 1;
      if (exp < src_.size() && (src_[exp] == '+' || src_[exp] == '-')) ++exp;
      if (exp < src_.size() && std::isdigit(static_cast<unsigned char>(src_[exp]))) {
        ++exp;
        while (exp < src_.size() && std::isdigit(static_cast<unsigned char>(src_[exp]))) ++exp;
        end = exp;
      }
    }
    const std::string text(src_.substr(pos_, end - pos_));
    char* tail = nullptr;
    const double value = std::strtod(text.c_str(), &tail);
    if (tail == text.c_str() || *tail != '\0')
      throw ParseError("malformed number literal '" + text + "'", at);
    pos_ = end;
    return {Token::Kind::Number, value, text, at};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { advance(); }

  NodePtr parse_all() {
    NodePtr e = parse_expr();
    if (cur_.kind != Token::Kind::End)
      throw ParseError("unexpected trailing input '" + cur_.text + "'", cur_.offset);
    return e;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    while (cur_.kind == Token::Kind::Plus || cur_.kind == Token::Kind::Minus) {
      const BinaryOp op = cur_.kind == Token::Kind::Plus ? BinaryOp::Add : BinaryOp::Sub;
      advance();
      NodePtr rhs = parse_term();
      lhs = std::make_shared<Node>(Node{Node::Binary{op, std::move(lhs), std::move(rhs)}});
    }
    return lhs;
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    while (cur_.kind == Token::Kind::Star || cur_.kind == Token::Kind::Slash) {
      const BinaryOp op = cur_.kind == Token::Kind::Star ? BinaryOp::Mul : BinaryOp::Div;
      advance();
      NodePtr rhs = parse_factor();
      lhs = std::make_shared<Node>(Node{Node::Binary{op, std::move(lhs), std::move(rhs)}});
    }
    return lhs;
  }

  NodePtr parse_factor() {
    if (cur_.kind == Token::Kind::Minus) {
      advance();
      NodePtr child = parse_factor();
      // fold signed literals so -3.5 is a constant, not a negation node
      if (const auto* constant = std::get_if<Node::Constant>(&child->v))
        return std::make_shared<Node>(Node{Node::Constant{-constant->value}});
      return std::make_shared<Node>(Node{Node::Negate{std::move(child)}});
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (cur_.kind == Token::Kind::Caret) {
      advance();
      NodePtr exponent = parse_factor();  // right-associative, signed exponents allowed
      return std::make_shared<Node>(
          Node{Node::Binary{BinaryOp::Pow, std::move(base), std::move(exponent)}});
    }
    return base;
  }

  NodePtr parse_primary() {
    switch (cur_.kind) {
      case Token::Kind::Number: {
        const double v = cur_.value;
        advance();
        return std::make_shared<Node>(Node{Node::Constant{v}});
      }
      case Token::Kind::LParen: {
        advance();
        NodePtr inner = parse_expr();
        expect_rparen();
        return inner;
      }
      case Token::Kind::Ident:
        return parse_ident();
      case Token::Kind::End:
        throw ParseError("expected expression, found end of input", cur_.offset);
      default:
        throw ParseError("expected expression, found '" + cur_.text + "'", cur_.offset);
    }
  }

  NodePtr parse_ident() {
    const Token ident = cur_;
    advance();
    if (cur_.kind == Token::Kind::LParen) {
      Func fn;
      if (ident.text == "sin") fn = Func::Sin;
      else if (ident.text == "cos") fn = Func::Cos;
      else if (ident.text == "exp") fn = Func::Exp;
      else if (ident.text == "abs") fn = Func::Abs;
      else if (ident.text == "log") fn = Func::Log;
      else if (ident.text == "sqrt") fn = Func::Sqrt;
      else throw ParseError("unknown function '" + ident.text + "'", ident.offset);
      advance();
      NodePtr arg = parse_expr();
      expect_rparen();
      return std::make_shared<Node>(Node{Node::Call{fn, std::move(arg)}});
    }
    if (ident.text == "t") return std::make_shared<Node>(Node{Node::Time{}});
    if (ident.text == "pi") return std::make_shared<Node>(Node{Node::Constant{M_PI}});
    if (ident.text == "e") return std::make_shared<Node>(Node{Node::Constant{M_E}});
    throw ParseError("unknown identifier '" + ident.text + "'", ident.offset);
  }

  void expect_rparen() {
    if (cur_.kind != Token::Kind::RParen)
      throw ParseError(cur_.kind == Token::Kind::End
                           ? std::string("expected ')', found end of input")
                           : "expected ')', found '" + cur_.text + "'",
                       cur_.offset);
    advance();
  }

  Lexer lexer_;
  Token cur_;
};

double checked(double value, const char* what) {
  if (!std::isfinite(value))
    throw EvalError(std::string("non-finite value in ") + what);
  return value;
}

double eval_pow(double base, double exponent) {
  if (base == 0.0 && exponent < 0.0) throw EvalError("0 raised to a negative power");
  if (base < 0.0 && exponent != std::floor(exponent))
    throw EvalError("negative base raised to a non-integer power");
  return checked(std::pow(base, exponent), "power");
}

const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Abs: return "abs";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
  }
  return "?";
}

bool mentions_time(const Node& node) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Node::Time>) return true;
        else if constexpr (std::is_same_v<T, Node::Constant>) return false;
        else if constexpr (std::is_same_v<T, Node::Negate>) return mentions_time(*n.child);
        else if constexpr (std::is_same_v<T, Node::Binary>)
          return mentions_time(*n.lhs) || mentions_time(*n.rhs);
        else return mentions_time(*n.arg);
      },
      node.v);
}

}  // namespace

NodePtr parse(std::string_view source) {
  if (source.empty()) throw ParseError("empty expression", 0);
  return Parser(source).parse_all();
}

double eval(const Node& node, double t) {
  return std::visit(
      [t](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Node::Constant>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, Node::Time>) {
          return t;
        } else if constexpr (std::is_same_v<T, Node::Negate>) {
          return -eval(*n.child, t);
        } else if constexpr (std::is_same_v<T, Node::Binary>) {
          const double a = eval(*n.lhs, t);
          const double b = eval(*n.rhs, t);
          switch (n.op) {
            case BinaryOp::Add: return checked(a + b, "addition");
            case BinaryOp::Sub: return checked(a - b, "subtraction");
            case BinaryOp::Mul: return checked(a * b, "multiplication");
            case BinaryOp::Div:
              if (b == 0.0) throw EvalError("division by zero");
              return checked(a / b, "division");
            case BinaryOp::Pow: return eval_pow(a, b);
          }
          throw EvalError("corrupt operator");
        } else {  // Call
          const double a = eval(*n.arg, t);
          switch (n.fn) {
            case Func::Sin: return std::sin(a);
            case Func::Cos: return std::cos(a);
            case Func::Exp: return checked(std::exp(a), "exp");
            case Func::Abs: return std::abs(a);
            case Func::Log:
              if (a <= 0.0) throw EvalError("log of non-positive value");
              return std::log(a);
            case Func::Sqrt:
              if (a < 0.0) throw EvalError("sqrt of negative value");
              return std::sqrt(a);
          }
          throw EvalError("corrupt function");
        }
      },
      node.v);
}

std::string to_string(const Node& node) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Node::Constant>) {
          std::ostringstream os;
          os.precision(17);
          os << n.value;
          // parenthesize negative literals: ^ binds tighter than unary minus
          if (n.value < 0.0) return "(" + os.str() + ")";
          return os.str();
        } else if constexpr (std::is_same_v<T, Node::Time>) {
          return "t";
        } else if constexpr (std::is_same_v<T, Node::Negate>) {
          return "(-" + to_string(*n.child) + ")";
        } else if constexpr (std::is_same_v<T, Node::Binary>) {
          const char* op = "";
          switch (n.op) {
            case BinaryOp::Add: op = "+"; break;
            case BinaryOp::Sub: op = "-"; break;
            case BinaryOp::Mul: op = "*"; break;
            case BinaryOp::Div: op = "/"; break;
            case BinaryOp::Pow: op = "^"; break;
          }
          return "(" + to_string(*n.lhs) + op + to_string(*n.rhs) + ")";
        } else {
          return std::string(func_name(n.fn)) + "(" + to_string(*n.arg) + ")";
        }
      },
      node.v);
}

bool structurally_equal(const Node& a, const Node& b) {
  if (a.v.index() != b.v.index()) return false;
  if (const auto* ca = std::get_if<Node::Constant>(&a.v))
    return ca->value == std::get<Node::Constant>(b.v).value;
  if (std::holds_alternative<Node::Time>(a.v)) return true;
  if (const auto* na = std::get_if<Node::Negate>(&a.v))
    return structurally_equal(*na->child, *std::get<Node::Negate>(b.v).child);
  if (const auto* ba = std::get_if<Node::Binary>(&a.v)) {
    const auto& bb = std::get<Node::Binary>(b.v);
    return ba->op == bb.op && structurally_equal(*ba->lhs, *bb.lhs) &&
           structurally_equal(*ba->rhs, *bb.rhs);
  }
  const auto& fa = std::get<Node::Call>(a.v);
  const auto& fb = std::get<Node::Call>(b.v);
  return fa.fn == fb.fn && structurally_equal(*fa.arg, *fb.arg);
}

PeriodicityCheck check_periodicity(const Node& node, double omega, int samples) {
  if (omega <= 0.0) throw Error("periodicity check requires omega > 0");
  if (samples < 16) throw Error("periodicity check requires at least 16 samples");
  PeriodicityCheck result;
  result.periodic = true;
  for (int j = 0; j < samples; ++j) {
    const double t = omega * j / samples;
    const double f0 = eval(node, t);
    const double f1 = eval(node, t + omega);
    const double gap = std::abs(f1 - f0);
    if (gap > result.max_discrepancy) {
      result.max_discrepancy = gap;
      result.worst_t = t;
    }
    if (gap > 1e-9 * (1.0 + std::abs(f0))) result.periodic = false;
  }
  return result;
}

namespace detail {

namespace {
void compile_into(const Node& node, Tape& tape) {
  std::visit(
      [&tape](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Node::Constant>) {
          tape.push_back({Instr::Op::PushConst, n.value});
        } else if constexpr (std::is_same_v<T, Node::Time>) {
          tape.push_back({Instr::Op::PushTime});
        } else if constexpr (std::is_same_v<T, Node::Negate>) {
          compile_into(*n.child, tape);
          tape.push_back({Instr::Op::Negate});
        } else if constexpr (std::is_same_v<T, Node::Binary>) {
          compile_into(*n.lhs, tape);
          compile_into(*n.rhs, tape);
          switch (n.op) {
            case BinaryOp::Add: tape.push_back({Instr::Op::Add}); break;
            case BinaryOp::Sub: tape.push_back({Instr::Op::Sub}); break;
            case BinaryOp::Mul: tape.push_back({Instr::Op::Mul}); break;
            case BinaryOp::Div: tape.push_back({Instr::Op::Div}); break;
            case BinaryOp::Pow: tape.push_back({Instr::Op::Pow}); break;
          }
        } else {
          compile_into(*n.arg, tape);
          switch (n.fn) {
            case Func::Sin: tape.push_back({Instr::Op::Sin}); break;
            case Func::Cos: tape.push_back({Instr::Op::Cos}); break;
            case Func::Exp: tape.push_back({Instr::Op::Exp}); break;
            case Func::Abs: tape.push_back({Instr::Op::Abs}); break;
            case Func::Log: tape.push_back({Instr::Op::Log}); break;
            case Func::Sqrt: tape.push_back({Instr::Op::Sqrt}); break;
          }
        }
      },
      node.v);
}
}  // namespace

Tape compile(const Node& node) {
  Tape tape;
  compile_into(node, tape);
  return tape;
}

double run(const Tape& tape, double t) {
  double stack[64];
  int top = -1;
  for (const Instr& ins : tape) {
    switch (ins.op) {
      case Instr::Op::PushConst: stack[++top] = ins.imm; break;
      case Instr::Op::PushTime: stack[++top] = t; break;
      case Instr::Op::Negate: stack[top] = -stack[top]; break;
      case Instr::Op::Add: --top; stack[top] += stack[top + 1]; break;
      case Instr::Op::Sub: --top; stack[top] -= stack[top + 1]; break;
      case Instr::Op::Mul: --top; stack[top] *= stack[top + 1]; break;
      case Instr::Op::Div:
        --top;
        if (stack[top + 1] == 0.0) throw EvalError("division by zero");
        stack[top] /= stack[top + 1];
        break;
      case Instr::Op::Pow:
        --top;
        stack[top] = eval_pow(stack[top], stack[top + 1]);
        break;
      case Instr::Op::Sin: stack[top] = std::sin(stack[top]); break;
      case Instr::Op::Cos: stack[top] = std::cos(stack[top]); break;
      case Instr::Op::Exp:
        stack[top] = checked(std::exp(stack[top]), "exp");
        break;
      case Instr::Op::Abs: stack[top] = std::abs(stack[top]); break;
      case Instr::Op::Log:
        if (stack[top] <= 0.0) throw EvalError("log of non-positive value");
        stack[top] = std::log(stack[top]);
        break;
      case Instr::Op::Sqrt:
        if (stack[top] < 0.0) throw EvalError("sqrt of negative value");
        stack[top] = std::sqrt(stack[top]);
        break;
    }
    if (!std::isfinite(stack[top])) throw EvalError("non-finite intermediate value");
  }
  return stack[0];
}

}  // namespace detail

PeriodicExpr::PeriodicExpr(NodePtr ast, double period, std::string source)
    : ast_(std::move(ast)), period_(period), source_(std::move(source)) {
  if (!ast_) throw Error("PeriodicExpr requires a parsed expression");
  if (!mentions_time(*ast_)) {
    constant_ = true;
    constant_value_ = eval(*ast_, 0.0);
  } else {
    detail::Tape tape = detail::compile(*ast_);
    int depth = 0, peak = 0;
    for (const auto& ins : tape) {
      using Op = detail::Instr::Op;
      if (ins.op == Op::PushConst || ins.op == Op::PushTime) ++depth;
      else if (ins.op == Op::Add || ins.op == Op::Sub || ins.op == Op::Mul ||
               ins.op == Op::Div || ins.op == Op::Pow)
        --depth;
      peak = std::max(peak, depth);
    }
    if (peak < 60) tape_ = std::move(tape);
  }
}

PeriodicExpr PeriodicExpr::parse(std::string_view source, double period) {
  return PeriodicExpr(expr::parse(source), period, std::string(source));
}

}  // namespace perisolve::expr
