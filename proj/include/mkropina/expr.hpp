#pragma once

// Coordinate expressions: tokenizer, Pratt parser and an evaluator that is
// generic over the scalar ring (double, Jet, NestedJet).
//
// Grammar (binding power, high to low):
//   function application  sin cos exp log sqrt tanh
//   ^                     right associative
//   unary -               -u^2 parses as -(u^2), -a*b as (-a)*b
//   * /
//   + -

#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mkropina/errors.hpp"
#include "mkropina/jet.hpp"

namespace mkropina {

enum class TokenKind { Number, Identifier, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  TokenKind kind;
  SourceSpan span;
  double number = 0.0;
  std::string text;
};

std::vector<Token> tokenize(std::string_view source);

enum class NodeKind { Constant, Variable, Unary, Binary };
enum class UnaryOp { Neg, Sin, Cos, Exp, Log, Sqrt, Tanh };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct ExprNode {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;
  std::string name;
  int slot = -1;
  UnaryOp unary = UnaryOp::Neg;
  BinaryOp binary = BinaryOp::Add;
  std::shared_ptr<const ExprNode> lhs;
  std::shared_ptr<const ExprNode> rhs;
  SourceSpan span;
};

// Immutable expression tree. Copies share the tree.
class Expr {
 public:
  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double v);
  static Expr variable(std::string name);
  static Expr unary(UnaryOp op, Expr operand);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);

  // tokenize + parse. Throws ParseError with the offending span.
  static Expr parse(std::string_view source);
  static Expr parse(const std::vector<Token>& tokens);

  const ExprNode& node() const { return *root_; }

  // Fully parenthesized text that parses back to a structurally equal tree.
  std::string render() const;

  // Resolves variable names to positions in `names`. Throws ConfigError for
  // a variable that is not declared.
  Expr bind(std::span<const std::string> names) const;

  bool uses(std::string_view name) const;
  std::vector<std::string> variables() const;
  bool is_zero() const { return root_->kind == NodeKind::Constant && root_->value == 0.0; }

  friend bool operator==(const Expr& a, const Expr& b);

  // Evaluation on a bound expression; values[i] is the value of names[i].
  template <class S>
  S evaluate(std::span<const S> values) const;

  // Evaluation by name; throws ConfigError for an unbound variable.
  template <class S>
  S evaluate(const std::map<std::string, S>& bindings) const;

 private:
  explicit Expr(std::shared_ptr<const ExprNode> root) : root_(std::move(root)) {}
  std::shared_ptr<const ExprNode> root_;
};

// Parses an already tokenized expression.
inline Expr parse(const std::vector<Token>& tokens) { return Expr::parse(tokens); }

namespace detail {

inline double apply_unary(UnaryOp op, double x) {
  switch (op) {
    case UnaryOp::Neg: return -x;
    case UnaryOp::Sin: return std::sin(x);
    case UnaryOp::Cos: return std::cos(x);
    case UnaryOp::Exp: return std::exp(x);
    case UnaryOp::Log:
      if (x <= 0.0) throw DomainError("log of a non-positive value");
      return std::log(x);
    case UnaryOp::Sqrt:
      if (x < 0.0) throw DomainError("square root of a negative value");
      return std::sqrt(x);
    case UnaryOp::Tanh: return std::tanh(x);
  }
  return 0.0;
}

template <class T>
BasicJet<T> apply_unary(UnaryOp op, const BasicJet<T>& x) {
  switch (op) {
    case UnaryOp::Neg: return -x;
    case UnaryOp::Sin: return sin(x);
    case UnaryOp::Cos: return cos(x);
    case UnaryOp::Exp: return exp(x);
    case UnaryOp::Log: return log(x);
    case UnaryOp::Sqrt: return sqrt(x);
    case UnaryOp::Tanh: return tanh(x);
  }
  return x;
}

inline double checked_pow(double b, double e) {
  if (b < 0.0 && std::floor(e) != e) throw DomainError("non-integer power of a negative value");
  if (b == 0.0 && e < 0.0) throw DomainError("power is singular at zero");
  return std::pow(b, e);
}
template <class T>
BasicJet<T> checked_pow(const BasicJet<T>& b, const BasicJet<T>& e) {
  return pow(b, e);
}

inline double checked_div(double a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return a / b;
}
template <class T>
BasicJet<T> checked_div(const BasicJet<T>& a, const BasicJet<T>& b) {
  return a / b;
}

template <class S, class Lookup>
S eval_node(const ExprNode& n, const Lookup& lookup) {
  switch (n.kind) {
    case NodeKind::Constant: return S(n.value);
    case NodeKind::Variable: return lookup(n);
    case NodeKind::Unary: return apply_unary(n.unary, eval_node<S>(*n.lhs, lookup));
    case NodeKind::Binary: {
      S a = eval_node<S>(*n.lhs, lookup);
      S b = eval_node<S>(*n.rhs, lookup);
      switch (n.binary) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div: return checked_div(a, b);
        case BinaryOp::Pow: return checked_pow(a, b);
      }
    }
  }
  return S(0.0);
}

}  // namespace detail

template <class S>
S Expr::evaluate(std::span<const S> values) const {
  return detail::eval_node<S>(*root_, [&](const ExprNode& n) -> S {
    if (n.slot < 0 || static_cast<std::size_t>(n.slot) >= values.size()) {
      throw ConfigError("unbound variable '" + n.name + "'");
    }
    return values[static_cast<std::size_t>(n.slot)];
  });
}

template <class S>
S Expr::evaluate(const std::map<std::string, S>& bindings) const {
  return detail::eval_node<S>(*root_, [&](const ExprNode& n) -> S {
    auto it = bindings.find(n.name);
    if (it == bindings.end()) throw ConfigError("unbound variable '" + n.name + "'");
    return it->second;
  });
}

}  // namespace mkropina
