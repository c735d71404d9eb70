#include "mkropina/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

namespace mkropina {

namespace {

bool is_ident_start(unsigned char c) { return std::isalpha(c) != 0 && c < 0x80; }
bool is_ident_char(unsigned char c) { return c < 0x80 && (std::isalnum(c) != 0 || c == '_'); }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::vector<Token> tokenize(std::string_view source) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = source.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(source[i]);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    const std::size_t start = i;
    auto single = [&](TokenKind k) {
      out.push_back({k, {start, start + 1}, 0.0, std::string(1, static_cast<char>(c))});
      ++i;
    };
    switch (c) {
      case '+': single(TokenKind::Plus); continue;
      case '-': single(TokenKind::Minus); continue;
      case '*': single(TokenKind::Star); continue;
      case '/': single(TokenKind::Slash); continue;
      case '^': single(TokenKind::Caret); continue;
      case '(': single(TokenKind::LParen); continue;
      case ')': single(TokenKind::RParen); continue;
      case ',': single(TokenKind::Comma); continue;
      default: break;
    }
    if (is_digit(c) || (c == '.' && i + 1 < n && is_digit(static_cast<unsigned char>(source[i + 1])))) {
      while (i < n && is_digit(static_cast<unsigned char>(source[i]))) ++i;
      if (i < n && source[i] == '.') {
        ++i;
        while (i < n && is_digit(static_cast<unsigned char>(source[i]))) ++i;
      }
      if (i < n && (source[i] == 'e' || source[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < n && (source[j] == '+' || source[j] == '-')) ++j;
        if (j < n && is_digit(static_cast<unsigned char>(source[j]))) {
          while (j < n && is_digit(static_cast<unsigned char>(source[j]))) ++j;
          i = j;
        } else {
          throw ParseError("malformed exponent in number literal", {start, j});
        }
      }
      std::string text(source.substr(start, i - start));
      const double value = std::strtod(text.c_str(), nullptr);
      if (!std::isfinite(value)) throw ParseError("number literal out of range", {start, i});
      out.push_back({TokenKind::Number, {start, i}, value, text});
      continue;
    }
    if (is_ident_start(c)) {
      while (i < n && is_ident_char(static_cast<unsigned char>(source[i]))) ++i;
      out.push_back({TokenKind::Identifier, {start, i}, 0.0, std::string(source.substr(start, i - start))});
      continue;
    }
    throw ParseError("illegal character", {start, start + 1});
  }
  out.push_back({TokenKind::End, {n, n}, 0.0, ""});
  return out;
}

namespace {

struct FunctionName {
  const char* name;
  UnaryOp op;
};

constexpr FunctionName kFunctions[] = {
    {"sin", UnaryOp::Sin}, {"cos", UnaryOp::Cos},   {"exp", UnaryOp::Exp},
    {"log", UnaryOp::Log}, {"sqrt", UnaryOp::Sqrt}, {"tanh", UnaryOp::Tanh},
};

const FunctionName* find_function(const std::string& name) {
  for (const auto& f : kFunctions) {
    if (name == f.name) return &f;
  }
  return nullptr;
}

const char* unary_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Log: return "log";
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Tanh: return "tanh";
  }
  return "?";
}

const char* binary_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Pow: return "^";
  }
  return "?";
}

constexpr int kPrefixMinusBp = 30;
constexpr int kMaxNesting = 500;

// Pratt parser over a token vector terminated by End.
class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : tokens_(tokens) {
    if (tokens_.empty() || tokens_.back().kind != TokenKind::End) {
      throw ParseError("token stream is not terminated", {0, 0});
    }
  }

  std::shared_ptr<const ExprNode> parse_all() {
    auto root = expression(0);
    const Token& t = peek();
    if (t.kind == TokenKind::RParen) throw ParseError("unbalanced parenthesis", t.span);
    if (t.kind != TokenKind::End) throw ParseError("unexpected trailing token '" + t.text + "'", t.span);
    return root;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (t.kind != TokenKind::End) ++pos_;
    return t;
  }

  static bool infix_power(TokenKind k, int& lbp, int& rbp, BinaryOp& op) {
    switch (k) {
      case TokenKind::Plus: lbp = 10; rbp = 11; op = BinaryOp::Add; return true;
      case TokenKind::Minus: lbp = 10; rbp = 11; op = BinaryOp::Sub; return true;
      case TokenKind::Star: lbp = 20; rbp = 21; op = BinaryOp::Mul; return true;
      case TokenKind::Slash: lbp = 20; rbp = 21; op = BinaryOp::Div; return true;
      case TokenKind::Caret: lbp = 40; rbp = 39; op = BinaryOp::Pow; return true;
      default: return false;
    }
  }

  std::shared_ptr<const ExprNode> expression(int min_bp) {
    struct Guard {
      int& level;
      explicit Guard(int& l) : level(l) { ++level; }
      ~Guard() { --level; }
    } guard(recursion_);
    if (recursion_ > kMaxNesting) throw ParseError("expression nested too deeply", peek().span);
    auto lhs = prefix();
    for (;;) {
      int lbp = 0;
      int rbp = 0;
      BinaryOp op{};
      if (!infix_power(peek().kind, lbp, rbp, op) || lbp < min_bp) break;
      next();
      auto rhs = expression(rbp);
      auto node = std::make_shared<ExprNode>();
      node->kind = NodeKind::Binary;
      node->binary = op;
      node->span = {lhs->span.start, rhs->span.end};
      node->lhs = std::move(lhs);
      node->rhs = std::move(rhs);
      lhs = std::move(node);
    }
    return lhs;
  }

  std::shared_ptr<const ExprNode> prefix() {
    const Token& t = next();
    switch (t.kind) {
      case TokenKind::Number: {
        auto node = std::make_shared<ExprNode>();
        node->kind = NodeKind::Constant;
        node->value = t.number;
        node->span = t.span;
        return node;
      }
      case TokenKind::Minus: {
        auto operand = expression(kPrefixMinusBp);
        auto node = std::make_shared<ExprNode>();
        node->kind = NodeKind::Unary;
        node->unary = UnaryOp::Neg;
        node->span = {t.span.start, operand->span.end};
        node->lhs = std::move(operand);
        return node;
      }
      case TokenKind::LParen: {
        ++depth_;
        auto inner = expression(0);
        const Token& close = next();
        if (close.kind != TokenKind::RParen) {
          if (close.kind == TokenKind::End) throw ParseError("unbalanced parenthesis", t.span);
          throw ParseError("expected ')' but found '" + close.text + "'", close.span);
        }
        --depth_;
        return inner;
      }
      case TokenKind::Identifier: {
        if (peek().kind == TokenKind::LParen) {
          const FunctionName* fn = find_function(t.text);
          if (!fn) throw ParseError("unknown function '" + t.text + "'", t.span);
          const Token& open = next();
          ++depth_;
          auto arg = expression(0);
          const Token& close = next();
          if (close.kind != TokenKind::RParen) {
            if (close.kind == TokenKind::End) throw ParseError("unbalanced parenthesis", open.span);
            throw ParseError("function '" + t.text + "' takes exactly one argument", close.span);
          }
          --depth_;
          auto node = std::make_shared<ExprNode>();
          node->kind = NodeKind::Unary;
          node->unary = fn->op;
          node->span = {t.span.start, close.span.end};
          node->lhs = std::move(arg);
          return node;
        }
        if (find_function(t.text)) throw ParseError("function '" + t.text + "' requires an argument", t.span);
        auto node = std::make_shared<ExprNode>();
        node->kind = NodeKind::Variable;
        node->name = t.text;
        node->span = t.span;
        return node;
      }
      case TokenKind::End:
        if (depth_ > 0) throw ParseError("unbalanced parenthesis", t.span);
        throw ParseError("unexpected end of expression", t.span);
      case TokenKind::RParen: throw ParseError("unbalanced parenthesis", t.span);
      default: throw ParseError("unexpected token '" + t.text + "'", t.span);
    }
  }

  const std::vector<Token>& tokens_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  int recursion_ = 0;
};

void render_node(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Constant: {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", n.value);
      if (n.value < 0.0) {
        out += "(";
        out += buf;
        out += ")";
      } else {
        out += buf;
      }
      return;
    }
    case NodeKind::Variable: out += n.name; return;
    case NodeKind::Unary:
      if (n.unary == UnaryOp::Neg) {
        out += "(-";
        render_node(*n.lhs, out);
        out += ")";
      } else {
        out += unary_name(n.unary);
        out += "(";
        render_node(*n.lhs, out);
        out += ")";
      }
      return;
    case NodeKind::Binary:
      out += "(";
      render_node(*n.lhs, out);
      out += " ";
      out += binary_symbol(n.binary);
      out += " ";
      render_node(*n.rhs, out);
      out += ")";
      return;
  }
}

bool equal_nodes(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Constant: return a.value == b.value;
    case NodeKind::Variable: return a.name == b.name;
    case NodeKind::Unary: return a.unary == b.unary && equal_nodes(*a.lhs, *b.lhs);
    case NodeKind::Binary:
      return a.binary == b.binary && equal_nodes(*a.lhs, *b.lhs) && equal_nodes(*a.rhs, *b.rhs);
  }
  return false;
}

std::shared_ptr<const ExprNode> bind_node(const std::shared_ptr<const ExprNode>& n,
                                          std::span<const std::string> names) {
  auto copy = std::make_shared<ExprNode>(*n);
  switch (n->kind) {
    case NodeKind::Constant: break;
    case NodeKind::Variable: {
      copy->slot = -1;
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == n->name) {
          copy->slot = static_cast<int>(i);
          break;
        }
      }
      if (copy->slot < 0) throw ConfigError("expression uses undeclared coordinate '" + n->name + "'");
      break;
    }
    case NodeKind::Unary: copy->lhs = bind_node(n->lhs, names); break;
    case NodeKind::Binary:
      copy->lhs = bind_node(n->lhs, names);
      copy->rhs = bind_node(n->rhs, names);
      break;
  }
  return copy;
}

void collect_variables(const ExprNode& n, std::set<std::string>& out) {
  switch (n.kind) {
    case NodeKind::Constant: return;
    case NodeKind::Variable: out.insert(n.name); return;
    case NodeKind::Unary: collect_variables(*n.lhs, out); return;
    case NodeKind::Binary:
      collect_variables(*n.lhs, out);
      collect_variables(*n.rhs, out);
      return;
  }
}

}  // namespace

Expr Expr::constant(double v) {
  auto node = std::make_shared<ExprNode>();
  node->kind = NodeKind::Constant;
  node->value = v;
  return Expr(std::move(node));
}

Expr Expr::variable(std::string name) {
  auto node = std::make_shared<ExprNode>();
  node->kind = NodeKind::Variable;
  node->name = std::move(name);
  return Expr(std::move(node));
}

Expr Expr::unary(UnaryOp op, Expr operand) {
  auto node = std::make_shared<ExprNode>();
  node->kind = NodeKind::Unary;
  node->unary = op;
  node->lhs = std::move(operand.root_);
  return Expr(std::move(node));
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  auto node = std::make_shared<ExprNode>();
  node->kind = NodeKind::Binary;
  node->binary = op;
  node->lhs = std::move(lhs.root_);
  node->rhs = std::move(rhs.root_);
  return Expr(std::move(node));
}

Expr Expr::parse(std::string_view source) { return parse(tokenize(source)); }

Expr Expr::parse(const std::vector<Token>& tokens) {
  Parser parser(tokens);
  return Expr(parser.parse_all());
}

std::string Expr::render() const {
  std::string out;
  render_node(*root_, out);
  return out;
}

Expr Expr::bind(std::span<const std::string> names) const { return Expr(bind_node(root_, names)); }

bool Expr::uses(std::string_view name) const {
  std::set<std::string> vars;
  collect_variables(*root_, vars);
  return vars.count(std::string(name)) > 0;
}

std::vector<std::string> Expr::variables() const {
  std::set<std::string> vars;
  collect_variables(*root_, vars);
  return {vars.begin(), vars.end()};
}

bool operator==(const Expr& a, const Expr& b) { return equal_nodes(*a.root_, *b.root_); }

}  // namespace mkropina
