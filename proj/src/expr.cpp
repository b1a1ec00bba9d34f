#include "warpiso/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>

namespace warpiso::expr {

namespace {

std::string join_expected(const std::vector<std::string>& expected) {
  std::string out;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) out += ", ";
    out += expected[i];
  }
  return out;
}

}  // namespace

ParseError::ParseError(const std::string& what, std::size_t offset,
                       std::vector<std::string> expected)
    : Error(what + " at offset " + std::to_string(offset) +
            (expected.empty() ? "" : " (expected: " + join_expected(expected) + ")")),
      offset(offset),
      expected(std::move(expected)) {}

const char* func_name(Func f) {
  switch (f) {
    case Func::sqrt: return "sqrt";
    case Func::exp: return "exp";
    case Func::log: return "log";
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::tanh: return "tanh";
  }
  return "?";
}

namespace {

std::optional<Func> func_by_name(std::string_view name) {
  if (name == "sqrt") return Func::sqrt;
  if (name == "exp") return Func::exp;
  if (name == "log") return Func::log;
  if (name == "sin") return Func::sin;
  if (name == "cos") return Func::cos;
  if (name == "tanh") return Func::tanh;
  return std::nullopt;
}

double apply_func(Func f, double x) {
  switch (f) {
    case Func::sqrt:
      if (x < 0.0) throw EvalError("sqrt of negative argument");
      return std::sqrt(x);
    case Func::exp: return std::exp(x);
    case Func::log:
      if (x <= 0.0) throw EvalError("log of non-positive argument");
      return std::log(x);
    case Func::sin: return std::sin(x);
    case Func::cos: return std::cos(x);
    case Func::tanh: return std::tanh(x);
  }
  throw EvalError("unknown function");
}

double eval_node(const Node& n, double r, const Bindings& bindings) {
  switch (n.kind) {
    case NodeKind::constant: return n.value;
    case NodeKind::radius: return r;
    case NodeKind::parameter: {
      auto it = bindings.find(n.name);
      if (it == bindings.end()) throw EvalError("unbound parameter '" + n.name + "'");
      return it->second;
    }
    case NodeKind::negate: return -eval_node(*n.lhs, r, bindings);
    case NodeKind::add: return eval_node(*n.lhs, r, bindings) + eval_node(*n.rhs, r, bindings);
    case NodeKind::sub: return eval_node(*n.lhs, r, bindings) - eval_node(*n.rhs, r, bindings);
    case NodeKind::mul: return eval_node(*n.lhs, r, bindings) * eval_node(*n.rhs, r, bindings);
    case NodeKind::div: {
      const double a = eval_node(*n.lhs, r, bindings);
      const double b = eval_node(*n.rhs, r, bindings);
      if (b == 0.0) throw EvalError("division by zero");
      return a / b;
    }
    case NodeKind::pow: {
      const double base = eval_node(*n.lhs, r, bindings);
      const double expo = eval_node(*n.rhs, r, bindings);
      // `^` requires a constant exponent or a positive base.
      if (n.rhs->kind != NodeKind::constant && base <= 0.0) {
        throw EvalError("pow with non-constant exponent requires positive base");
      }
      const double v = std::pow(base, expo);
      if (!std::isfinite(v)) throw EvalError("pow produced a non-finite value");
      return v;
    }
    case NodeKind::call: return apply_func(n.func, eval_node(*n.lhs, r, bindings));
  }
  throw EvalError("malformed expression node");
}

}  // namespace

double Expression::evaluate(double r, const Bindings& bindings) const {
  if (!root_) throw EvalError("empty expression");
  const double v = eval_node(*root_, r, bindings);
  if (!std::isfinite(v)) throw EvalError("expression evaluated to a non-finite value");
  return v;
}

// ---------------------------------------------------------------------------
// Node construction with constant folding

NodePtr make_constant(double v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::constant;
  n->value = v;
  return n;
}

NodePtr make_radius() {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::radius;
  return n;
}

NodePtr make_parameter(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::parameter;
  n->name = std::move(name);
  return n;
}

NodePtr make_negate(NodePtr a) {
  if (a->kind == NodeKind::constant) return make_constant(-a->value);
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::negate;
  n->lhs = std::move(a);
  return n;
}

NodePtr make_binary(NodeKind op, NodePtr a, NodePtr b) {
  if (a->kind == NodeKind::constant && b->kind == NodeKind::constant) {
    double v = 0.0;
    bool ok = true;
    switch (op) {
      case NodeKind::add: v = a->value + b->value; break;
      case NodeKind::sub: v = a->value - b->value; break;
      case NodeKind::mul: v = a->value * b->value; break;
      case NodeKind::div:
        ok = b->value != 0.0;
        if (ok) v = a->value / b->value;
        break;
      case NodeKind::pow:
        v = std::pow(a->value, b->value);
        break;
      default: ok = false; break;
    }
    // Fold only finite results; otherwise keep the node so the error
    // surfaces at evaluation time.
    if (ok && std::isfinite(v)) return make_constant(v);
  }
  auto n = std::make_shared<Node>();
  n->kind = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

NodePtr make_call(Func f, NodePtr a) {
  if (a->kind == NodeKind::constant) {
    try {
      const double v = apply_func(f, a->value);
      if (std::isfinite(v)) return make_constant(v);
    } catch (const EvalError&) {
      // keep unfolded; evaluation reports the domain error
    }
  }
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::call;
  n->func = f;
  n->lhs = std::move(a);
  return n;
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

NodePtr diff(const NodePtr& n);

NodePtr diff_call(const Node& n) {
  const NodePtr& u = n.lhs;
  NodePtr du = diff(u);
  switch (n.func) {
    case Func::sqrt:
      // u' / (2 sqrt u)
      return make_binary(NodeKind::div, du,
                         make_binary(NodeKind::mul, make_constant(2.0),
                                     make_call(Func::sqrt, u)));
    case Func::exp:
      return make_binary(NodeKind::mul, make_call(Func::exp, u), du);
    case Func::log:
      return make_binary(NodeKind::div, du, u);
    case Func::sin:
      return make_binary(NodeKind::mul, make_call(Func::cos, u), du);
    case Func::cos:
      return make_negate(make_binary(NodeKind::mul, make_call(Func::sin, u), du));
    case Func::tanh:
      // (1 - tanh(u)^2) u'
      return make_binary(
          NodeKind::mul,
          make_binary(NodeKind::sub, make_constant(1.0),
                      make_binary(NodeKind::mul, make_call(Func::tanh, u),
                                  make_call(Func::tanh, u))),
          du);
  }
  throw EvalError("unknown function in derivative");
}

NodePtr diff(const NodePtr& n) {
  switch (n->kind) {
    case NodeKind::constant:
    case NodeKind::parameter:
      return make_constant(0.0);
    case NodeKind::radius:
      return make_constant(1.0);
    case NodeKind::negate:
      return make_negate(diff(n->lhs));
    case NodeKind::add:
      return make_binary(NodeKind::add, diff(n->lhs), diff(n->rhs));
    case NodeKind::sub:
      return make_binary(NodeKind::sub, diff(n->lhs), diff(n->rhs));
    case NodeKind::mul:
      return make_binary(NodeKind::add,
                         make_binary(NodeKind::mul, diff(n->lhs), n->rhs),
                         make_binary(NodeKind::mul, n->lhs, diff(n->rhs)));
    case NodeKind::div:
      // (u'v - uv') / (v*v)
      return make_binary(
          NodeKind::div,
          make_binary(NodeKind::sub,
                      make_binary(NodeKind::mul, diff(n->lhs), n->rhs),
                      make_binary(NodeKind::mul, n->lhs, diff(n->rhs))),
          make_binary(NodeKind::mul, n->rhs, n->rhs));
    case NodeKind::pow: {
      const NodePtr& u = n->lhs;
      const NodePtr& v = n->rhs;
      if (v->kind == NodeKind::constant) {
        // c u^(c-1) u'
        return make_binary(
            NodeKind::mul, make_constant(v->value),
            make_binary(NodeKind::mul,
                        make_binary(NodeKind::pow, u, make_constant(v->value - 1.0)),
                        diff(u)));
      }
      // u^v (v' log u + v u'/u); evaluation errors on non-positive u
      NodePtr term1 = make_binary(NodeKind::mul, diff(v), make_call(Func::log, u));
      NodePtr term2 = make_binary(NodeKind::mul, v, make_binary(NodeKind::div, diff(u), u));
      return make_binary(NodeKind::mul, make_binary(NodeKind::pow, u, v),
                         make_binary(NodeKind::add, term1, term2));
    }
    case NodeKind::call:
      return diff_call(*n);
  }
  throw EvalError("malformed expression node");
}

}  // namespace

Expression Expression::derivative() const {
  if (!root_) throw EvalError("empty expression");
  return Expression(diff(root_));
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Precedence levels for minimal parenthesization; higher binds tighter.
int precedence(const Node& n) {
  switch (n.kind) {
    case NodeKind::add:
    case NodeKind::sub: return 1;
    case NodeKind::mul:
    case NodeKind::div: return 2;
    case NodeKind::negate: return 3;
    case NodeKind::pow: return 4;
    default: return 5;
  }
}

void print_node(const Node& n, std::string& out);

void print_child(const Node& child, int parent_prec, bool is_right,
                 bool parent_right_assoc, std::string& out) {
  const int cp = precedence(child);
  bool need_paren = cp < parent_prec;
  if (cp == parent_prec) {
    // left-assoc operators need parens on an equal-precedence right child,
    // `^` (right-assoc) on an equal-precedence left child
    need_paren = parent_right_assoc ? !is_right : is_right;
  }
  if (need_paren) out += '(';
  print_node(child, out);
  if (need_paren) out += ')';
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::constant: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", n.value);
      out += buf;
      return;
    }
    case NodeKind::radius: out += 'r'; return;
    case NodeKind::parameter: out += n.name; return;
    case NodeKind::negate:
      out += '-';
      print_child(*n.lhs, precedence(n), true, true, out);
      return;
    case NodeKind::add:
    case NodeKind::sub:
    case NodeKind::mul:
    case NodeKind::div:
    case NodeKind::pow: {
      const char op = n.kind == NodeKind::add   ? '+'
                      : n.kind == NodeKind::sub ? '-'
                      : n.kind == NodeKind::mul ? '*'
                      : n.kind == NodeKind::div ? '/'
                                                : '^';
      const bool right_assoc = n.kind == NodeKind::pow;
      print_child(*n.lhs, precedence(n), false, right_assoc, out);
      out += op;
      print_child(*n.rhs, precedence(n), true, right_assoc, out);
      return;
    }
    case NodeKind::call:
      out += func_name(n.func);
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      return;
  }
}

}  // namespace

std::string Expression::to_string() const {
  if (!root_) return "";
  std::string out;
  print_node(*root_, out);
  return out;
}

bool Expression::structurally_equal(const Expression& other) const {
  struct Cmp {
    static bool eq(const NodePtr& a, const NodePtr& b) {
      if (!a || !b) return a == b;
      if (a->kind != b->kind) return false;
      switch (a->kind) {
        case NodeKind::constant:
          // bit-level comparison; printing uses %.17g so round-trips are exact
          return a->value == b->value ||
                 (std::isnan(a->value) && std::isnan(b->value));
        case NodeKind::radius: return true;
        case NodeKind::parameter: return a->name == b->name;
        case NodeKind::call:
          return a->func == b->func && eq(a->lhs, b->lhs);
        case NodeKind::negate: return eq(a->lhs, b->lhs);
        default: return eq(a->lhs, b->lhs) && eq(a->rhs, b->rhs);
      }
    }
  };
  return Cmp::eq(root_, other.root_);
}

std::vector<std::string> Expression::parameters() const {
  std::set<std::string> names;
  struct Walk {
    static void go(const NodePtr& n, std::set<std::string>& names) {
      if (!n) return;
      if (n->kind == NodeKind::parameter) names.insert(n->name);
      go(n->lhs, names);
      go(n->rhs, names);
    }
  };
  Walk::go(root_, names);
  return {names.begin(), names.end()};
}

bool Expression::is_constant() const {
  return root_ && root_->kind == NodeKind::constant;
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over a token stream

namespace {

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };

struct Token {
  Tok kind = Tok::end;
  std::size_t offset = 0;
  std::size_t length = 0;
  double number = 0.0;
  std::string_view text = {};
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
            text_[pos_] == '\r')) {
      ++pos_;
    }
    if (pos_ >= text_.size()) return {Tok::end, text_.size()};
    const std::size_t start = pos_;
    const char c = text_[pos_];
    if (static_cast<unsigned char>(c) > 0x7f) {
      throw ParseError("non-ASCII byte", start, {"ASCII character"});
    }
    switch (c) {
      case '+': ++pos_; return {Tok::plus, start, 1};
      case '-': ++pos_; return {Tok::minus, start, 1};
      case '*': ++pos_; return {Tok::star, start, 1};
      case '/': ++pos_; return {Tok::slash, start, 1};
      case '^': ++pos_; return {Tok::caret, start, 1};
      case '(': ++pos_; return {Tok::lparen, start, 1};
      case ')': ++pos_; return {Tok::rparen, start, 1};
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return lex_number(start);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) {
        ++end;
      }
      Token t{Tok::ident, start, end - start};
      t.text = text_.substr(start, end - start);
      pos_ = end;
      return t;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", start,
                     {"number", "identifier", "operator", "'('", "')'"});
  }

 private:
  Token lex_number(std::size_t start) {
    std::size_t end = pos_;
    while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
    if (end < text_.size() && text_[end] == '.') {
      ++end;
      while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
    }
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t exp_start = end + 1;
      if (exp_start < text_.size() && (text_[exp_start] == '+' || text_[exp_start] == '-')) {
        ++exp_start;
      }
      if (exp_start < text_.size() && std::isdigit(static_cast<unsigned char>(text_[exp_start]))) {
        end = exp_start;
        while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end]))) ++end;
      }
    }
    double value = 0.0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + end, value);
    if (res.ec != std::errc{} || res.ptr != text_.data() + end) {
      throw ParseError("malformed number literal", start, {"number"});
    }
    Token t{Tok::number, start, end - start};
    t.number = value;
    pos_ = end;
    return t;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { advance(); }

  Expression run() {
    if (cur_.kind == Tok::end) {
      throw ParseError("empty input", 0,
                       {"number", "identifier", "function", "'('", "'-'"});
    }
    NodePtr e = parse_sum();
    if (cur_.kind != Tok::end) {
      if (cur_.kind == Tok::rparen) {
        throw ParseError("unbalanced ')'", cur_.offset, {"operator", "end of input"});
      }
      throw ParseError("trailing input", cur_.offset, {"operator", "end of input"});
    }
    return Expression(std::move(e));
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  NodePtr parse_sum() {
    NodePtr lhs = parse_term();
    while (cur_.kind == Tok::plus || cur_.kind == Tok::minus) {
      const NodeKind op = cur_.kind == Tok::plus ? NodeKind::add : NodeKind::sub;
      advance();
      lhs = make_binary(op, std::move(lhs), parse_term());
    }
    return lhs;
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    while (cur_.kind == Tok::star || cur_.kind == Tok::slash) {
      const NodeKind op = cur_.kind == Tok::star ? NodeKind::mul : NodeKind::div;
      advance();
      lhs = make_binary(op, std::move(lhs), parse_unary());
    }
    return lhs;
  }

  NodePtr parse_unary() {
    if (cur_.kind == Tok::minus) {
      advance();
      return make_negate(parse_unary());
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (cur_.kind == Tok::caret) {
      advance();
      // right-associative; exponent may carry a unary minus
      return make_binary(NodeKind::pow, std::move(base), parse_unary());
    }
    return base;
  }

  NodePtr parse_primary() {
    switch (cur_.kind) {
      case Tok::number: {
        const double v = cur_.number;
        advance();
        return make_constant(v);
      }
      case Tok::lparen: {
        const std::size_t open = cur_.offset;
        advance();
        NodePtr e = parse_sum();
        if (cur_.kind != Tok::rparen) {
          throw ParseError("unbalanced '(' opened at offset " + std::to_string(open),
                           cur_.offset, {"')'", "operator"});
        }
        advance();
        return e;
      }
      case Tok::ident: {
        const Token ident = cur_;
        advance();
        if (cur_.kind == Tok::lparen) {
          const auto f = func_by_name(ident.text);
          if (!f) {
            throw ParseError("unknown function name '" + std::string(ident.text) + "'",
                             ident.offset, {"sqrt", "exp", "log", "sin", "cos", "tanh"});
          }
          advance();
          NodePtr arg = parse_sum();
          if (cur_.kind != Tok::rparen) {
            throw ParseError("unbalanced '(' in call to " + std::string(ident.text),
                             cur_.offset, {"')'", "operator"});
          }
          advance();
          return make_call(*f, std::move(arg));
        }
        if (ident.text == "r") return make_radius();
        if (func_by_name(ident.text)) {
          throw ParseError("function '" + std::string(ident.text) + "' requires arguments",
                           ident.offset, {"'('"});
        }
        return make_parameter(std::string(ident.text));
      }
      default:
        throw ParseError(cur_.kind == Tok::end ? "unexpected end of input"
                                               : "expected an operand",
                         cur_.offset,
                         {"number", "identifier", "function", "'('", "'-'"});
    }
  }

  Lexer lexer_;
  Token cur_{Tok::end, 0};
};

}  // namespace

Expression parse(std::string_view text) {
  return Parser(text).run();
}

}  // namespace warpiso::expr
