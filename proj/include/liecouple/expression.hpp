#pragma once

// Scalar expressions over chart coordinates x1..xn, used by configuration
// files for chart maps, transition functions and connection forms.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' ['-'] INTEGER)?
//   primary := NUMBER | 'x' INTEGER | ('sin'|'cos'|'exp') '(' sum ')' | '(' sum ')'

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "liecouple/error.hpp"

namespace liecouple {

enum class ExprKind { literal, variable, negate, add, subtract, multiply, divide, power, sin, cos, exp };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind = ExprKind::literal;
  double value = 0.0;  // literal
  int index = 0;       // variable number (1-based) or integer exponent
  ExprPtr lhs;         // unary operand / left operand / power base / function argument
  ExprPtr rhs;         // right operand of binary operators
};

inline bool is_binary(ExprKind k) {
  return k == ExprKind::add || k == ExprKind::subtract || k == ExprKind::multiply ||
         k == ExprKind::divide;
}

inline bool is_function(ExprKind k) {
  return k == ExprKind::sin || k == ExprKind::cos || k == ExprKind::exp;
}

inline bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::literal: return a.value == b.value;
    case ExprKind::variable: return a.index == b.index;
    case ExprKind::power: return a.index == b.index && structurally_equal(*a.lhs, *b.lhs);
    default: break;
  }
  if (is_binary(a.kind)) return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
  return structurally_equal(*a.lhs, *b.lhs);
}

class Expression {
 public:
  Expression() = default;
  explicit Expression(ExprPtr root) : root_(std::move(root)) {}

  static Expression literal(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::literal;
    n->value = v;
    return Expression(n);
  }
  static Expression variable(int i) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::variable;
    n->index = i;
    return Expression(n);
  }

  const ExprNode& root() const { return *root_; }
  bool empty() const { return root_ == nullptr; }

  /// Largest variable index referenced (0 for constant expressions).
  int max_variable() const { return root_ ? max_var(*root_) : 0; }

  friend bool operator==(const Expression& a, const Expression& b) {
    if (!a.root_ || !b.root_) return a.root_ == b.root_;
    return structurally_equal(*a.root_, *b.root_);
  }

 private:
  static int max_var(const ExprNode& n) {
    int m = n.kind == ExprKind::variable ? n.index : 0;
    if (n.lhs) m = std::max(m, max_var(*n.lhs));
    if (n.rhs) m = std::max(m, max_var(*n.rhs));
    return m;
  }

  ExprPtr root_;
};

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : src_(src) {}

  Expression parse() {
    skip_space();
    if (at_end()) fail("empty expression");
    ExprPtr e = parse_sum();
    skip_space();
    if (!at_end()) fail(std::string("unexpected '") + src_[pos_] + "'");
    return Expression(std::move(e));
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < pos_ && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::syntax, std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }

  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return at_end() ? '\0' : src_[pos_]; }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  static ExprPtr make(ExprKind k, ExprPtr lhs, ExprPtr rhs = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  ExprPtr parse_sum() {
    ExprPtr left = parse_product();
    for (;;) {
      if (accept('+')) {
        left = make(ExprKind::add, left, parse_product());
      } else if (accept('-')) {
        left = make(ExprKind::subtract, left, parse_product());
      } else {
        return left;
      }
    }
  }

  ExprPtr parse_product() {
    ExprPtr left = parse_unary();
    for (;;) {
      if (accept('*')) {
        left = make(ExprKind::multiply, left, parse_unary());
      } else if (accept('/')) {
        left = make(ExprKind::divide, left, parse_unary());
      } else {
        return left;
      }
    }
  }

  ExprPtr parse_unary() {
    if (accept('-')) return make(ExprKind::negate, parse_unary());
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_primary();
    if (!accept('^')) return base;
    const bool negative = accept('-');
    skip_space();
    if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("exponent must be an integer literal");
    long value = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      value = value * 10 + (src_[pos_++] - '0');
      if (value > 1000000) fail("exponent too large");
    }
    if (peek() == '.' || peek() == 'e' || peek() == 'E') fail("exponent must be an integer literal");
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::power;
    n->index = static_cast<int>(negative ? -value : value);
    n->lhs = std::move(base);
    skip_space();
    if (peek() == '^') fail("chained powers need parentheses");
    return n;
  }

  ExprPtr parse_primary() {
    skip_space();
    if (at_end()) fail("unexpected end of expression");
    const char c = peek();
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) ++pos_;
      const std::string_view word = src_.substr(start, pos_ - start);
      if (word == "sin" || word == "cos" || word == "exp") {
        const ExprKind k = word == "sin" ? ExprKind::sin : word == "cos" ? ExprKind::cos : ExprKind::exp;
        expect('(');
        ExprPtr arg = parse_sum();
        expect(')');
        return make(k, std::move(arg));
      }
      if (word.size() >= 2 && word[0] == 'x') {
        int idx = 0;
        bool digits = true;
        for (std::size_t i = 1; i < word.size(); ++i) {
          if (!std::isdigit(static_cast<unsigned char>(word[i]))) digits = false;
          else if (idx < 100000) idx = idx * 10 + (word[i] - '0');
        }
        if (digits && idx >= 1) {
          auto n = std::make_shared<ExprNode>();
          n->kind = ExprKind::variable;
          n->index = idx;
          return n;
        }
      }
      pos_ = start;
      fail("unknown identifier '" + std::string(word) + "'");
    }
    fail(std::string("unexpected '") + c + "'");
  }

  ExprPtr parse_number() {
    const std::size_t start = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (peek() == '.') {
      ++pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    }
    if (peek() == 'e' || peek() == 'E') {
      std::size_t save = pos_;
      ++pos_;
      if (peek() == '+' || peek() == '-') ++pos_;
      if (!std::isdigit(static_cast<unsigned char>(peek()))) {
        pos_ = save;
        fail("malformed exponent in number");
      }
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    }
    const std::string text(src_.substr(start, pos_ - start));
    if (text == ".") {
      pos_ = start;
      fail("malformed number");
    }
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::literal;
    n->value = std::strtod(text.c_str(), nullptr);
    if (!std::isfinite(n->value)) {
      pos_ = start;
      fail("number out of range");
    }
    return n;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

inline bool is_atomic(const ExprNode& n) {
  return n.kind == ExprKind::literal || n.kind == ExprKind::variable || is_function(n.kind);
}

inline void print_node(const ExprNode& n, std::string& out);

// Binary nodes print their own parentheses.
inline void print_operand(const ExprNode& n, std::string& out) {
  const bool binary = n.kind == ExprKind::add || n.kind == ExprKind::subtract || n.kind == ExprKind::multiply ||
                      n.kind == ExprKind::divide;
  if (is_atomic(n) || binary) {
    print_node(n, out);
    return;
  }
  out += '(';
  print_node(n, out);
  out += ')';
}

inline void print_node(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case ExprKind::literal: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case ExprKind::variable:
      out += "x" + std::to_string(n.index);
      return;
    case ExprKind::negate:
      out += '-';
      print_operand(*n.lhs, out);
      return;
    case ExprKind::power:
      print_operand(*n.lhs, out);
      out += '^' + std::to_string(n.index);
      return;
    case ExprKind::sin:
    case ExprKind::cos:
    case ExprKind::exp:
      out += n.kind == ExprKind::sin ? "sin(" : n.kind == ExprKind::cos ? "cos(" : "exp(";
      print_node(*n.lhs, out);
      out += ')';
      return;
    default: {
      const char* op = n.kind == ExprKind::add        ? " + "
                       : n.kind == ExprKind::subtract ? " - "
                       : n.kind == ExprKind::multiply ? " * "
                                                      : " / ";
      out += '(';
      print_node(*n.lhs, out);
      out += op;
      print_node(*n.rhs, out);
      out += ')';
    }
  }
}

inline double eval_node(const ExprNode& n, std::span<const double> x) {
  switch (n.kind) {
    case ExprKind::literal: return n.value;
    case ExprKind::variable:
      if (n.index < 1 || static_cast<std::size_t>(n.index) > x.size()) {
        throw Error(ErrorKind::evaluation, "variable x" + std::to_string(n.index) +
                                               " not available (" + std::to_string(x.size()) +
                                               " coordinates)");
      }
      return x[static_cast<std::size_t>(n.index) - 1];
    case ExprKind::negate: return -eval_node(*n.lhs, x);
    case ExprKind::add: return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
    case ExprKind::subtract: return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
    case ExprKind::multiply: return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
    case ExprKind::divide: {
      const double den = eval_node(*n.rhs, x);
      if (std::abs(den) < 1e-300) throw Error(ErrorKind::evaluation, "division by near-zero value");
      return eval_node(*n.lhs, x) / den;
    }
    case ExprKind::power: {
      const double base = eval_node(*n.lhs, x);
      if (n.index < 0 && std::abs(base) < 1e-300) {
        throw Error(ErrorKind::evaluation, "negative power of near-zero value");
      }
      return std::pow(base, n.index);
    }
    case ExprKind::sin: return std::sin(eval_node(*n.lhs, x));
    case ExprKind::cos: return std::cos(eval_node(*n.lhs, x));
    case ExprKind::exp: return std::exp(eval_node(*n.lhs, x));
  }
  return 0.0;
}

}  // namespace detail

/// Throws Error(syntax) with a "line:col: message" text on malformed input.
inline Expression parse_expression(std::string_view src) { return detail::ExprParser(src).parse(); }

/// Prints a form that parses back to a structurally equal tree.
inline std::string print(const Expression& e) {
  std::string out;
  if (!e.empty()) detail::print_node(e.root(), out);
  return out;
}

inline double evaluate(const Expression& e, std::span<const double> coords) {
  if (e.empty()) throw Error(ErrorKind::evaluation, "empty expression");
  return detail::eval_node(e.root(), coords);
}

}  // namespace liecouple
