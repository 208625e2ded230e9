#include "semilinear/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "semilinear/errors.hpp"

namespace semilinear {

struct Expression::Node {
  enum class Kind { constant, x1, x2, t, radius, add, sub, mul, div, pow, neg, log, abs, max } kind;
  double value = 0.0;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(double x1, double x2, double t) const {
    switch (kind) {
      case Kind::constant: return value;
      case Kind::x1: return x1;
      case Kind::x2: return x2;
      case Kind::t: return t;
      case Kind::radius: return std::hypot(x1, x2);
      case Kind::add: return args[0]->eval(x1, x2, t) + args[1]->eval(x1, x2, t);
      case Kind::sub: return args[0]->eval(x1, x2, t) - args[1]->eval(x1, x2, t);
      case Kind::mul: return args[0]->eval(x1, x2, t) * args[1]->eval(x1, x2, t);
      case Kind::div: return args[0]->eval(x1, x2, t) / args[1]->eval(x1, x2, t);
      case Kind::pow: return std::pow(args[0]->eval(x1, x2, t), args[1]->eval(x1, x2, t));
      case Kind::neg: return -args[0]->eval(x1, x2, t);
      case Kind::log: return std::log(args[0]->eval(x1, x2, t));
      case Kind::abs: return std::abs(args[0]->eval(x1, x2, t));
      case Kind::max: return std::max(args[0]->eval(x1, x2, t), args[1]->eval(x1, x2, t));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind kind, std::vector<NodePtr> args = {}, double value = 0.0) {
  auto node = std::make_shared<Expression::Node>();
  node->kind = kind;
  node->value = value;
  node->args = std::move(args);
  return node;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  NodePtr parse() {
    auto node = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return node;
  }
  bool uses_t() const { return uses_t_; }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("expression '" + s_ + "': " + why + " at offset " + std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(Kind::add, {lhs, term()});
      else if (accept('-')) lhs = make(Kind::sub, {lhs, term()});
      else return lhs;
    }
  }
  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Kind::mul, {lhs, unary()});
      else if (accept('/')) lhs = make(Kind::div, {lhs, unary()});
      else return lhs;
    }
  }
  NodePtr unary() {
    if (accept('-')) return make(Kind::neg, {unary()});
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    auto base = atom();
    if (accept('^')) return make(Kind::pow, {base, unary()});
    return base;
  }
  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      return make(Kind::constant, {}, v);
    }
    if (accept('(')) {
      auto inner = expr();
      expect(')');
      return inner;
    }
    if (s_.compare(pos_, 3, "|x|") == 0) {
      pos_ += 3;
      return make(Kind::radius);
    }
    std::string word;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) word += s_[pos_++];
    if (word == "x1") return make(Kind::x1);
    if (word == "x2") return make(Kind::x2);
    if (word == "t") {
      uses_t_ = true;
      return make(Kind::t);
    }
    if (word == "pi") return make(Kind::constant, {}, std::numbers::pi);
    if (word == "log" || word == "abs") {
      expect('(');
      auto arg = expr();
      expect(')');
      return make(word == "log" ? Kind::log : Kind::abs, {arg});
    }
    if (word == "max") {
      expect('(');
      auto a = expr();
      expect(',');
      auto b = expr();
      expect(')');
      return make(Kind::max, {a, b});
    }
    fail(word.empty() ? std::string("unexpected character '") + c + "'" : "identifier '" + word + "' is not allowed");
  }

  std::string s_;
  std::size_t pos_ = 0;
  bool uses_t_ = false;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Parser parser(text);
  Expression e;
  e.root_ = parser.parse();
  e.source_ = text;
  e.uses_t_ = parser.uses_t();
  return e;
}

double Expression::operator()(double x1, double x2, double t) const {
  if (!root_) throw ConfigError("evaluating an empty expression");
  return root_->eval(x1, x2, t);
}

}  // namespace semilinear
