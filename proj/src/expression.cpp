#include "ddfem/expression.hpp"

#include "ddfem/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace ddfem {

struct Expression::Node {
  enum class Kind { Number, Variable, Negate, Add, Sub, Mul, Div, Pow, Call } kind;
  double value = 0.0;
  int variable = 0;
  double (*fn)(double) = nullptr;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(const Eigen::VectorXd& x) const {
    switch (kind) {
      case Kind::Number:
        return value;
      case Kind::Variable:
        return variable < x.size() ? x(variable) : 0.0;
      case Kind::Negate:
        return -args[0]->eval(x);
      case Kind::Add:
        return args[0]->eval(x) + args[1]->eval(x);
      case Kind::Sub:
        return args[0]->eval(x) - args[1]->eval(x);
      case Kind::Mul:
        return args[0]->eval(x) * args[1]->eval(x);
      case Kind::Div:
        return args[0]->eval(x) / args[1]->eval(x);
      case Kind::Pow:
        return std::pow(args[0]->eval(x), args[1]->eval(x));
      case Kind::Call:
        return fn(args[0]->eval(x));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind kind, std::vector<NodePtr> args = {}) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = kind;
  n->args = std::move(args);
  return n;
}

double fabs_(double v) { return std::fabs(v); }
double exp_(double v) { return std::exp(v); }
double log_(double v) { return std::log(v); }
double sqrt_(double v) { return std::sqrt(v); }
double sin_(double v) { return std::sin(v); }
double cos_(double v) { return std::cos(v); }
double tan_(double v) { return std::tan(v); }

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    auto n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(0, "expression '" + s_ + "' at offset " + std::to_string(pos_) + ": " + what);
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

  NodePtr sum() {
    auto lhs = product();
    for (;;) {
      if (accept('+'))
        lhs = make(Kind::Add, {lhs, product()});
      else if (accept('-'))
        lhs = make(Kind::Sub, {lhs, product()});
      else
        return lhs;
    }
  }

  NodePtr product() {
    auto lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = make(Kind::Mul, {lhs, unary()});
      else if (accept('/'))
        lhs = make(Kind::Div, {lhs, unary()});
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Kind::Negate, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (accept('^')) return make(Kind::Pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (accept('(')) {
      auto n = sum();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Number;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string name;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) name += s_[pos_++];
      if (name == "x" || name == "y" || name == "z") {
        auto n = std::make_shared<Expression::Node>();
        n->kind = Kind::Variable;
        n->variable = name[0] - 'x';
        return n;
      }
      if (name == "pi") {
        auto n = std::make_shared<Expression::Node>();
        n->kind = Kind::Number;
        n->value = std::numbers::pi;
        return n;
      }
      double (*fn)(double) = nullptr;
      if (name == "abs") fn = fabs_;
      else if (name == "exp") fn = exp_;
      else if (name == "log") fn = log_;
      else if (name == "sqrt") fn = sqrt_;
      else if (name == "sin") fn = sin_;
      else if (name == "cos") fn = cos_;
      else if (name == "tan") fn = tan_;
      else fail("unknown identifier '" + name + "'");
      if (!accept('(')) fail("expected '(' after " + name);
      auto arg = sum();
      if (!accept(')')) fail("expected ')'");
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::Call;
      n->fn = fn;
      n->args = {arg};
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(std::string source) : source_(std::move(source)), root_(Parser(source_).parse()) {}

double Expression::operator()(const Eigen::VectorXd& x) const { return root_->eval(x); }

}  // namespace ddfem
