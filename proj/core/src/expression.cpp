#include "crflow/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

#include "crflow/errors.hpp"
#include "crflow/heisenberg.hpp"
#include "crflow/random.hpp"

namespace crflow {

struct Expression::Node {
  enum Kind { num, var_x, var_y, var_t, add, sub, mul, div, pow, neg, cos, sin, exp, gauss } kind;
  double value = 0.0;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(double x, double y, double t) const {
    auto a = [&](int i) { return args[i]->eval(x, y, t); };
    switch (kind) {
      case num: return value;
      case var_x: return x;
      case var_y: return y;
      case var_t: return t;
      case add: return a(0) + a(1);
      case sub: return a(0) - a(1);
      case mul: return a(0) * a(1);
      case div: return a(0) / a(1);
      case pow: return std::pow(a(0), a(1));
      case neg: return -a(0);
      case cos: return std::cos(a(0));
      case sin: return std::sin(a(0));
      case exp: return std::exp(a(0));
      case gauss: {
        double dx = x - a(0), dy = y - a(1);
        dx -= std::floor(dx + 0.5);
        dy -= std::floor(dy + 0.5);
        const double w = a(2);
        return std::exp(-(dx * dx + dy * dy) / (w * w));
      }
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression '" + s_ + "': " + msg + " at offset " + std::to_string(pos_));
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
  static NodePtr make(Node::Kind k, std::vector<NodePtr> args, double v = 0.0) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->value = v;
    n->args = std::move(args);
    return n;
  }

  NodePtr expr() {
    NodePtr l = term();
    while (true) {
      if (accept('+')) l = make(Node::add, {l, term()});
      else if (accept('-')) l = make(Node::sub, {l, term()});
      else return l;
    }
  }
  NodePtr term() {
    NodePtr l = unary();
    while (true) {
      if (accept('*')) l = make(Node::mul, {l, unary()});
      else if (accept('/')) l = make(Node::div, {l, unary()});
      else return l;
    }
  }
  NodePtr unary() {
    if (accept('-')) return make(Node::neg, {power()});
    if (accept('+')) return power();
    return power();
  }
  NodePtr power() {
    NodePtr b = primary();
    if (accept('^')) return make(Node::pow, {b, unary()});
    return b;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expr();
      expect(')');
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
      if (ec != std::errc()) fail("bad number");
      pos_ = static_cast<std::size_t>(p - s_.data());
      return make(Node::num, {}, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t e = pos_;
      while (e < s_.size() && std::isalnum(static_cast<unsigned char>(s_[e]))) ++e;
      const std::string id = s_.substr(pos_, e - pos_);
      pos_ = e;
      if (id == "x") return make(Node::var_x, {});
      if (id == "y") return make(Node::var_y, {});
      if (id == "t") return make(Node::var_t, {});
      if (id == "pi") return make(Node::num, {}, kPi);
      Node::Kind k;
      std::size_t arity = 1;
      if (id == "cos") k = Node::cos;
      else if (id == "sin") k = Node::sin;
      else if (id == "exp") k = Node::exp;
      else if (id == "gauss") k = Node::gauss, arity = 3;
      else fail("unknown identifier '" + id + "'");
      expect('(');
      std::vector<NodePtr> args{expr()};
      while (accept(',')) args.push_back(expr());
      expect(')');
      if (args.size() != arity) fail(id + " takes " + std::to_string(arity) + " argument(s)");
      return make(k, std::move(args));
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.root_ = Parser(text).parse();
  e.text_ = text;
  return e;
}

double Expression::operator()(double x, double y, double t) const {
  if (!root_) throw DomainError("Expression: empty");
  return root_->eval(x, y, t);
}

double gluing_mismatch(const Expression& e, int period_divisor, std::uint64_t seed, int samples) {
  if (period_divisor < 1) throw DomainError("gluing_mismatch: K must be positive");
  const double P = 1.0 / period_divisor;
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double x = rng.uniform(), y = rng.uniform(), t = rng.uniform(0.0, P);
    const double v = e(x, y, t);
    const double scale = std::max(1.0, std::abs(v));
    worst = std::max(worst, std::abs(e(x + 1.0, y, t + y) - v) / scale);
    worst = std::max(worst, std::abs(e(x, y + 1.0, t) - v) / scale);
    worst = std::max(worst, std::abs(e(x, y, t + P) - v) / scale);
  }
  return worst;
}

ScalarField sample(const ModelPtr& model, const Expression& e) {
  return sample(model, [&](const PolarPoint& p) { return e(p); });
}

}  // namespace crflow
