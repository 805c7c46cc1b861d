#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "crflow/manifold.hpp"

namespace crflow {

// Closed-form scalar expressions in the polarized coordinates x, y, t.
//
//   expr    = term { ("+" | "-") term } ;
//   term    = unary { ("*" | "/") unary } ;
//   unary   = [ "+" | "-" ] power ;
//   power   = primary [ "^" unary ] ;
//   primary = number | "x" | "y" | "t" | "pi"
//           | func "(" expr { "," expr } ")" | "(" expr ")" ;
//   func    = "cos" | "sin" | "exp" | "gauss" ;
//
// gauss(x0, y0, w) = exp(-(dx^2 + dy^2) / w^2) with dx, dy the periodic
// minimal differences to (x0, y0).
class Expression {
 public:
  struct Node;

  Expression() = default;
  static Expression parse(const std::string& text);

  double operator()(double x, double y, double t) const;
  double operator()(const PolarPoint& p) const { return (*this)(p.x, p.y, p.t); }
  const std::string& text() const { return text_; }
  bool empty() const { return !root_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

// Largest mismatch |g(p') - g(p)| over random points p and their images under
// the three identifications with period P = 1/K.
double gluing_mismatch(const Expression& e, int period_divisor, std::uint64_t seed = 1, int samples = 256);

ScalarField sample(const ModelPtr& model, const Expression& e);

}  // namespace crflow
