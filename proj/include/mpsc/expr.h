// Copyright 2026 The mpsc-check Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpsc {

// Thrown when an expression is evaluated outside its domain (division by
// zero, log of a non-positive number, sqrt of a negative number) or when the
// result is not finite.
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& node, std::vector<double> point,
              const std::string& what);

  const std::string& node() const { return node_; }
  const std::vector<double>& point() const { return point_; }

 private:
  std::string node_;
  std::vector<double> point_;
};

enum class UnaryKind { kSin, kCos, kExp, kLog, kSqrt };

enum class NodeKind { kConstant, kVar, kAdd, kSub, kMul, kDiv, kPowInt, kUnary };

struct Node;

// Immutable expression tree. Copies share structure; all factory functions
// apply constant folding (x*0 -> 0, x+0 -> x, x*1 -> x, c op c -> c, ...).
class Expr {
 public:
  Expr();  // Constant(0)

  static Expr constant(double value);
  static Expr var(int index);

  NodeKind kind() const;
  double constantValue() const;  // only for kConstant
  int varIndex() const;          // only for kVar
  int exponent() const;          // only for kPowInt
  UnaryKind unaryKind() const;   // only for kUnary
  const Expr& left() const;      // binary lhs, PowInt base, Unary child
  const Expr& right() const;     // binary rhs

  bool isConstant() const { return kind() == NodeKind::kConstant; }
  bool isZero() const { return isConstant() && constantValue() == 0.0; }
  bool isOne() const { return isConstant() && constantValue() == 1.0; }

  // Largest variable index referenced, or -1 for a constant expression.
  int maxVarIndex() const;

  // Exact value at z. Throws DomainError instead of returning non-finite
  // values.
  double evaluate(std::span<const double> z) const;

  std::string toString() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& base, int exponent);
  friend Expr apply(UnaryKind kind, const Expr& child);

 private:
  friend struct Node;
  struct NullTag {};
  explicit Expr(NullTag) {}
  explicit Expr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

Expr pow(const Expr& base, int exponent);
Expr apply(UnaryKind kind, const Expr& child);
inline Expr sin(const Expr& e) { return apply(UnaryKind::kSin, e); }
inline Expr cos(const Expr& e) { return apply(UnaryKind::kCos, e); }
inline Expr exp(const Expr& e) { return apply(UnaryKind::kExp, e); }
inline Expr log(const Expr& e) { return apply(UnaryKind::kLog, e); }
inline Expr sqrt(const Expr& e) { return apply(UnaryKind::kSqrt, e); }

// Exact partial derivative with respect to variable `varIndex`.
Expr differentiate(const Expr& e, int varIndex);

const char* unaryName(UnaryKind kind);

}  // namespace mpsc
