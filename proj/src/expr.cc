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

#include "mpsc/expr.h"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "mpsc/format.h"

namespace mpsc {

struct Node {
  NodeKind kind = NodeKind::kConstant;
  double value = 0.0;
  int index = 0;  // variable index or integer exponent
  UnaryKind unary = UnaryKind::kSin;
  Expr lhs{Expr::NullTag{}};
  Expr rhs{Expr::NullTag{}};
  int maxVar = -1;
};

namespace {

std::string pointMessage(std::span<const double> z) {
  return "(" + formatVector(z) + ")";
}

bool isFiniteConstant(double v) { return std::isfinite(v); }

}  // namespace

DomainError::DomainError(const std::string& node, std::vector<double> point,
                         const std::string& what)
    : std::runtime_error("domain error in " + node + " at " +
                         pointMessage(point) + ": " + what),
      node_(node),
      point_(std::move(point)) {}

Expr::Expr() : Expr(constant(0.0)) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kConstant;
  n->value = value;
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::var(int index) {
  if (index < 0) throw std::invalid_argument("negative variable index");
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kVar;
  n->index = index;
  n->maxVar = index;
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

NodeKind Expr::kind() const { return node_->kind; }
double Expr::constantValue() const { return node_->value; }
int Expr::varIndex() const { return node_->index; }
int Expr::exponent() const { return node_->index; }
UnaryKind Expr::unaryKind() const { return node_->unary; }
const Expr& Expr::left() const { return node_->lhs; }
const Expr& Expr::right() const { return node_->rhs; }
int Expr::maxVarIndex() const { return node_->maxVar; }

// The private constructor is only reachable from member/friend code, so the
// node builders live in these friends.
Expr operator+(const Expr& a, const Expr& b) {
  if (a.isConstant() && b.isConstant())
    return Expr::constant(a.constantValue() + b.constantValue());
  if (a.isZero()) return b;
  if (b.isZero()) return a;
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kAdd;
  n->lhs = a;
  n->rhs = b;
  n->maxVar = std::max(a.maxVarIndex(), b.maxVarIndex());
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.isConstant() && b.isConstant())
    return Expr::constant(a.constantValue() - b.constantValue());
  if (b.isZero()) return a;
  if (a.isZero()) return -b;
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kSub;
  n->lhs = a;
  n->rhs = b;
  n->maxVar = std::max(a.maxVarIndex(), b.maxVarIndex());
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.isConstant() && b.isConstant())
    return Expr::constant(a.constantValue() * b.constantValue());
  if (a.isZero() || b.isZero()) return Expr::constant(0.0);
  if (a.isOne()) return b;
  if (b.isOne()) return a;
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kMul;
  // Constants go left so (-1)*x and 2*x print naturally.
  if (b.isConstant()) {
    n->lhs = b;
    n->rhs = a;
  } else {
    n->lhs = a;
    n->rhs = b;
  }
  n->maxVar = std::max(a.maxVarIndex(), b.maxVarIndex());
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.isConstant() && b.isConstant() && b.constantValue() != 0.0)
    return Expr::constant(a.constantValue() / b.constantValue());
  if (b.isOne()) return a;
  if (a.isZero()) return Expr::constant(0.0);
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kDiv;
  n->lhs = a;
  n->rhs = b;
  n->maxVar = std::max(a.maxVarIndex(), b.maxVarIndex());
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr operator-(const Expr& a) {
  if (a.isConstant()) return Expr::constant(-a.constantValue());
  return Expr::constant(-1.0) * a;
}

Expr pow(const Expr& base, int exponent) {
  if (exponent == 0) return Expr::constant(1.0);
  if (exponent == 1) return base;
  if (base.isConstant()) {
    const double v = std::pow(base.constantValue(), exponent);
    if (isFiniteConstant(v)) return Expr::constant(v);
  }
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kPowInt;
  n->lhs = base;
  n->index = exponent;
  n->maxVar = base.maxVarIndex();
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr apply(UnaryKind kind, const Expr& child) {
  if (child.isConstant()) {
    const double c = child.constantValue();
    double v = NAN;
    switch (kind) {
      case UnaryKind::kSin: v = std::sin(c); break;
      case UnaryKind::kCos: v = std::cos(c); break;
      case UnaryKind::kExp: v = std::exp(c); break;
      case UnaryKind::kLog: v = c > 0 ? std::log(c) : NAN; break;
      case UnaryKind::kSqrt: v = c >= 0 ? std::sqrt(c) : NAN; break;
    }
    if (isFiniteConstant(v)) return Expr::constant(v);
  }
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kUnary;
  n->unary = kind;
  n->lhs = child;
  n->maxVar = child.maxVarIndex();
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

const char* unaryName(UnaryKind kind) {
  switch (kind) {
    case UnaryKind::kSin: return "sin";
    case UnaryKind::kCos: return "cos";
    case UnaryKind::kExp: return "exp";
    case UnaryKind::kLog: return "log";
    case UnaryKind::kSqrt: return "sqrt";
  }
  return "?";
}

double Expr::evaluate(std::span<const double> z) const {
  const Node& n = *node_;
  auto fail = [&](const std::string& what) -> double {
    throw DomainError(toString(), std::vector<double>(z.begin(), z.end()),
                      what);
  };
  double v = 0.0;
  switch (n.kind) {
    case NodeKind::kConstant:
      return n.value;
    case NodeKind::kVar:
      if (static_cast<size_t>(n.index) >= z.size())
        throw std::out_of_range("variable index outside point dimension");
      return z[n.index];
    case NodeKind::kAdd:
      v = n.lhs.evaluate(z) + n.rhs.evaluate(z);
      break;
    case NodeKind::kSub:
      v = n.lhs.evaluate(z) - n.rhs.evaluate(z);
      break;
    case NodeKind::kMul:
      v = n.lhs.evaluate(z) * n.rhs.evaluate(z);
      break;
    case NodeKind::kDiv: {
      const double den = n.rhs.evaluate(z);
      if (den == 0.0) return fail("division by zero");
      v = n.lhs.evaluate(z) / den;
      break;
    }
    case NodeKind::kPowInt: {
      const double b = n.lhs.evaluate(z);
      if (b == 0.0 && n.index < 0) return fail("zero to a negative power");
      v = std::pow(b, n.index);
      break;
    }
    case NodeKind::kUnary: {
      const double c = n.lhs.evaluate(z);
      switch (n.unary) {
        case UnaryKind::kSin: v = std::sin(c); break;
        case UnaryKind::kCos: v = std::cos(c); break;
        case UnaryKind::kExp: v = std::exp(c); break;
        case UnaryKind::kLog:
          if (c <= 0.0) return fail("log of non-positive argument");
          v = std::log(c);
          break;
        case UnaryKind::kSqrt:
          if (c < 0.0) return fail("sqrt of negative argument");
          v = std::sqrt(c);
          break;
      }
      break;
    }
  }
  if (!std::isfinite(v)) return fail("non-finite value");
  return v;
}

std::string Expr::toString() const {
  const Node& n = *node_;
  switch (n.kind) {
    case NodeKind::kConstant:
      return formatDouble(n.value);
    case NodeKind::kVar:
      return "z" + std::to_string(n.index + 1);
    case NodeKind::kAdd:
      return "(" + n.lhs.toString() + " + " + n.rhs.toString() + ")";
    case NodeKind::kSub:
      return "(" + n.lhs.toString() + " - " + n.rhs.toString() + ")";
    case NodeKind::kMul:
      return "(" + n.lhs.toString() + "*" + n.rhs.toString() + ")";
    case NodeKind::kDiv:
      return "(" + n.lhs.toString() + "/" + n.rhs.toString() + ")";
    case NodeKind::kPowInt:
      return n.lhs.toString() + "^" +
             (n.index < 0 ? "(" + std::to_string(n.index) + ")"
                          : std::to_string(n.index));
    case NodeKind::kUnary:
      return std::string(unaryName(n.unary)) + "(" + n.lhs.toString() + ")";
  }
  return "?";
}

Expr differentiate(const Expr& e, int varIndex) {
  if (e.maxVarIndex() < varIndex) return Expr::constant(0.0);
  switch (e.kind()) {
    case NodeKind::kConstant:
      return Expr::constant(0.0);
    case NodeKind::kVar:
      return Expr::constant(e.varIndex() == varIndex ? 1.0 : 0.0);
    case NodeKind::kAdd:
      return differentiate(e.left(), varIndex) +
             differentiate(e.right(), varIndex);
    case NodeKind::kSub:
      return differentiate(e.left(), varIndex) -
             differentiate(e.right(), varIndex);
    case NodeKind::kMul:
      return differentiate(e.left(), varIndex) * e.right() +
             e.left() * differentiate(e.right(), varIndex);
    case NodeKind::kDiv: {
      const Expr& u = e.left();
      const Expr& v = e.right();
      const Expr du = differentiate(u, varIndex);
      const Expr dv = differentiate(v, varIndex);
      if (dv.isZero()) return du / v;
      return (du * v - u * dv) / pow(v, 2);
    }
    case NodeKind::kPowInt: {
      const int k = e.exponent();
      return Expr::constant(k) * pow(e.left(), k - 1) *
             differentiate(e.left(), varIndex);
    }
    case NodeKind::kUnary: {
      const Expr& u = e.left();
      const Expr du = differentiate(u, varIndex);
      if (du.isZero()) return Expr::constant(0.0);
      switch (e.unaryKind()) {
        case UnaryKind::kSin: return cos(u) * du;
        case UnaryKind::kCos: return -(sin(u) * du);
        case UnaryKind::kExp: return e * du;
        case UnaryKind::kLog: return du / u;
        case UnaryKind::kSqrt: return du / (Expr::constant(2.0) * e);
      }
    }
  }
  assert(false);
  return Expr::constant(0.0);
}

}  // namespace mpsc
