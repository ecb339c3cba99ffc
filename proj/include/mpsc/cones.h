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

// Cone calculus for the switching set {(a, b) : ab = 0} and for the product
// set R_-^p x {0}^q x (switching set)^m. Every cone that arises is one of a
// small closed family of labeled sets, so the calculus is a table lookup.

#pragma once

#include <string>
#include <vector>

#include "mpsc/analysis.h"
#include "mpsc/errors.h"
#include "mpsc/linkernel.h"

namespace mpsc {

enum class ConeTag {
  kZeroPoint,       // {0} in R or R^2
  kLineA,           // R x {0}
  kLineB,           // {0} x R
  kSwitchUnion,     // R x {0}  union  {0} x R
  kFullPlane,       // R^2
  kRealLine,        // R
  kHalfLineNonPos,  // (-inf, 0]
  kHalfLineNonNeg,  // [0, inf)
  kEmpty,
};

struct FactorCone {
  ConeTag tag = ConeTag::kZeroPoint;
  int dim = 2;

  bool operator==(const FactorCone&) const = default;
  std::string name() const;
};

inline FactorCone planeCone(ConeTag t) { return {t, 2}; }
inline FactorCone lineCone(ConeTag t) { return {t, 1}; }

const char* coneTagName(ConeTag tag);

// Exact membership. v must have c.dim entries.
bool coneMember(const FactorCone& c, std::span<const double> v);
inline bool coneMember(const FactorCone& c, const Vector& v) {
  return coneMember(c, asSpan(v));
}

// Polar cone. The polar of a union is the polar of its convex hull, so
// polar(SwitchUnion) = ZeroPoint and polar(ZeroPoint) = FullPlane.
FactorCone conePolar(const FactorCone& c);

// True for every tag except SwitchUnion.
bool coneIsConvex(const FactorCone& c);

struct Pair {
  double first = 0.0;
  double second = 0.0;
};

// Switching-set cones at a = (a1, a2). "Zero" means |x| <= tol. All throw
// NotInSet when min(|a1|, |a2|) > tol.
FactorCone tangentSwitch(Pair a, double tol);
FactorCone regularNormalSwitch(Pair a, double tol);
FactorCone limitingNormalSwitch(Pair a, double tol);
// EmptyCone when d is not tangent at a.
FactorCone directionalNormalSwitch(Pair a, Pair d, double tolA, double tolD);
inline FactorCone directionalNormalSwitch(Pair a, Pair d, double tol) {
  return directionalNormalSwitch(a, d, tol, tol);
}
// Regular normal cone of the tangent cone at a, evaluated at d. Throws
// NotInTangent when d is not tangent at a.
FactorCone regularNormalOfTangentSwitch(Pair a, Pair d, double tolA,
                                        double tolD);
inline FactorCone regularNormalOfTangentSwitch(Pair a, Pair d, double tol) {
  return regularNormalOfTangentSwitch(a, d, tol, tol);
}

// Product of factor cones in (g, h, (G,H)...) order.
struct ProductCone {
  std::vector<FactorCone> ineq;    // p one-dimensional factors
  std::vector<FactorCone> eq;      // q one-dimensional factors
  std::vector<FactorCone> switches;  // m two-dimensional factors

  bool isEmpty() const;
  int ambientDimension() const;
  std::string toString() const;
};

ProductCone productTangent(const ActivePattern& pat);
ProductCone productDirectionalNormal(const DirectionalPattern& dp);

// Multiplier sign pattern over the (g, h, G, H) layout realizing a product of
// normal-type cones. SwitchUnion factors become complementary pairs. Throws
// std::invalid_argument if the product is empty or a factor is not a normal
// cone shape.
SignPattern multiplierPattern(const ProductCone& normal);

}  // namespace mpsc
