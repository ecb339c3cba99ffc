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

#include "mpsc/cones.h"

#include <cmath>
#include <stdexcept>

#include "mpsc/format.h"

namespace mpsc {

const char* coneTagName(ConeTag tag) {
  switch (tag) {
    case ConeTag::kZeroPoint: return "ZeroPoint";
    case ConeTag::kLineA: return "LineA";
    case ConeTag::kLineB: return "LineB";
    case ConeTag::kSwitchUnion: return "SwitchUnion";
    case ConeTag::kFullPlane: return "FullPlane";
    case ConeTag::kRealLine: return "RealLine";
    case ConeTag::kHalfLineNonPos: return "HalfLineNonPos";
    case ConeTag::kHalfLineNonNeg: return "HalfLineNonNeg";
    case ConeTag::kEmpty: return "EmptyCone";
  }
  return "?";
}

std::string FactorCone::name() const {
  if (tag == ConeTag::kZeroPoint || tag == ConeTag::kEmpty)
    return std::string(coneTagName(tag)) + (dim == 1 ? "(1)" : "(2)");
  return coneTagName(tag);
}

bool coneMember(const FactorCone& c, std::span<const double> v) {
  if (static_cast<int>(v.size()) != c.dim)
    throw std::invalid_argument("cone membership: vector has wrong dimension");
  switch (c.tag) {
    case ConeTag::kZeroPoint:
      for (double x : v)
        if (x != 0.0) return false;
      return true;
    case ConeTag::kLineA: return v[1] == 0.0;
    case ConeTag::kLineB: return v[0] == 0.0;
    case ConeTag::kSwitchUnion: return v[0] == 0.0 || v[1] == 0.0;
    case ConeTag::kFullPlane:
    case ConeTag::kRealLine: return true;
    case ConeTag::kHalfLineNonPos: return v[0] <= 0.0;
    case ConeTag::kHalfLineNonNeg: return v[0] >= 0.0;
    case ConeTag::kEmpty: return false;
  }
  return false;
}

FactorCone conePolar(const FactorCone& c) {
  switch (c.tag) {
    case ConeTag::kZeroPoint:
      return {c.dim == 1 ? ConeTag::kRealLine : ConeTag::kFullPlane, c.dim};
    case ConeTag::kLineA: return planeCone(ConeTag::kLineB);
    case ConeTag::kLineB: return planeCone(ConeTag::kLineA);
    case ConeTag::kSwitchUnion:
    case ConeTag::kFullPlane: return planeCone(ConeTag::kZeroPoint);
    case ConeTag::kRealLine: return lineCone(ConeTag::kZeroPoint);
    case ConeTag::kHalfLineNonPos: return lineCone(ConeTag::kHalfLineNonNeg);
    case ConeTag::kHalfLineNonNeg: return lineCone(ConeTag::kHalfLineNonPos);
    case ConeTag::kEmpty:
      return {c.dim == 1 ? ConeTag::kRealLine : ConeTag::kFullPlane, c.dim};
  }
  return c;
}

bool coneIsConvex(const FactorCone& c) { return c.tag != ConeTag::kSwitchUnion; }

namespace {

bool isZero(double x, double tol) { return std::abs(x) <= tol; }

void requireInSet(Pair a, double tol) {
  if (!isZero(a.first, tol) && !isZero(a.second, tol))
    throw NotInSet("point (" + formatDouble(a.first) + "," +
                   formatDouble(a.second) + ") is not in the switching set");
}

}  // namespace

FactorCone tangentSwitch(Pair a, double tol) {
  requireInSet(a, tol);
  const bool z1 = isZero(a.first, tol), z2 = isZero(a.second, tol);
  if (z1 && z2) return planeCone(ConeTag::kSwitchUnion);
  return planeCone(z1 ? ConeTag::kLineB : ConeTag::kLineA);
}

FactorCone regularNormalSwitch(Pair a, double tol) {
  requireInSet(a, tol);
  const bool z1 = isZero(a.first, tol), z2 = isZero(a.second, tol);
  if (z1 && z2) return planeCone(ConeTag::kZeroPoint);
  return planeCone(z1 ? ConeTag::kLineA : ConeTag::kLineB);
}

FactorCone limitingNormalSwitch(Pair a, double tol) {
  requireInSet(a, tol);
  const bool z1 = isZero(a.first, tol), z2 = isZero(a.second, tol);
  if (z1 && z2) return planeCone(ConeTag::kSwitchUnion);
  return planeCone(z1 ? ConeTag::kLineA : ConeTag::kLineB);
}

FactorCone directionalNormalSwitch(Pair a, Pair d, double tolA, double tolD) {
  requireInSet(a, tolA);
  const bool a1 = isZero(a.first, tolA), a2 = isZero(a.second, tolA);
  const bool d1 = isZero(d.first, tolD), d2 = isZero(d.second, tolD);
  if (a1 && !a2) return planeCone(d1 ? ConeTag::kLineA : ConeTag::kEmpty);
  if (!a1 && a2) return planeCone(d2 ? ConeTag::kLineB : ConeTag::kEmpty);
  if (d1 && d2) return planeCone(ConeTag::kSwitchUnion);
  if (d1) return planeCone(ConeTag::kLineA);
  if (d2) return planeCone(ConeTag::kLineB);
  return planeCone(ConeTag::kEmpty);
}

FactorCone regularNormalOfTangentSwitch(Pair a, Pair d, double tolA,
                                        double tolD) {
  const FactorCone n = directionalNormalSwitch(a, d, tolA, tolD);
  if (n.tag == ConeTag::kEmpty)
    throw NotInTangent("direction (" + formatDouble(d.first) + "," +
                       formatDouble(d.second) +
                       ") is not tangent to the switching set");
  // Only the fully degenerate row differs from the directional normal.
  if (n.tag == ConeTag::kSwitchUnion) return planeCone(ConeTag::kZeroPoint);
  return n;
}

bool ProductCone::isEmpty() const {
  for (const auto* part : {&ineq, &eq, &switches})
    for (const FactorCone& c : *part)
      if (c.tag == ConeTag::kEmpty) return true;
  return false;
}

int ProductCone::ambientDimension() const {
  return static_cast<int>(ineq.size() + eq.size() + 2 * switches.size());
}

std::string ProductCone::toString() const {
  std::string out;
  auto append = [&](const FactorCone& c) {
    if (!out.empty()) out += " x ";
    out += c.name();
  };
  for (const auto& c : ineq) append(c);
  for (const auto& c : eq) append(c);
  for (const auto& c : switches) append(c);
  return out.empty() ? "{}" : out;
}

ProductCone productTangent(const ActivePattern& pat) {
  ProductCone out;
  const PointData& pd = pat.at;
  std::vector<bool> active(pat.p(), false);
  for (int i : pat.Ig) active[i] = true;
  for (int i = 0; i < pat.p(); ++i) {
    if (active[i])
      out.ineq.push_back(lineCone(ConeTag::kHalfLineNonPos));
    else if (pd.g[i] < 0)
      out.ineq.push_back(lineCone(ConeTag::kRealLine));
    else
      out.ineq.push_back(lineCone(ConeTag::kEmpty));
  }
  for (int j = 0; j < pat.q(); ++j)
    out.eq.push_back(lineCone(std::abs(pd.h[j]) <= pat.tolAct
                                  ? ConeTag::kZeroPoint
                                  : ConeTag::kEmpty));
  for (int i = 0; i < pat.m(); ++i)
    out.switches.push_back(tangentSwitch({pd.G[i], pd.H[i]}, pat.tolAct));
  return out;
}

ProductCone productDirectionalNormal(const DirectionalPattern& dp) {
  const ActivePattern& pat = dp.base;
  const PointData& pd = pat.at;
  const double tol = dp.tolDir;
  ProductCone out;
  std::vector<bool> active(pat.p(), false);
  for (int i : pat.Ig) active[i] = true;
  for (int i = 0; i < pat.p(); ++i) {
    if (!active[i]) {
      out.ineq.push_back(lineCone(pd.g[i] < 0 ? ConeTag::kZeroPoint
                                              : ConeTag::kEmpty));
      continue;
    }
    const double s = pd.Jg.row(i).dot(dp.d);
    if (std::abs(s) <= tol)
      out.ineq.push_back(lineCone(ConeTag::kHalfLineNonNeg));
    else if (s < 0)
      out.ineq.push_back(lineCone(ConeTag::kZeroPoint));
    else
      out.ineq.push_back(lineCone(ConeTag::kEmpty));
  }
  for (int j = 0; j < pat.q(); ++j) {
    const bool ok = std::abs(pd.h[j]) <= pat.tolAct &&
                    std::abs(pd.Jh.row(j).dot(dp.d)) <= tol;
    out.eq.push_back(lineCone(ok ? ConeTag::kRealLine : ConeTag::kEmpty));
  }
  for (int i = 0; i < pat.m(); ++i)
    out.switches.push_back(directionalNormalSwitch(
        {pd.G[i], pd.H[i]}, {pd.JG.row(i).dot(dp.d), pd.JH.row(i).dot(dp.d)},
        pat.tolAct, tol));
  return out;
}

SignPattern multiplierPattern(const ProductCone& normal) {
  if (normal.isEmpty())
    throw std::invalid_argument("empty product cone has no multiplier pattern");
  const int p = static_cast<int>(normal.ineq.size());
  const int q = static_cast<int>(normal.eq.size());
  const int m = static_cast<int>(normal.switches.size());
  SignPattern pat(p + q + 2 * m, Sign::kFree);
  auto scalar = [](const FactorCone& c) {
    switch (c.tag) {
      case ConeTag::kZeroPoint: return Sign::kZero;
      case ConeTag::kRealLine: return Sign::kFree;
      case ConeTag::kHalfLineNonNeg: return Sign::kNonNeg;
      default:
        throw std::invalid_argument("factor " + c.name() +
                                    " is not a multiplier sign");
    }
  };
  for (int i = 0; i < p; ++i) pat.set(i, scalar(normal.ineq[i]));
  for (int j = 0; j < q; ++j) pat.set(p + j, scalar(normal.eq[j]));
  for (int i = 0; i < m; ++i) {
    const int a = p + q + i, b = p + q + m + i;
    switch (normal.switches[i].tag) {
      case ConeTag::kZeroPoint:
        pat.set(a, Sign::kZero);
        pat.set(b, Sign::kZero);
        break;
      case ConeTag::kLineA: pat.set(b, Sign::kZero); break;
      case ConeTag::kLineB: pat.set(a, Sign::kZero); break;
      // Case 0 keeps the G multiplier (the LineA piece).
      case ConeTag::kSwitchUnion: pat.addComplementaryPair(b, a); break;
      case ConeTag::kFullPlane: break;
      default:
        throw std::invalid_argument("factor " + normal.switches[i].name() +
                                    " is not a switching multiplier set");
    }
  }
  return pat;
}

}  // namespace mpsc
