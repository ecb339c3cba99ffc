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

// Fixtures, a seeded corpus of small random instances, and brute-force
// oracles shared by the unit, property and acceptance tests.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mpsc/cones.h"
#include "mpsc/linkernel.h"
#include "mpsc/model.h"
#include "mpsc/parser.h"
#include "mpsc/sampling.h"

namespace mpsc::testing {

inline std::string fixturePath(const std::string& name) {
  return std::string(MPSC_FIXTURE_DIR) + "/" + name;
}

// min z1 + z2^2  s.t.  -z1 + z2 <= 0,  z1 * z2 = 0.
inline MpscInstance switchingExample() {
  return parseInstance(
      "vars: z1 z2\n"
      "objective: z1 + z2^2\n"
      "ineq: -z1 + z2\n"
      "switch: z1 , z2\n");
}

// G = -z1, H = z1 - z1^2 z2^2: the tightened problem loses CPLD at the
// origin while both branch problems keep LICQ.
inline MpscInstance cpldCounterexample() {
  return parseInstance(
      "vars: z1 z2\n"
      "objective: z1^2 + z2^2\n"
      "switch: -z1 , z1 - z1^2*z2^2\n");
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// ---------------------------------------------------------------------------
// Random corpus: n <= 4, p, q, m <= 2, affine or quadratic functions, with
// the origin feasible by construction.

inline Expr randomPolynomial(std::mt19937_64& rng, int n, bool quadratic,
                             double constant) {
  // Zero-heavy integer coefficients produce rank degeneracies often.
  std::uniform_int_distribution<int> coef(-4, 4);
  auto draw = [&] {
    const int c = coef(rng);
    return std::abs(c) > 2 ? 0 : c;
  };
  Expr e = Expr::constant(constant);
  for (int j = 0; j < n; ++j)
    if (int c = draw()) e = e + Expr::constant(c) * Expr::var(j);
  if (quadratic)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k <= j; ++k)
        if (int c = draw()) e = e + Expr::constant(c) * Expr::var(j) * Expr::var(k);
  return e;
}

inline MpscInstance randomInstance(uint64_t seed, uint64_t index) {
  auto rng = streamRng(seed, Stream::kCorpus, index);
  std::uniform_int_distribution<int> nD(1, 4), cnt(0, 2), four(0, 3);
  const int n = nD(rng);
  const int p = cnt(rng), q = std::min(cnt(rng), n), m = 1 + cnt(rng) % 2;
  auto quad = [&] { return four(rng) < 2; };
  Expr f = randomPolynomial(rng, n, quad(), 0.0);
  std::vector<Expr> g, h;
  std::vector<std::pair<Expr, Expr>> sw;
  for (int i = 0; i < p; ++i) g.push_back(randomPolynomial(rng, n, quad(), four(rng) < 3 ? 0.0 : -1.0));
  for (int i = 0; i < q; ++i) h.push_back(randomPolynomial(rng, n, quad(), 0.0));
  for (int i = 0; i < m; ++i) {
    const int kind = four(rng);  // 0, 1: biactive; 2: G zero only; 3: H zero only
    const double cG = kind == 3 ? 1.0 : 0.0, cH = kind == 2 ? -1.0 : 0.0;
    sw.emplace_back(randomPolynomial(rng, n, quad(), cG), randomPolynomial(rng, n, quad(), cH));
  }
  return MpscInstance(n, f, g, h, sw);
}

// ---------------------------------------------------------------------------
// Basic-solution oracle for {A x = b, x respects a sign pattern}.

// Convex case k of `pat` (same bit convention as SignPattern::convexCase,
// restated here so the oracle does not depend on it).
inline std::vector<Sign> oracleCase(const SignPattern& pat, uint64_t k) {
  std::vector<Sign> s = pat.signs();
  for (size_t j = 0; j < pat.pairs().size(); ++j) {
    const auto [a, b] = pat.pairs()[j];
    s[((k >> j) & 1) ? b : a] = Sign::kZero;
  }
  return s;
}

// Splits free columns into +/- copies, then searches every linearly
// independent column subset of size <= rows for a nonnegative solution.
inline bool oracleFeasibleSigns(const Matrix& A, const Vector& b,
                                const std::vector<Sign>& signs, double tol = 1e-8) {
  std::vector<Vector> cols;
  for (int j = 0; j < A.cols(); ++j) {
    if (signs[j] == Sign::kZero) continue;
    cols.push_back(A.col(j));
    if (signs[j] == Sign::kFree) cols.push_back(-A.col(j));
  }
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  if (b.norm() <= tol * scale) return true;
  const int k = static_cast<int>(cols.size());
  const int rows = static_cast<int>(A.rows());
  std::vector<int> pick;
  std::function<bool(int)> rec = [&](int start) -> bool {
    if (!pick.empty()) {
      Matrix S(rows, static_cast<Eigen::Index>(pick.size()));
      for (size_t c = 0; c < pick.size(); ++c) S.col(static_cast<Eigen::Index>(c)) = cols[pick[c]];
      Eigen::FullPivLU<Matrix> lu(S);
      lu.setThreshold(1e-10);
      if (lu.rank() < static_cast<int>(pick.size())) return false;  // supersets dependent too
      const Vector x = S.colPivHouseholderQr().solve(b);
      if ((S * x - b).norm() <= tol * scale && x.minCoeff() >= -tol) return true;
    }
    if (static_cast<int>(pick.size()) == rows) return false;
    for (int c = start; c < k; ++c) {
      pick.push_back(c);
      if (rec(c + 1)) return true;
      pick.pop_back();
    }
    return false;
  };
  return rec(0);
}

inline bool oracleFeasible(const Matrix& A, const Vector& b, const SignPattern& pat) {
  for (uint64_t k = 0; k < pat.caseCount(); ++k)
    if (oracleFeasibleSigns(A, b, oracleCase(pat, k))) return true;
  return false;
}

// Nonzero x with A x = 0 under the pattern: either the free block has a
// kernel, or the nonnegative part can be normalized to sum 1.
inline bool oracleNonzeroKernel(const Matrix& A, const SignPattern& pat) {
  for (uint64_t k = 0; k < pat.caseCount(); ++k) {
    const std::vector<Sign> s = oracleCase(pat, k);
    std::vector<int> freeCols;
    for (int j = 0; j < A.cols(); ++j)
      if (s[j] == Sign::kFree) freeCols.push_back(j);
    if (!freeCols.empty()) {
      Matrix F(A.rows(), static_cast<Eigen::Index>(freeCols.size()));
      for (size_t c = 0; c < freeCols.size(); ++c) F.col(static_cast<Eigen::Index>(c)) = A.col(freeCols[c]);
      Eigen::FullPivLU<Matrix> lu(F);
      lu.setThreshold(1e-10);
      if (lu.rank() < static_cast<int>(freeCols.size())) return true;
    }
    Matrix Ae(A.rows() + 1, A.cols());
    Ae.topRows(A.rows()) = A;
    Vector be = Vector::Zero(A.rows() + 1);
    be(A.rows()) = 1.0;
    bool anyNonNeg = false;
    for (int j = 0; j < A.cols(); ++j) {
      Ae(A.rows(), j) = s[j] == Sign::kNonNeg ? 1.0 : 0.0;
      anyNonNeg = anyNonNeg || s[j] == Sign::kNonNeg;
    }
    if (anyNonNeg && oracleFeasibleSigns(Ae, be, s)) return true;
  }
  return false;
}

// Random 5x8 integer system with a random sign pattern and up to two
// complementary pairs. Half of the right-hand sides come from a
// pattern-respecting point, so both outcomes are common.
struct RandomSystem {
  Matrix A;
  Vector b;
  SignPattern pat;
};

inline RandomSystem randomSystem(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coef(-2, 2), sign(0, 2), pairs(0, 2), coin(0, 1);
  RandomSystem s{Matrix(5, 8), Vector(5), SignPattern(8)};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 8; ++j) s.A(i, j) = coef(rng);
  for (int j = 0; j < 8; ++j) {
    const int c = sign(rng);
    s.pat.set(j, c == 0 ? Sign::kFree : c == 1 ? Sign::kNonNeg : Sign::kZero);
  }
  const int np = pairs(rng);
  for (int k = 0; k < np; ++k) s.pat.addComplementaryPair(2 * k, 2 * k + 5);
  Vector x(8);
  for (int j = 0; j < 8; ++j) x(j) = coef(rng);
  if (coin(rng)) {
    for (int j = 0; j < 8; ++j) {
      if (s.pat[j] == Sign::kZero) x(j) = 0;
      if (s.pat[j] == Sign::kNonNeg) x(j) = std::abs(x(j));
    }
    for (const auto& [a, c] : s.pat.pairs()) x(coin(rng) ? a : c) = 0;
  }
  s.b = s.A * x;
  return s;
}

// ---------------------------------------------------------------------------
// Sampling oracles for the switching-set cones, built from the definitions
// rather than the tables.

inline const std::vector<double>& oracleSteps() {
  static const std::vector<double> t{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  return t;
}

inline bool inSwitchSet(double a1, double a2, double tol = 1e-12) {
  return std::min(std::abs(a1), std::abs(a2)) <= tol;
}

// Discretized Bouligand tangent: some step t and d' within 1e-3 of d with
// a + t d' in the set. Moving one coordinate of d suffices. Steps shrink
// with |a| so they never reach across to the other axis.
inline bool oracleTangent(Pair a, Pair d) {
  const double r = std::hypot(a.first, a.second);
  const double scale = r > 0 ? std::min(r, 1.0) : 1.0;
  for (double s : oracleSteps()) {
    const double t = s * scale;
    if (std::abs(a.first + t * d.first) <= 1e-3 * t) return true;
    if (std::abs(a.second + t * d.second) <= 1e-3 * t) return true;
  }
  return false;
}

// Unit directions used to discretize cones in the plane: axes exactly plus
// a fine angular grid.
inline std::vector<Pair> oracleCircle() {
  std::vector<Pair> out{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int k = 0; k < 720; ++k) {
    const double th = (k + 0.25) * M_PI / 360.0;
    out.push_back({std::cos(th), std::sin(th)});
  }
  return out;
}

// A cone known through sampled generator families: zeta is a member when it
// lies (up to slack) in the polar of at least one family.
struct OracleCone {
  std::vector<std::vector<Pair>> polarOf;
  double slack = 1e-9;

  bool member(Pair zeta) const {
    for (const auto& gens : polarOf) {
      bool ok = true;
      for (const Pair& v : gens)
        if (zeta.first * v.first + zeta.second * v.second > slack) {
          ok = false;
          break;
        }
      if (ok) return true;
    }
    return false;
  }

  void add(std::vector<Pair> gens) {
    for (const auto& g : polarOf)
      if (g.size() == gens.size() &&
          std::equal(g.begin(), g.end(), gens.begin(), [](Pair x, Pair y) {
            return x.first == y.first && x.second == y.second;
          }))
        return;
    polarOf.push_back(std::move(gens));
  }
};

inline std::vector<Pair> oracleTangentGenerators(Pair a) {
  std::vector<Pair> out;
  for (const Pair& u : oracleCircle())
    if (oracleTangent(a, u)) out.push_back(u);
  return out;
}

// Regular normal cone: polar of the tangent cone.
inline OracleCone oracleRegularNormal(Pair a) {
  OracleCone c;
  c.add(oracleTangentGenerators(a));
  return c;
}

// Points of the switching set a + t u reachable with step t and direction
// within 1e-3 of u (one coordinate moved).
inline std::vector<Pair> oracleNearbyPoints(Pair a, Pair u, double t) {
  std::vector<Pair> out;
  const Pair x{a.first + t * u.first, a.second + t * u.second};
  if (inSwitchSet(x.first, x.second)) out.push_back(x);
  if (std::abs(x.first) <= 1e-3 * t) out.push_back({0.0, x.second});
  if (std::abs(x.second) <= 1e-3 * t) out.push_back({x.first, 0.0});
  return out;
}

// Directional limiting normal: zeta within 1e-3 of the regular normal cone at
// some a + t d' in the set.
inline void addDirectionalNormal(OracleCone& c, Pair a, Pair d) {
  for (double t : oracleSteps())
    for (const Pair& x : oracleNearbyPoints(a, d, t)) c.add(oracleTangentGenerators(x));
}

// Limiting normal: the directional cones over every direction.
inline OracleCone oracleLimitingNormal(Pair a) {
  OracleCone c;
  c.slack = 1e-3;
  addDirectionalNormal(c, a, {0, 0});
  for (const Pair& u : oracleCircle()) addDirectionalNormal(c, a, u);
  return c;
}

// With d = 0 every sequence approaching a is admissible, so the cone is the
// limiting normal cone.
inline OracleCone oracleDirectionalNormal(Pair a, Pair d) {
  if (d.first == 0.0 && d.second == 0.0) return oracleLimitingNormal(a);
  OracleCone c;
  c.slack = 1e-3;
  addDirectionalNormal(c, a, d);
  return c;
}

// Regular normal of the tangent cone T(a) at d: polar of the tangent cone of
// T(a) at d, sampled the same way as the set's.
inline OracleCone oracleRegularNormalOfTangent(Pair a, Pair d) {
  // The switching set is conic around a, so x lies in T(a) exactly when
  // a short step along x stays in the set.
  auto inT = [&](Pair x) {
    const double r = std::hypot(a.first, a.second);
    const double s = 1e-6 * (r > 0 ? std::min(r, 1.0) : 1.0);
    return inSwitchSet(a.first + s * x.first, a.second + s * x.second, 0.0);
  };
  std::vector<Pair> gens;
  for (const Pair& v : oracleCircle()) {
    bool tangent = false;
    for (double t : oracleSteps()) {
      const Pair x{d.first + t * v.first, d.second + t * v.second};
      for (const Pair& w : {Pair{x.first, 0.0}, Pair{0.0, x.second}, x})
        if (std::hypot(w.first - x.first, w.second - x.second) <= 1e-3 * t && inT(w))
          tangent = true;
    }
    if (tangent) gens.push_back(v);
  }
  OracleCone c;
  c.add(std::move(gens));
  return c;
}

// 100 x 100 grid over [-5, 4.9]^2 with both axes hit exactly.
inline std::vector<Pair> probeGrid() {
  std::vector<Pair> out;
  out.reserve(10000);
  for (int i = -50; i < 50; ++i)
    for (int j = -50; j < 50; ++j) out.push_back({i / 10.0, j / 10.0});
  return out;
}

// One row of the switching-cone tables: which cone, the inputs, and the tag
// the table prescribes.
enum class ConeKind { kTangent, kRegularNormal, kLimitingNormal, kDirectionalNormal, kRegularNormalOfTangent };

struct ConeRow {
  ConeKind kind;
  Pair a;
  Pair d;
  ConeTag expected;
  const char* label;
};

inline std::vector<ConeRow> coneTableRows() {
  using K = ConeKind;
  using T = ConeTag;
  const Pair onB{0, 2}, origin{0, 0}, onA{-1.5, 0};
  return {
      {K::kTangent, onB, {}, T::kLineB, "tangent, a1 = 0, a2 != 0"},
      {K::kTangent, origin, {}, T::kSwitchUnion, "tangent, a = 0"},
      {K::kTangent, onA, {}, T::kLineA, "tangent, a1 != 0, a2 = 0"},
      {K::kRegularNormal, onB, {}, T::kLineA, "regular normal, a1 = 0, a2 != 0"},
      {K::kRegularNormal, origin, {}, T::kZeroPoint, "regular normal, a = 0"},
      {K::kRegularNormal, onA, {}, T::kLineB, "regular normal, a1 != 0, a2 = 0"},
      {K::kLimitingNormal, onB, {}, T::kLineA, "limiting normal, a1 = 0, a2 != 0"},
      {K::kLimitingNormal, origin, {}, T::kSwitchUnion, "limiting normal, a = 0"},
      {K::kLimitingNormal, onA, {}, T::kLineB, "limiting normal, a1 != 0, a2 = 0"},
      {K::kRegularNormalOfTangent, onB, {0, 0.7}, T::kLineA, "normal of tangent, a1 = 0, a2 != 0, d1 = 0"},
      {K::kRegularNormalOfTangent, onA, {0.7, 0}, T::kLineB, "normal of tangent, a1 != 0, a2 = 0, d2 = 0"},
      {K::kRegularNormalOfTangent, origin, {0, -1}, T::kLineA, "normal of tangent, a = 0, d1 = 0, d2 != 0"},
      {K::kRegularNormalOfTangent, origin, {1, 0}, T::kLineB, "normal of tangent, a = 0, d1 != 0, d2 = 0"},
      {K::kRegularNormalOfTangent, origin, {0, 0}, T::kZeroPoint, "normal of tangent, a = 0, d = 0"},
      {K::kDirectionalNormal, onB, {0, 0.7}, T::kLineA, "directional normal, a1 = 0, a2 != 0, d1 = 0"},
      {K::kDirectionalNormal, onA, {0.7, 0}, T::kLineB, "directional normal, a1 != 0, a2 = 0, d2 = 0"},
      {K::kDirectionalNormal, origin, {0, -1}, T::kLineA, "directional normal, a = 0, d1 = 0, d2 != 0"},
      {K::kDirectionalNormal, origin, {1, 0}, T::kLineB, "directional normal, a = 0, d1 != 0, d2 = 0"},
      {K::kDirectionalNormal, origin, {0, 0}, T::kSwitchUnion, "directional normal, a = 0, d = 0"},
  };
}

inline FactorCone computeCone(const ConeRow& r, double tol = 1e-8) {
  switch (r.kind) {
    case ConeKind::kTangent: return tangentSwitch(r.a, tol);
    case ConeKind::kRegularNormal: return regularNormalSwitch(r.a, tol);
    case ConeKind::kLimitingNormal: return limitingNormalSwitch(r.a, tol);
    case ConeKind::kDirectionalNormal: return directionalNormalSwitch(r.a, r.d, tol);
    case ConeKind::kRegularNormalOfTangent: return regularNormalOfTangentSwitch(r.a, r.d, tol);
  }
  return {};
}

// Number of grid probes on which the computed tag and the sampling oracle
// disagree.
inline int coneOracleDisagreements(const ConeRow& r, const FactorCone& c) {
  std::function<bool(Pair)> oracle;
  OracleCone oc;
  switch (r.kind) {
    case ConeKind::kTangent:
      oracle = [&](Pair z) { return oracleTangent(r.a, z); };
      break;
    case ConeKind::kRegularNormal: oc = oracleRegularNormal(r.a); break;
    case ConeKind::kLimitingNormal: oc = oracleLimitingNormal(r.a); break;
    case ConeKind::kDirectionalNormal: oc = oracleDirectionalNormal(r.a, r.d); break;
    case ConeKind::kRegularNormalOfTangent: oc = oracleRegularNormalOfTangent(r.a, r.d); break;
  }
  if (!oracle) oracle = [&](Pair z) { return oc.member(z); };
  int bad = 0;
  for (const Pair& z : probeGrid()) {
    const double v[2] = {z.first, z.second};
    if (coneMember(c, std::span<const double>(v, 2)) != oracle(z)) ++bad;
  }
  return bad;
}

}  // namespace mpsc::testing
