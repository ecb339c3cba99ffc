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

#include "mpsc/stationarity.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mpsc/cones.h"
#include "mpsc/errors.h"
#include "mpsc/format.h"
#include "mpsc/sampling.h"

namespace mpsc {

// ---------------------------------------------------------------------------
// Multipliers

MultiplierVector MultiplierVector::fromStacked(const Vector& x, int p, int q,
                                               int m) {
  if (x.size() != p + q + 2 * m)
    throw std::invalid_argument("multiplier vector has wrong length");
  MultiplierVector out;
  out.g = x.segment(0, p);
  out.h = x.segment(p, q);
  out.G = x.segment(p + q, m);
  out.H = x.segment(p + q + m, m);
  return out;
}

Vector MultiplierVector::stacked() const {
  Vector x(g.size() + h.size() + G.size() + H.size());
  x << g, h, G, H;
  return x;
}

std::string MultiplierVector::toString() const {
  return "(" + formatVector(asSpan(g)) + "; " + formatVector(asSpan(h)) +
         "; " + formatVector(asSpan(G)) + "; " + formatVector(asSpan(H)) + ")";
}

Matrix multiplierMatrix(const PointData& pd) {
  const int n = static_cast<int>(pd.z.size());
  const int p = static_cast<int>(pd.g.size());
  const int q = static_cast<int>(pd.h.size());
  const int m = static_cast<int>(pd.G.size());
  Matrix A(n, p + q + 2 * m);
  if (p) A.leftCols(p) = pd.Jg.transpose();
  if (q) A.middleCols(p, q) = pd.Jh.transpose();
  if (m) {
    A.middleCols(p + q, m) = pd.JG.transpose();
    A.middleCols(p + q + m, m) = pd.JH.transpose();
  }
  return A;
}

double stationarityResidual(const PointData& pd, const MultiplierVector& lam) {
  const Vector r = pd.gradF + multiplierMatrix(pd) * lam.stacked();
  return r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0;
}

const char* stationarityKindName(StationarityKind kind) {
  switch (kind) {
    case StationarityKind::kW: return "W";
    case StationarityKind::kM: return "M";
    case StationarityKind::kS: return "S";
    case StationarityKind::kWd: return "W(d)";
    case StationarityKind::kMd: return "M(d)";
    case StationarityKind::kSd: return "S(d)";
    case StationarityKind::kQ: return "Q";
    case StationarityKind::kQM: return "QM";
    case StationarityKind::kStrongM: return "StrongM(d)";
    case StationarityKind::kAmResidual: return "AM";
    case StationarityKind::kLinDescent: return "LinDescent";
    case StationarityKind::kSonc: return "SONC(d)";
    case StationarityKind::kSosc: return "SOSC";
  }
  return "?";
}

std::string WorkingSet::toString() const {
  return "Jg=" + formatIndexSet(Jg) + " JG=" + formatIndexSet(JG) +
         " JH=" + formatIndexSet(JH);
}

std::string StationarityVerdict::label() const {
  std::string out = stationarityKindName(kind);
  if (kind == StationarityKind::kQ && bipartition)
    out += "(" + bipartition->toString() + ")";
  return out;
}

// ---------------------------------------------------------------------------
// W / M / S

namespace {

StationarityKind plainKind(StationarityKind k) {
  switch (k) {
    case StationarityKind::kWd: return StationarityKind::kW;
    case StationarityKind::kMd: return StationarityKind::kM;
    case StationarityKind::kSd: return StationarityKind::kS;
    default: return k;
  }
}

StationarityKind directionalKind(StationarityKind k) {
  switch (k) {
    case StationarityKind::kW: return StationarityKind::kWd;
    case StationarityKind::kM: return StationarityKind::kMd;
    case StationarityKind::kS: return StationarityKind::kSd;
    default: return k;
  }
}

void requireFeasible(const ActivePattern& pat) {
  if (!pat.feasible())
    throw std::invalid_argument(
        "point is not feasible within the activity tolerance (residual " +
        formatDouble(pat.residual) + ")");
}

StationarityVerdict solveSystem(const PointData& pd, const SignPattern& sp,
                                StationarityKind kind,
                                const KernelOptions& ko) {
  StationarityVerdict v;
  v.kind = kind;
  const LinearCertificate cert =
      feasibleUnderPattern(multiplierMatrix(pd), -pd.gradF, sp, ko);
  v.holds = cert.found();
  if (v.holds) {
    v.multiplier = MultiplierVector::fromStacked(
        cert.witness(), static_cast<int>(pd.g.size()),
        static_cast<int>(pd.h.size()), static_cast<int>(pd.G.size()));
    v.residual = stationarityResidual(pd, *v.multiplier);
  }
  return v;
}

}  // namespace

SignPattern stationarityPattern(const DirectionalPattern& dp,
                                StationarityKind kind) {
  kind = plainKind(kind);
  if (kind != StationarityKind::kW && kind != StationarityKind::kM &&
      kind != StationarityKind::kS)
    throw std::invalid_argument("stationarityPattern: kind must be W, M or S");
  ProductCone normal = productDirectionalNormal(dp);
  for (FactorCone& c : normal.switches) {
    if (c.tag != ConeTag::kSwitchUnion) continue;
    if (kind == StationarityKind::kW) c.tag = ConeTag::kFullPlane;
    if (kind == StationarityKind::kS) c.tag = ConeTag::kZeroPoint;
  }
  return multiplierPattern(normal);
}

StationarityVerdict checkW(const ActivePattern& pat,
                           const StationarityOptions& opts) {
  requireFeasible(pat);
  return solveSystem(pat.at,
                     stationarityPattern(plainDirectional(pat), StationarityKind::kW),
                     StationarityKind::kW, opts.kernel);
}

StationarityVerdict checkM(const ActivePattern& pat,
                           const StationarityOptions& opts) {
  requireFeasible(pat);
  return solveSystem(pat.at,
                     stationarityPattern(plainDirectional(pat), StationarityKind::kM),
                     StationarityKind::kM, opts.kernel);
}

StationarityVerdict checkS(const ActivePattern& pat,
                           const StationarityOptions& opts) {
  requireFeasible(pat);
  return solveSystem(pat.at,
                     stationarityPattern(plainDirectional(pat), StationarityKind::kS),
                     StationarityKind::kS, opts.kernel);
}

StationarityVerdict checkDirectional(const DirectionalPattern& dp,
                                     StationarityKind kind,
                                     const StationarityOptions& opts) {
  requireFeasible(dp.base);
  const StationarityKind dk = directionalKind(kind);
  if (!dp.inLinearizationCone) {
    StationarityVerdict v;
    v.kind = dk;
    v.direction = dp.d;
    v.note = "direction not in the linearization cone";
    return v;
  }
  StationarityVerdict v =
      solveSystem(dp.base.at, stationarityPattern(dp, kind), dk, opts.kernel);
  v.direction = dp.d;
  if (!criticalConeMember(dp.base, dp.d, dp.tolDir))
    v.note = "direction not critical";
  return v;
}

// ---------------------------------------------------------------------------
// Q-stationarity

namespace {

// Zero pattern of the set R_SC: multipliers vanish off the active
// inequalities, lambda^G on IH and lambda^H on IG.
SignPattern restrictedPattern(const ActivePattern& pat) {
  const int p = pat.p(), q = pat.q(), m = pat.m();
  SignPattern sp(p + q + 2 * m, Sign::kFree);
  std::vector<bool> active(p, false);
  for (int i : pat.Ig) active[i] = true;
  for (int i = 0; i < p; ++i)
    if (!active[i]) sp.set(i, Sign::kZero);
  for (int i : pat.IH) sp.set(p + q + i, Sign::kZero);
  for (int i : pat.IG) sp.set(p + q + m + i, Sign::kZero);
  return sp;
}

}  // namespace

StationarityVerdict checkQ(const ActivePattern& pat, const Bipartition& bp,
                           const StationarityOptions& opts) {
  requireFeasible(pat);
  const Bipartition checked(bp.beta1, bp.beta2, pat.IGH);
  const int p = pat.p(), q = pat.q(), m = pat.m();
  const int N = p + q + 2 * m;
  const int n = pat.n();
  const Matrix A = multiplierMatrix(pat.at);
  const SignPattern rsc = restrictedPattern(pat);

  LinearProgram lp(2 * N);
  for (int k = 0; k < N; ++k) {
    lp.signs[k] = rsc[k];
    lp.signs[N + k] = rsc[k];
  }
  for (int i : pat.Ig) lp.signs[i] = Sign::kNonNeg;
  for (int r = 0; r < n; ++r) {
    Vector row = Vector::Zero(2 * N);
    row.head(N) = A.row(r).transpose();
    lp.addEquality(row, -pat.at.gradF[r]);
    Vector row2 = Vector::Zero(2 * N);
    row2.tail(N) = A.row(r).transpose();
    lp.addEquality(row2, 0.0);
  }
  auto unit = [&](int k, double s) {
    Vector e = Vector::Zero(2 * N);
    e[k] = s;
    return e;
  };
  for (int i : bp.beta1) {
    lp.addEquality(unit(p + q + m + i, 1.0), 0.0);
    Vector e = unit(p + q + i, 1.0);
    e[N + p + q + i] = -1.0;
    lp.addEquality(e, 0.0);
  }
  for (int i : bp.beta2) {
    lp.addEquality(unit(p + q + i, 1.0), 0.0);
    Vector e = unit(p + q + m + i, 1.0);
    e[N + p + q + m + i] = -1.0;
    lp.addEquality(e, 0.0);
  }
  for (int i : pat.Ig) {
    Vector e = unit(N + i, 1.0);
    e[i] = -1.0;
    lp.addInequality(e, 0.0);
  }

  StationarityVerdict v;
  v.kind = StationarityKind::kQ;
  v.bipartition = bp;
  const LpSolution sol = solveLinearProgram(lp, Vector(), false, opts.kernel.linTol);
  if (sol.status != LpStatus::kOptimal) return v;

  Vector lam = sol.x.head(N);
  Vector mu = sol.x.tail(N);
  for (int k = 0; k < N; ++k)
    if (rsc[k] == Sign::kZero) lam[k] = mu[k] = 0.0;
  for (int i : bp.beta1) lam[p + q + m + i] = 0.0;
  for (int i : bp.beta2) lam[p + q + i] = 0.0;
  v.multiplier = MultiplierVector::fromStacked(lam, p, q, m);
  v.mu = MultiplierVector::fromStacked(mu, p, q, m);
  v.residual = std::max(stationarityResidual(pat.at, *v.multiplier),
                        n ? (A * mu).lpNorm<Eigen::Infinity>() : 0.0);
  const double scale =
      std::max({1.0, pat.at.gradF.size() ? pat.at.gradF.lpNorm<Eigen::Infinity>() : 0.0,
                A.size() ? A.cwiseAbs().maxCoeff() *
                               std::max(lam.lpNorm<Eigen::Infinity>(),
                                        mu.lpNorm<Eigen::Infinity>())
                         : 0.0});
  bool ok = v.residual <= opts.kernel.linTol * scale;
  for (int i : pat.Ig)
    ok = ok && lam[i] >= -opts.kernel.linTol && lam[i] >= mu[i] - opts.kernel.linTol;
  if (!ok) throw std::logic_error("Q-stationarity certificate failed re-verification");
  v.holds = true;
  return v;
}

StationarityVerdict checkQM(const ActivePattern& pat,
                            const StationarityOptions& opts) {
  StationarityVerdict out;
  out.kind = StationarityKind::kQM;
  const SignPattern mPattern =
      stationarityPattern(plainDirectional(pat), StationarityKind::kM);
  for (const Bipartition& bp : enumerateBipartitions(pat, opts.bipartitionCap)) {
    StationarityVerdict q = checkQ(pat, bp, opts);
    if (!q.holds) continue;
    if (!mPattern.admits(q.multiplier->stacked(), opts.kernel.linTol))
      throw std::logic_error("Q multiplier is not an M-multiplier");
    out.holds = true;
    out.multiplier = q.multiplier;
    out.mu = q.mu;
    out.bipartition = bp;
    out.residual = q.residual;
    return out;
  }
  return out;
}

UpgradeReport checkQtoSUpgrade(const ActivePattern& pat, const Bipartition& bp,
                               const StationarityOptions& opts) {
  const Bipartition checked(bp.beta1, bp.beta2, pat.IGH);
  const int p = pat.p(), q = pat.q(), m = pat.m();
  const int N = p + q + 2 * m;
  const Matrix A = multiplierMatrix(pat.at);
  const SignPattern rsc = restrictedPattern(pat);
  std::vector<int> freeCols;
  std::vector<int> rowOf(N, -1);
  for (int k = 0; k < N; ++k)
    if (rsc[k] != Sign::kZero) {
      rowOf[k] = static_cast<int>(freeCols.size());
      freeCols.push_back(k);
    }
  Matrix sub(A.rows(), freeCols.size());
  for (size_t c = 0; c < freeCols.size(); ++c) sub.col(c) = A.col(freeCols[c]);
  const Matrix K = nullspaceBasis(sub, opts.kernel.rankTol);

  UpgradeReport report;
  report.nullspaceDimension = static_cast<int>(K.cols());
  auto vanishes = [&](int coord) {
    if (rowOf[coord] < 0 || K.cols() == 0) return true;
    return K.row(rowOf[coord]).lpNorm<Eigen::Infinity>() <= 1e-9;
  };
  auto name = [&](int coord) {
    const int local = coord - p - q;
    return (local < m ? "muG" : "muH") + std::to_string(local % m + 1);
  };
  auto test = [&](const char* condition, int i, int ip, int a, int b) {
    if (vanishes(a) || vanishes(b)) return;
    report.holds = false;
    report.failures.push_back({condition, i, ip, name(a) + "*" + name(b)});
  };
  const int G = p + q, H = p + q + m;
  for (int i : bp.beta1)
    for (int ip : bp.beta2) {
      test("cross-branch", i, ip, G + i, G + ip);
      test("cross-branch", i, ip, H + i, H + ip);
    }
  for (int i : bp.beta1)
    for (int ip : bp.beta1) test("first-branch", i, ip, G + i, H + ip);
  for (int i : bp.beta2)
    for (int ip : bp.beta2) test("second-branch", i, ip, G + i, H + ip);
  return report;
}

// ---------------------------------------------------------------------------
// Strong M-stationarity

namespace {

Matrix stackRows(const std::vector<Vector>& rows, int n) {
  Matrix M(rows.size(), n);
  for (size_t r = 0; r < rows.size(); ++r) M.row(r) = rows[r].transpose();
  return M;
}

std::vector<int> sortedUnion(std::vector<int> a, const std::vector<int>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

std::vector<Vector> workingFamily(const PointData& pd, const WorkingSet& ws) {
  std::vector<Vector> rows;
  for (int i : ws.Jg) rows.push_back(pd.Jg.row(i).transpose());
  for (int j = 0; j < pd.h.size(); ++j) rows.push_back(pd.Jh.row(j).transpose());
  for (int i : ws.JG) rows.push_back(pd.JG.row(i).transpose());
  for (int i : ws.JH) rows.push_back(pd.JH.row(i).transpose());
  return rows;
}

// Subsets of `items` ordered by size descending, then lexicographically.
std::vector<std::vector<int>> orderedSubsets(const std::vector<int>& items) {
  const int k = static_cast<int>(items.size());
  std::vector<std::vector<int>> out;
  for (uint64_t mask = 0; mask < (uint64_t{1} << k); ++mask) {
    std::vector<int> s;
    for (int j = 0; j < k; ++j)
      if ((mask >> j) & 1u) s.push_back(items[j]);
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
  return out;
}

}  // namespace

int directionalFamilyRank(const DirectionalPattern& dp, double rankTol) {
  const ActivePattern& pat = dp.base;
  WorkingSet all;
  all.Jg = dp.Igd;
  all.JG = sortedUnion(sortedUnion(pat.IG, dp.IGd), dp.IGHd);
  all.JH = sortedUnion(sortedUnion(pat.IH, dp.IHd), dp.IGHd);
  const auto rows = workingFamily(pat.at, all);
  return rank(stackRows(rows, pat.n()), rankTol);
}

std::vector<WorkingSet> enumerateWorkingSets(const DirectionalPattern& dp,
                                             const StationarityOptions& opts) {
  const ActivePattern& pat = dp.base;
  const int r = directionalFamilyRank(dp, opts.kernel.rankTol);
  const int kg = static_cast<int>(dp.Igd.size());
  const int kb = static_cast<int>(dp.IGHd.size());
  uint64_t candidates = uint64_t{1} << std::min(kg, 62);
  for (int j = 0; j < kb; ++j) {
    if (candidates > opts.workingSetCap) break;
    candidates *= 3;
  }
  if (kg > 62 || candidates > opts.workingSetCap)
    throw CapExceeded("working-set enumeration exceeds cap of " +
                      std::to_string(opts.workingSetCap) + " candidates");
  const std::vector<int> baseG = sortedUnion(pat.IG, dp.IGd);
  const std::vector<int> baseH = sortedUnion(pat.IH, dp.IHd);
  std::vector<bool> covered(pat.m(), false);
  for (int i : baseG) covered[i] = true;
  for (int i : baseH) covered[i] = true;
  for (int i : dp.IGHd) covered[i] = true;
  if (std::find(covered.begin(), covered.end(), false) != covered.end())
    return {};

  std::vector<WorkingSet> out;
  uint64_t pow3 = 1;
  for (int j = 0; j < kb; ++j) pow3 *= 3;
  for (const auto& Jg : orderedSubsets(dp.Igd)) {
    for (uint64_t c = 0; c < pow3; ++c) {
      WorkingSet ws;
      ws.Jg = Jg;
      std::vector<int> addG, addH;
      uint64_t code = c;
      for (int j = 0; j < kb; ++j) {
        const int choice = static_cast<int>(code % 3);
        code /= 3;
        if (choice != 1) addG.push_back(dp.IGHd[j]);
        if (choice != 0) addH.push_back(dp.IGHd[j]);
      }
      ws.JG = sortedUnion(baseG, addG);
      ws.JH = sortedUnion(baseH, addH);
      const int card = static_cast<int>(ws.Jg.size() + pat.q() + ws.JG.size() +
                                        ws.JH.size());
      if (card != r) continue;
      const auto rows = workingFamily(pat.at, ws);
      if (rank(stackRows(rows, pat.n()), opts.kernel.rankTol) != card) continue;
      out.push_back(std::move(ws));
    }
  }
  return out;
}

StationarityVerdict checkStrongM(const DirectionalPattern& dp,
                                 const StationarityOptions& opts) {
  requireFeasible(dp.base);
  StationarityVerdict v;
  v.kind = StationarityKind::kStrongM;
  v.direction = dp.d;
  if (!dp.inLinearizationCone) {
    v.note = "direction not in the linearization cone";
    return v;
  }
  const ActivePattern& pat = dp.base;
  const int p = pat.p(), q = pat.q(), m = pat.m();
  const SignPattern mPattern = stationarityPattern(dp, StationarityKind::kM);
  const auto sets = enumerateWorkingSets(dp, opts);
  if (sets.empty()) {
    v.note = "no working set";
    return v;
  }
  for (const WorkingSet& ws : sets) {
    SignPattern sp(p + q + 2 * m);
    for (int k = 0; k < sp.size(); ++k) sp.set(k, mPattern[k]);
    std::vector<bool> inJg(p, false), inJG(m, false), inJH(m, false);
    for (int i : ws.Jg) inJg[i] = true;
    for (int i : ws.JG) inJG[i] = true;
    for (int i : ws.JH) inJH[i] = true;
    for (int i = 0; i < p; ++i)
      if (!inJg[i]) sp.set(i, Sign::kZero);
    for (int i = 0; i < m; ++i) {
      if (!inJG[i] || inJH[i]) sp.set(p + q + i, Sign::kZero);
      if (!inJH[i] || inJG[i]) sp.set(p + q + m + i, Sign::kZero);
    }
    StationarityVerdict attempt =
        solveSystem(pat.at, sp, StationarityKind::kStrongM, opts.kernel);
    if (!attempt.holds) continue;
    if (!mPattern.admits(attempt.multiplier->stacked(), opts.kernel.linTol))
      throw std::logic_error("strong M multiplier is not an M(d)-multiplier");
    attempt.direction = dp.d;
    attempt.workingSet = ws;
    return attempt;
  }
  v.workingSet = sets.front();
  v.note = "no multiplier supported on a working set";
  return v;
}

// ---------------------------------------------------------------------------
// AM residual

double amResidual(const MpscInstance& inst, const Vector& z, double tolAct,
                  const StationarityOptions& opts) {
  const PointData pd = evaluatePoint(inst, z);
  const int p = inst.p(), q = inst.q(), m = inst.m();
  const int N = p + q + 2 * m;
  const int n = inst.n();
  const Matrix A = multiplierMatrix(pd);
  SignPattern sp(N + 1, Sign::kFree);
  for (int i = 0; i < p; ++i)
    sp.set(i, pd.g[i] >= -tolAct ? Sign::kNonNeg : Sign::kZero);
  for (int i = 0; i < m; ++i) {
    const bool gz = std::abs(pd.G[i]) <= tolAct;
    const bool hz = std::abs(pd.H[i]) <= tolAct;
    if (gz && hz)
      sp.addComplementaryPair(p + q + m + i, p + q + i);
    else if (gz)
      sp.set(p + q + m + i, Sign::kZero);
    else if (hz)
      sp.set(p + q + i, Sign::kZero);
  }
  sp.set(N, Sign::kNonNeg);
  checkPairCap(sp, opts.kernel.maxPairs);

  Vector objective = Vector::Zero(N + 1);
  objective[N] = 1.0;
  double best = std::numeric_limits<double>::infinity();
  for (uint64_t k = 0; k < sp.caseCount(); ++k) {
    const SignPattern convex = sp.convexCase(k);
    LinearProgram lp(N + 1);
    lp.signs = convex.signs();
    for (int r = 0; r < n; ++r) {
      Vector row(N + 1);
      row.head(N) = A.row(r).transpose();
      row[N] = -1.0;
      lp.addInequality(row, -pd.gradF[r]);
      row.head(N) *= -1.0;
      lp.addInequality(row, pd.gradF[r]);
    }
    const LpSolution sol = solveLinearProgram(lp, objective, false, opts.kernel.linTol);
    if (sol.status != LpStatus::kOptimal) continue;
    // Recompute the attained residual from the multipliers themselves.
    const Vector lam = sol.x.head(N);
    const Vector r = pd.gradF + A * lam;
    const double value = r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0;
    best = std::min(best, value);
  }
  return best;
}

AmSequenceReport certifyAmSequence(const MpscInstance& inst,
                                   const Vector& zStar,
                                   const std::vector<Vector>& points,
                                   double finalTol, double tolAct,
                                   const StationarityOptions& opts) {
  AmSequenceReport out;
  for (const Vector& z : points) {
    out.residuals.push_back(amResidual(inst, z, tolAct, opts));
    out.distances.push_back((z - zStar).norm());
  }
  if (points.empty()) return out;
  bool monotone = true;
  for (size_t k = 1; k < points.size(); ++k) {
    monotone = monotone && out.residuals[k] <= out.residuals[k - 1] + opts.kernel.linTol;
    monotone = monotone && out.distances[k] <= out.distances[k - 1] + opts.kernel.linTol;
  }
  out.certified = monotone && out.residuals.back() <= finalTol &&
                  out.distances.back() <= finalTol;
  return out;
}

// ---------------------------------------------------------------------------
// Linearized descent

DescentResult linearizedDescent(const ActivePattern& pat,
                                const StationarityOptions& opts) {
  requireFeasible(pat);
  const PointData& pd = pat.at;
  const int n = pat.n();
  DescentResult best;
  bool any = false;
  for (const Bipartition& bp : enumerateBipartitions(pat, opts.bipartitionCap)) {
    LinearProgram lp(n);
    for (int i : pat.Ig) lp.addInequality(pd.Jg.row(i).transpose(), 0.0);
    for (int j = 0; j < pat.q(); ++j) lp.addEquality(pd.Jh.row(j).transpose(), 0.0);
    for (int i : sortedUnion(pat.IG, bp.beta1))
      lp.addEquality(pd.JG.row(i).transpose(), 0.0);
    for (int i : sortedUnion(pat.IH, bp.beta2))
      lp.addEquality(pd.JH.row(i).transpose(), 0.0);
    for (int k = 0; k < n; ++k) {
      Vector e = Vector::Zero(n);
      e[k] = 1.0;
      lp.addInequality(e, 1.0);
      lp.addInequality(-e, 1.0);
    }
    const LpSolution sol = solveLinearProgram(lp, pd.gradF, false, opts.kernel.linTol);
    if (sol.status != LpStatus::kOptimal) continue;
    const double value = pd.gradF.dot(sol.x);
    if (!any || value < best.minimum - opts.kernel.linTol) {
      best.minimum = value;
      best.d = sol.x;
      best.branch = bp;
      any = true;
    }
  }
  best.descentFound = any && best.minimum < -opts.kernel.linTol;
  return best;
}

// ---------------------------------------------------------------------------
// Second order

Curvature curvatureAlong(const MpscInstance& inst, const Vector& z,
                         const Vector& d) {
  Curvature c;
  auto quad = [&](const SmoothFunction& fn) {
    return d.dot(fn.hessian(z) * d);
  };
  c.objective = quad(inst.f());
  c.constraints.resize(inst.multiplierDimension());
  int k = 0;
  for (const auto& fn : inst.g()) c.constraints[k++] = quad(fn);
  for (const auto& fn : inst.h()) c.constraints[k++] = quad(fn);
  for (const auto& sw : inst.switches()) c.constraints[k++] = quad(sw.G);
  for (const auto& sw : inst.switches()) c.constraints[k++] = quad(sw.H);
  return c;
}

namespace {

SecondOrderResult maximizeCurvature(const MpscInstance& inst,
                                    const PointData& pd, const Vector& d,
                                    const SignPattern& sp,
                                    const KernelOptions& ko) {
  SecondOrderResult out;
  const Curvature c = curvatureAlong(inst, pd.z, d);
  const MaximizeResult r =
      maximizeLinear(c.constraints, multiplierMatrix(pd), -pd.gradF, sp, ko);
  if (r.status == LpStatus::kInfeasible) return out;
  out.multiplierExists = true;
  if (r.status == LpStatus::kUnbounded) {
    out.unbounded = true;
    out.value = std::numeric_limits<double>::infinity();
    out.holds = true;
    return out;
  }
  out.value = c.objective + r.value;
  out.witness = MultiplierVector::fromStacked(r.argmax, inst.p(), inst.q(), inst.m());
  out.holds = out.value >= -ko.linTol;
  return out;
}

}  // namespace

SecondOrderResult secondOrderNecessary(const MpscInstance& inst,
                                       const DirectionalPattern& dp,
                                       const StationarityOptions& opts) {
  requireFeasible(dp.base);
  if (!dp.inLinearizationCone) return {};
  return maximizeCurvature(inst, dp.base.at, dp.d,
                           stationarityPattern(dp, StationarityKind::kM),
                           opts.kernel);
}

namespace {

bool sameDirection(const Vector& a, const Vector& b) {
  return (a - b).lpNorm<Eigen::Infinity>() <= 1e-9;
}

void addUnique(std::vector<Vector>& out, Vector v) {
  const double norm = v.norm();
  if (norm <= 1e-12) return;
  v /= norm;
  for (const Vector& w : out)
    if (sameDirection(v, w)) return;
  out.push_back(std::move(v));
}

}  // namespace

std::vector<Vector> criticalDirections(const MpscInstance& inst,
                                       const ActivePattern& pat,
                                       const SoscOptions& sosc, bool* exact) {
  const PointData& pd = pat.at;
  const int n = pat.n();
  const bool enumerate = n <= 3 && inst.constraintsAffine();
  if (exact) *exact = enumerate;
  std::vector<Vector> out;
  const auto bps = enumerateBipartitions(pat);
  for (size_t piece = 0; piece < bps.size(); ++piece) {
    const Bipartition& bp = bps[piece];
    std::vector<Vector> eqRows, ineqRows;
    for (int j = 0; j < pat.q(); ++j) eqRows.push_back(pd.Jh.row(j).transpose());
    for (int i : sortedUnion(pat.IG, bp.beta1)) eqRows.push_back(pd.JG.row(i).transpose());
    for (int i : sortedUnion(pat.IH, bp.beta2)) eqRows.push_back(pd.JH.row(i).transpose());
    for (int i : pat.Ig) ineqRows.push_back(pd.Jg.row(i).transpose());
    ineqRows.push_back(pd.gradF);
    const Matrix E = stackRows(eqRows, n);
    const Matrix I = stackRows(ineqRows, n);
    auto feasible = [&](const Vector& v) {
      const double scale = 1e-9 * std::max(1.0, v.lpNorm<Eigen::Infinity>());
      return I.rows() == 0 || (I * v).maxCoeff() <= scale;
    };
    std::vector<Vector> generators;
    if (enumerate) {
      Matrix EI(E.rows() + I.rows(), n);
      EI << E, I;
      const Matrix L = nullspaceBasis(EI);
      for (int c = 0; c < L.cols(); ++c) {
        generators.push_back(L.col(c));
        generators.push_back(-L.col(c));
      }
      const int ki = static_cast<int>(I.rows());
      if (ki > 12) throw CapExceeded("too many inequality rows for ray enumeration");
      for (uint64_t mask = 0; mask < (uint64_t{1} << ki); ++mask) {
        std::vector<Vector> rows = eqRows;
        for (int c = 0; c < L.cols(); ++c) rows.push_back(L.col(c));
        for (int j = 0; j < ki; ++j)
          if ((mask >> j) & 1u) rows.push_back(I.row(j).transpose());
        const Matrix K = nullspaceBasis(stackRows(rows, n));
        if (K.cols() != 1) continue;
        for (double s : {1.0, -1.0}) {
          const Vector v = s * K.col(0);
          if (feasible(v)) addUnique(generators, v);
        }
      }
      for (const Vector& g : generators) addUnique(out, g);
      for (int c = 0; c < sosc.combinationsPerPiece && !generators.empty(); ++c) {
        auto rng = streamRng(sosc.seed, Stream::kDirections,
                             piece * 100000 + static_cast<uint64_t>(c));
        Vector v = Vector::Zero(n);
        for (const Vector& g : generators)
          v += std::uniform_real_distribution<double>(0.0, 1.0)(rng) * g;
        if (feasible(v)) addUnique(out, v);
      }
    } else {
      const Matrix Z = E.rows() ? nullspaceBasis(E) : Matrix(Matrix::Identity(n, n));
      if (Z.cols() == 0) continue;
      for (int s = 0; s < sosc.samples; ++s) {
        auto rng = streamRng(sosc.seed, Stream::kDirections,
                             piece * 100000 + static_cast<uint64_t>(s));
        const Vector v = Z * unitSphere(rng, static_cast<int>(Z.cols()));
        if (feasible(v)) addUnique(out, v);
      }
    }
  }
  return out;
}

SoscReport secondOrderSufficient(const MpscInstance& inst,
                                 const ActivePattern& pat,
                                 const SoscOptions& sosc,
                                 const StationarityOptions& opts) {
  requireFeasible(pat);
  SoscReport report;
  report.verdict.kind = StationarityKind::kSosc;
  const auto dirs = criticalDirections(inst, pat, sosc, &report.exactEnumeration);
  const SignPattern plainS =
      stationarityPattern(plainDirectional(pat), StationarityKind::kS);
  report.plainRouteHolds = true;
  report.directionalRouteHolds = true;
  for (const Vector& d : dirs) {
    SoscDirection entry;
    entry.d = d;
    const SecondOrderResult plain =
        maximizeCurvature(inst, pat.at, d, plainS, opts.kernel);
    entry.plainMultiplier = plain.multiplierExists;
    entry.plainValue = plain.value;
    const DirectionalPattern dp = computeDirectionalIndexSets(pat, d);
    SecondOrderResult dir;
    if (dp.inLinearizationCone)
      dir = maximizeCurvature(inst, pat.at, d,
                              stationarityPattern(dp, StationarityKind::kS),
                              opts.kernel);
    entry.directionalMultiplier = dir.multiplierExists;
    entry.directionalValue = dir.value;
    entry.directionalWitness = dir.witness;
    report.plainRouteHolds = report.plainRouteHolds && plain.multiplierExists &&
                             plain.value >= sosc.sigma;
    report.directionalRouteHolds = report.directionalRouteHolds &&
                                   dir.multiplierExists && dir.value >= sosc.sigma;
    report.directions.push_back(std::move(entry));
  }
  report.verdict.holds = report.directionalRouteHolds;
  if (dirs.empty())
    report.verdict.note = "no critical directions";
  else if (!report.exactEnumeration)
    report.verdict.note = "sample-certified";
  if (!report.plainRouteHolds && report.directionalRouteHolds)
    report.verdict.note += std::string(report.verdict.note.empty() ? "" : "; ") +
                           "S-multiplier absent, directional route used";
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& e : report.directions)
    if (e.directionalMultiplier) worst = std::min(worst, e.directionalValue);
  report.verdict.residual = dirs.empty() ? 0.0 : worst;
  return report;
}

}  // namespace mpsc
