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

#include "mpsc/cq.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "mpsc/cones.h"
#include "mpsc/format.h"
#include "mpsc/sampling.h"
#include "mpsc/stationarity.h"

namespace mpsc {

const char* cqVerdictName(CqVerdict v) {
  switch (v) {
    case CqVerdict::kHolds: return "HOLDS";
    case CqVerdict::kViolated: return "VIOLATED";
    case CqVerdict::kHoldsOnSamples: return "HOLDS-ON-SAMPLES";
    case CqVerdict::kViolatedOnSamples: return "VIOLATED-ON-SAMPLES";
    case CqVerdict::kInconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

const char* nlpCqName(NlpCq which) {
  switch (which) {
    case NlpCq::kLicq: return "LICQ";
    case NlpCq::kMfcq: return "MFCQ";
    case NlpCq::kCrcq: return "CRCQ";
    case NlpCq::kRcrcq: return "RCRCQ";
    case NlpCq::kCpld: return "CPLD";
    case NlpCq::kRcpld: return "RCPLD";
    case NlpCq::kCrsc: return "CRSC";
  }
  return "?";
}

std::optional<NlpCq> parseNlpCq(const std::string& name) {
  std::string up;
  for (char c : name) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (NlpCq w : {NlpCq::kLicq, NlpCq::kMfcq, NlpCq::kCrcq, NlpCq::kRcrcq,
                  NlpCq::kCpld, NlpCq::kRcpld, NlpCq::kCrsc})
    if (up == nlpCqName(w)) return w;
  return std::nullopt;
}

namespace {

constexpr double kNonzeroTol = 1e-12;
// Relative margin a sign condition must clear to count as strictly positive.
constexpr double kStrictMargin = 1e-12;

bool isDirectional(const DirectionalPattern& dp) {
  return dp.d.size() > 0 && dp.d.lpNorm<Eigen::Infinity>() > 0.0;
}

CqReport startReport(std::string name, const DirectionalPattern* dp) {
  CqReport r;
  r.name = std::move(name);
  if (dp && isDirectional(*dp)) r.direction = dp->d;
  return r;
}

CqReport inconclusive(CqReport r, std::string why) {
  r.verdict = CqVerdict::kInconclusive;
  r.note = std::move(why);
  return r;
}

std::vector<int> sortedUnion(std::vector<int> a, const std::vector<int>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

Matrix selectColumns(const Matrix& A, const std::vector<int>& cols) {
  Matrix out(A.rows(), static_cast<Eigen::Index>(cols.size()));
  for (size_t k = 0; k < cols.size(); ++k) out.col(k) = A.col(cols[k]);
  return out;
}

Vector embed(const Vector& x, const std::vector<int>& cols, int size) {
  Vector out = Vector::Zero(size);
  for (size_t k = 0; k < cols.size(); ++k) out[cols[k]] = x[k];
  return out;
}

// Unit max-norm by positive scaling; keeps signs and curvature.
Vector scaleRay(Vector v) {
  const double mx = v.cwiseAbs().maxCoeff();
  if (mx == 0.0) return v;
  v /= mx;
  for (Eigen::Index k = 0; k < v.size(); ++k)
    if (std::abs(v[k]) < 1e-15) v[k] = 0.0;
  return v;
}

// Unit max-norm with a positive largest-magnitude entry. Only for rays of
// a subspace, where the sign flip is free.
Vector normalizeRay(Vector v) {
  Eigen::Index at = 0;
  const double mx = v.cwiseAbs().maxCoeff(&at);
  if (mx == 0.0) return v;
  v /= mx;
  if (v[at] < 0) v = -v;
  for (Eigen::Index k = 0; k < v.size(); ++k)
    if (std::abs(v[k]) < 1e-15) v[k] = 0.0;
  return v;
}

std::string stackedLabel(int col, int p, int q, int m) {
  if (col < p) return "g" + std::to_string(col + 1);
  if (col < p + q) return "h" + std::to_string(col - p + 1);
  if (col < p + q + m) return "G" + std::to_string(col - p - q + 1);
  return "H" + std::to_string(col - p - q - m + 1);
}

std::string familyString(const std::vector<int>& cols,
                         const std::vector<std::string>& labels) {
  std::string out = "{";
  for (size_t k = 0; k < cols.size(); ++k) {
    if (k) out += ",";
    out += labels[cols[k]];
  }
  return out + "}";
}

std::vector<std::string> stackedLabels(int p, int q, int m) {
  std::vector<std::string> out;
  for (int c = 0; c < p + q + 2 * m; ++c) out.push_back(stackedLabel(c, p, q, m));
  return out;
}

void verifyKernelWitness(const Matrix& A, const Vector& w, double tol,
                         const char* what) {
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff() * w.lpNorm<Eigen::Infinity>());
  if (w.lpNorm<Eigen::Infinity>() == 0.0 ||
      (A * w).lpNorm<Eigen::Infinity>() > tol * scale)
    throw std::logic_error(std::string(what) + " witness fails re-verification");
}

// Stacked columns of the gradient family whose rank defines MPSC-LICQ(d).
std::vector<int> directionalFamily(const DirectionalPattern& dp) {
  const ActivePattern& pat = dp.base;
  const int p = pat.p(), q = pat.q(), m = pat.m();
  std::vector<int> cols;
  for (int i : dp.Igd) cols.push_back(i);
  for (int j = 0; j < q; ++j) cols.push_back(p + j);
  for (int i : sortedUnion(sortedUnion(pat.IG, dp.IGd), dp.IGHd))
    cols.push_back(p + q + i);
  for (int i : sortedUnion(sortedUnion(pat.IH, dp.IHd), dp.IGHd))
    cols.push_back(p + q + m + i);
  return cols;
}

std::optional<CqReport> directionalGuard(const CqReport& r,
                                         const DirectionalPattern& dp) {
  if (!dp.base.feasible()) return inconclusive(r, "point is not feasible");
  if (isDirectional(dp) && !dp.inLinearizationCone)
    return inconclusive(r, "direction is not in the linearization cone");
  return std::nullopt;
}

// Stacked constraint values (g, h, G, H) at z.
Vector constraintValues(const MpscInstance& inst, const Vector& z) {
  Vector out(inst.multiplierDimension());
  int k = 0;
  for (const auto& fn : inst.g()) out[k++] = fn.value(z);
  for (const auto& fn : inst.h()) out[k++] = fn.value(z);
  for (const auto& sw : inst.switches()) out[k++] = sw.G.value(z);
  for (const auto& sw : inst.switches()) out[k++] = sw.H.value(z);
  return out;
}

// Candidate multipliers for the sequence search: per complementarity face, a
// kernel basis of the free columns (both signs) and one LP witness per
// nonnegative coordinate.
std::vector<Vector> violatingRays(const Matrix& A, const SignPattern& sp,
                                  int maxPerFace, const KernelOptions& ko) {
  checkPairCap(sp, ko.maxPairs);
  const int N = sp.size();
  std::vector<Vector> rays;
  for (uint64_t k = 0; k < sp.caseCount(); ++k) {
    const SignPattern face = sp.convexCase(k);
    int added = 0;
    auto push = [&](Vector v) {
      if (added >= maxPerFace) return;
      const double mx = v.lpNorm<Eigen::Infinity>();
      if (mx > 0.0) rays.push_back(v / mx);
      ++added;
    };
    std::vector<int> freeCols;
    for (int c = 0; c < N; ++c)
      if (face[c] == Sign::kFree) freeCols.push_back(c);
    if (!freeCols.empty()) {
      const Matrix basis = nullspaceBasis(selectColumns(A, freeCols), ko.rankTol);
      for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        const Vector v = embed(basis.col(c), freeCols, N);
        push(v);
        push(-v);
      }
    }
    for (int c = 0; c < N; ++c) {
      if (face[c] != Sign::kNonNeg) continue;
      LinearProgram lp(N);
      lp.signs = face.signs();
      for (Eigen::Index r = 0; r < A.rows(); ++r) lp.addEquality(A.row(r).transpose(), 0.0);
      lp.addEquality(Vector::Unit(N, c), 1.0);
      const LpSolution sol = solveLinearProgram(lp, Vector(), false, ko.linTol);
      if (sol.status == LpStatus::kOptimal) push(sol.x);
    }
  }
  return rays;
}

CqReport normalitySearch(const MpscInstance& inst, const DirectionalPattern& dp,
                         const CqOptions& opts, bool pseudo) {
  const bool dir = isDirectional(dp);
  std::string name = pseudo ? "MPSC-pseudo-normality" : "MPSC-quasi-normality";
  if (dir) name += "(d)";
  CqReport r = startReport(name, &dp);
  if (auto bad = directionalGuard(r, dp)) return *bad;

  const CqReport first = checkFoscms(dp, opts);
  if (first.verdict == CqVerdict::kHolds) {
    r.verdict = CqVerdict::kHolds;
    r.note = "no nonzero multiplier satisfies the first-order system";
    return r;
  }

  const PointData& pd = dp.base.at;
  const Matrix A = multiplierMatrix(pd);
  const SignPattern sp = stationarityPattern(dp, StationarityKind::kMd);
  const std::vector<Vector> rays =
      violatingRays(A, sp, opts.sequence.maxRaysPerFace, opts.kernel);

  const SequenceParams& sq = opts.sequence;
  const int n = pd.z.size();
  const Vector d = dir ? dp.d : Vector::Zero(n);
  std::vector<Vector> dirs{d};
  for (int j = 0; j < sq.perturbations; ++j) {
    auto rng = streamRng(opts.sampling.seed, Stream::kSequencePerturbation, j);
    dirs.push_back(d + sq.delta * unitSphere(rng, n));
  }
  const Vector p0 = constraintValues(inst, pd.z);
  Vector gradNorm(A.cols());
  for (Eigen::Index c = 0; c < A.cols(); ++c) gradNorm[c] = A.col(c).norm();

  r.sampled = true;
  r.sampling = opts.sampling;
  const std::string params =
      "t0=" + formatDouble(sq.t0) + " gamma=" + formatDouble(sq.gamma) +
      " K=" + std::to_string(sq.steps) + " delta=" + formatDouble(sq.delta) +
      " perturbations=" + std::to_string(sq.perturbations);

  for (const Vector& lam : rays) {
    for (const Vector& dk : dirs) {
      double t = sq.t0;
      for (int step = 0; step <= sq.steps; ++step, t *= sq.gamma) {
        const Vector z = pd.z + t * dk;
        const Vector P = constraintValues(inst, z);
        bool all = true;
        double sum = 0.0, margin = 0.0;
        for (Eigen::Index c = 0; c < lam.size(); ++c) {
          if (std::abs(lam[c]) <= kNonzeroTol) continue;
          const double term = lam[c] * P[c];
          const double thr = kStrictMargin * std::abs(lam[c]) *
                             (std::abs(p0[c]) + t * gradNorm[c] * dk.norm() +
                              std::abs(P[c]));
          all = all && term > thr;
          sum += term;
          margin += thr;
        }
        const bool hit = pseudo ? sum > margin : all;
        if (!hit) continue;
        r.verdict = CqVerdict::kViolatedOnSamples;
        r.multiplierWitness = lam;
        r.pointWitness = z;
        r.witnessDetail = "t=" + formatDouble(t) + " d'=(" +
                          formatVector(asSpan(dk)) + ")";
        r.note = params;
        return r;
      }
    }
  }
  r.verdict = CqVerdict::kHoldsOnSamples;
  r.note = "no witness among " + std::to_string(rays.size()) + " rays; " + params;
  return r;
}

// A rank condition checked at every sample: either the rank stays equal to
// its value at the reference point, or the family stays linearly dependent.
struct RankCondition {
  std::vector<int> cols;
  bool deficient = false;
  int rank0 = 0;
};

using GradientMap = std::function<Matrix(const Vector&)>;

CqReport runSampler(CqReport r, const GradientMap& grads, const Vector& zStar,
                    const std::vector<RankCondition>& conds,
                    const std::vector<std::string>& labels,
                    const CqOptions& opts) {
  const SamplingParams& sp = opts.sampling;
  r.sampled = true;
  r.sampling = sp;
  const size_t N = static_cast<size_t>(std::max(sp.samples, 0));
  std::vector<int> badCond(N, -1), badRank(N, 0);
  std::vector<Vector> points(N);
  parallelFor(N, [&](size_t s) {
    auto rng = streamRng(sp.seed, Stream::kNeighborhood, s);
    points[s] = uniformBall(rng, zStar, sp.radius);
    const Matrix M = grads(points[s]);
    for (size_t c = 0; c < conds.size(); ++c) {
      const RankCondition& rc = conds[c];
      const int rk = rank(selectColumns(M, rc.cols), opts.kernel.rankTol);
      const bool ok = rc.deficient ? rk < static_cast<int>(rc.cols.size())
                                   : rk == rc.rank0;
      if (!ok) {
        badCond[s] = static_cast<int>(c);
        badRank[s] = rk;
        return;
      }
    }
  });
  for (size_t s = 0; s < N; ++s) {
    if (badCond[s] < 0) continue;
    const RankCondition& rc = conds[badCond[s]];
    r.verdict = CqVerdict::kViolatedOnSamples;
    r.pointWitness = points[s];
    r.witnessDetail =
        "sample " + std::to_string(s) + ": family " + familyString(rc.cols, labels) +
        " has rank " + std::to_string(badRank[s]) +
        (rc.deficient ? " (linearly independent; positively dependent at the point)"
                      : " (rank " + std::to_string(rc.rank0) + " at the point)");
    return r;
  }
  r.verdict = CqVerdict::kHoldsOnSamples;
  return r;
}

// Columns added one at a time whenever they raise the rank.
std::vector<int> greedyBasis(const Matrix& M, const std::vector<int>& cols,
                             double rankTol) {
  std::vector<int> basis;
  int current = 0;
  for (int c : cols) {
    std::vector<int> trial = basis;
    trial.push_back(c);
    const int rk = rank(selectColumns(M, trial), rankTol);
    if (rk > current) {
      basis = std::move(trial);
      current = rk;
    }
  }
  return basis;
}

// Number of masks to enumerate over `bits` items; sets `truncated`.
uint64_t maskLimit(int bits, uint64_t cap, bool* truncated) {
  *truncated = false;
  if (bits >= 63) {
    *truncated = true;
    return cap;
  }
  const uint64_t all = uint64_t{1} << bits;
  if (all > cap) {
    *truncated = true;
    return cap;
  }
  return all;
}

bool positivelyDependent(const Matrix& M, const std::vector<int>& cols,
                         const std::vector<Sign>& signs, const KernelOptions& ko) {
  SignPattern sp(static_cast<int>(cols.size()), Sign::kFree);
  for (size_t k = 0; k < cols.size(); ++k) sp.set(static_cast<int>(k), signs[cols[k]]);
  return nonzeroConeKernelIntersection(selectColumns(M, cols), sp, ko).found();
}

}  // namespace

// ---------------------------------------------------------------------------
// Pointwise conditions

CqReport checkLicq(const DirectionalPattern& dp, const CqOptions& opts) {
  CqReport r = startReport(isDirectional(dp) ? "MPSC-LICQ(d)" : "MPSC-LICQ", &dp);
  if (auto bad = directionalGuard(r, dp)) return *bad;
  const ActivePattern& pat = dp.base;
  const std::vector<int> cols = directionalFamily(dp);
  const auto labels = stackedLabels(pat.p(), pat.q(), pat.m());
  const Matrix A = selectColumns(multiplierMatrix(pat.at), cols);
  const int rk = cols.empty() ? 0 : rank(A, opts.kernel.rankTol);
  r.witnessDetail = "family " + familyString(cols, labels) + " has rank " +
                    std::to_string(rk) + " of " + std::to_string(cols.size());
  if (rk == static_cast<int>(cols.size())) {
    r.verdict = CqVerdict::kHolds;
    return r;
  }
  const Matrix basis = nullspaceBasis(A, opts.kernel.rankTol);
  const Vector w = normalizeRay(basis.col(0));
  verifyKernelWitness(A, w, opts.kernel.linTol, "LICQ");
  r.multiplierWitness = embed(w, cols, pat.at.Jg.rows() + pat.at.Jh.rows() +
                                           2 * pat.m());
  r.verdict = CqVerdict::kViolated;
  return r;
}

CqReport checkMfcq(const ActivePattern& pat, const CqOptions& opts) {
  CqReport r = startReport("MPSC-MFCQ", nullptr);
  if (!pat.feasible()) return inconclusive(r, "point is not feasible");
  const int p = pat.p(), q = pat.q(), m = pat.m();
  SignPattern sp(p + q + 2 * m, Sign::kZero);
  for (int i : pat.Ig) sp.set(i, Sign::kNonNeg);
  for (int j = 0; j < q; ++j) sp.set(p + j, Sign::kFree);
  for (int i : sortedUnion(pat.IG, pat.IGH)) sp.set(p + q + i, Sign::kFree);
  for (int i : sortedUnion(pat.IH, pat.IGH)) sp.set(p + q + m + i, Sign::kFree);
  const LinearCertificate cert =
      nonzeroConeKernelIntersection(multiplierMatrix(pat.at), sp, opts.kernel);
  if (cert.found()) {
    r.verdict = CqVerdict::kViolated;
    r.multiplierWitness = cert.witness();
    r.witnessDetail = "positively linearly dependent active gradients";
  } else {
    r.verdict = CqVerdict::kHolds;
  }
  return r;
}

CqReport checkFoscms(const DirectionalPattern& dp, const CqOptions& opts) {
  CqReport r = startReport(isDirectional(dp) ? "MPSC-FOSCMS(d)" : "MPSC-NNAMCQ", &dp);
  if (auto bad = directionalGuard(r, dp)) return *bad;
  const SignPattern sp = stationarityPattern(dp, StationarityKind::kMd);
  const LinearCertificate cert =
      nonzeroConeKernelIntersection(multiplierMatrix(dp.base.at), sp, opts.kernel);
  if (cert.found()) {
    r.verdict = CqVerdict::kViolated;
    r.multiplierWitness = cert.witness();
    r.witnessDetail = "nonzero multiplier with zero gradient combination";
  } else {
    r.verdict = CqVerdict::kHolds;
  }
  return r;
}

CqReport checkSoscms(const MpscInstance& inst, const DirectionalPattern& dp,
                     const CqOptions& opts) {
  CqReport r = startReport(isDirectional(dp) ? "MPSC-SOSCMS(d)" : "MPSC-SOSCMS", &dp);
  if (auto bad = directionalGuard(r, dp)) return *bad;
  const PointData& pd = dp.base.at;
  const Matrix A = multiplierMatrix(pd);
  const int N = static_cast<int>(A.cols());
  const Vector d = isDirectional(dp) ? dp.d : Vector::Zero(pd.z.size());
  const Vector c = curvatureAlong(inst, pd.z, d).constraints;
  const SignPattern sp = stationarityPattern(dp, StationarityKind::kMd);
  checkPairCap(sp, opts.kernel.maxPairs);

  auto violated = [&](Vector lam) {
    lam = scaleRay(std::move(lam));
    verifyKernelWitness(A, lam, opts.kernel.linTol, "SOSCMS");
    if (c.dot(lam) < -opts.kernel.linTol * std::max(1.0, c.lpNorm<Eigen::Infinity>()))
      throw std::logic_error("SOSCMS witness has negative curvature");
    r.verdict = CqVerdict::kViolated;
    r.multiplierWitness = lam;
    r.witnessDetail = "curvature " + formatDouble(c.dot(lam)) + " >= 0";
    return r;
  };

  for (uint64_t k = 0; k < sp.caseCount(); ++k) {
    const SignPattern face = sp.convexCase(k);
    std::vector<int> freeCols;
    for (int j = 0; j < N; ++j)
      if (face[j] == Sign::kFree) freeCols.push_back(j);
    if (!freeCols.empty()) {
      const Matrix basis = nullspaceBasis(selectColumns(A, freeCols), opts.kernel.rankTol);
      if (basis.cols() > 0) {
        Vector v = embed(basis.col(0), freeCols, N);
        if (c.dot(v) < 0) v = -v;
        return violated(v);
      }
    }
    for (int j = 0; j < N; ++j) {
      if (face[j] != Sign::kNonNeg) continue;
      LinearProgram lp(N);
      lp.signs = face.signs();
      for (Eigen::Index row = 0; row < A.rows(); ++row)
        lp.addEquality(A.row(row).transpose(), 0.0);
      lp.addEquality(Vector::Unit(N, j), 1.0);
      lp.addInequality(-c, 0.0);
      const LpSolution sol = solveLinearProgram(lp, Vector(), false, opts.kernel.linTol);
      if (sol.status == LpStatus::kOptimal) return violated(sol.x);
    }
  }
  r.verdict = CqVerdict::kHolds;
  return r;
}

CqReport checkQuasiNormality(const MpscInstance& inst,
                             const DirectionalPattern& dp,
                             const CqOptions& opts) {
  return normalitySearch(inst, dp, opts, false);
}

CqReport checkPseudoNormality(const MpscInstance& inst,
                              const DirectionalPattern& dp,
                              const CqOptions& opts) {
  return normalitySearch(inst, dp, opts, true);
}

// ---------------------------------------------------------------------------
// Conditions on derived nonlinear programs

CqReport checkNlpCq(const NlpView& view, const Vector& zStar, NlpCq which,
                    const CqOptions& opts) {
  CqReport r = startReport(view.name + "-" + nlpCqName(which), nullptr);
  std::vector<int> activeIneq;
  for (size_t i = 0; i < view.ineq.size(); ++i) {
    const double v = view.ineq[i].value(zStar);
    if (v > opts.tolAct) return inconclusive(r, "point violates " + view.ineqFrom[i].label());
    if (v >= -opts.tolAct) activeIneq.push_back(static_cast<int>(i));
  }
  for (size_t j = 0; j < view.eq.size(); ++j)
    if (std::abs(view.eq[j].value(zStar)) > opts.tolAct)
      return inconclusive(r, "point violates " + view.eqFrom[j].label());

  const int nI = static_cast<int>(activeIneq.size());
  const int nE = static_cast<int>(view.eq.size());
  const int K = nI + nE;
  std::vector<std::string> labels;
  std::vector<Sign> signs;
  bool affine = true;
  for (int i : activeIneq) {
    labels.push_back(view.ineqFrom[i].label());
    signs.push_back(Sign::kNonNeg);
    affine = affine && view.ineq[i].isAffine();
  }
  for (int j = 0; j < nE; ++j) {
    labels.push_back(view.eqFrom[j].label());
    signs.push_back(Sign::kFree);
    affine = affine && view.eq[j].isAffine();
  }
  const int n = view.n;
  const GradientMap grads = [&](const Vector& z) {
    Matrix M(n, K);
    for (int c = 0; c < nI; ++c) M.col(c) = view.ineq[activeIneq[c]].gradient(z);
    for (int j = 0; j < nE; ++j) M.col(nI + j) = view.eq[j].gradient(z);
    return M;
  };
  const Matrix M0 = grads(zStar);
  std::vector<int> all(K);
  for (int c = 0; c < K; ++c) all[c] = c;
  std::vector<int> eqCols(all.begin() + nI, all.end());

  if (which == NlpCq::kLicq) {
    const int rk = K == 0 ? 0 : rank(M0, opts.kernel.rankTol);
    r.witnessDetail = "family " + familyString(all, labels) + " has rank " +
                      std::to_string(rk) + " of " + std::to_string(K);
    if (rk == K) {
      r.verdict = CqVerdict::kHolds;
    } else {
      const Vector w = normalizeRay(nullspaceBasis(M0, opts.kernel.rankTol).col(0));
      verifyKernelWitness(M0, w, opts.kernel.linTol, "LICQ");
      r.multiplierWitness = w;
      r.verdict = CqVerdict::kViolated;
    }
    return r;
  }
  if (which == NlpCq::kMfcq) {
    SignPattern sp(K, Sign::kFree);
    for (int c = 0; c < K; ++c) sp.set(c, signs[c]);
    const LinearCertificate cert = nonzeroConeKernelIntersection(M0, sp, opts.kernel);
    if (cert.found()) {
      r.verdict = CqVerdict::kViolated;
      r.multiplierWitness = cert.witness();
      r.witnessDetail = "positively linearly dependent family " + familyString(all, labels);
    } else {
      r.verdict = CqVerdict::kHolds;
    }
    return r;
  }

  std::vector<RankCondition> conds;
  bool truncated = false;
  auto addRank = [&](std::vector<int> cols) {
    if (cols.empty()) return;
    const int rk = rank(selectColumns(M0, cols), opts.kernel.rankTol);
    conds.push_back({std::move(cols), false, rk});
  };
  auto addDeficient = [&](std::vector<int> cols) {
    if (cols.empty() || !positivelyDependent(M0, cols, signs, opts.kernel)) return;
    conds.push_back({std::move(cols), true, 0});
  };
  auto colsOf = [&](uint64_t mask, int bits, const std::vector<int>& extra) {
    std::vector<int> cols;
    for (int b = 0; b < bits; ++b)
      if (mask >> b & 1) cols.push_back(b);
    cols.insert(cols.end(), extra.begin(), extra.end());
    return cols;
  };

  switch (which) {
    case NlpCq::kCrcq: {
      const uint64_t lim = maskLimit(K, opts.subsetCap, &truncated);
      for (uint64_t mask = 1; mask < lim; ++mask) addRank(colsOf(mask, K, {}));
      break;
    }
    case NlpCq::kRcrcq: {
      const uint64_t lim = maskLimit(nI, opts.subsetCap, &truncated);
      for (uint64_t mask = 0; mask < lim; ++mask) addRank(colsOf(mask, nI, eqCols));
      break;
    }
    case NlpCq::kCpld: {
      const uint64_t lim = maskLimit(K, opts.subsetCap, &truncated);
      for (uint64_t mask = 1; mask < lim; ++mask) addDeficient(colsOf(mask, K, {}));
      break;
    }
    case NlpCq::kRcpld: {
      addRank(eqCols);
      const std::vector<int> basis = greedyBasis(M0, eqCols, opts.kernel.rankTol);
      const uint64_t lim = maskLimit(nI, opts.subsetCap, &truncated);
      for (uint64_t mask = 1; mask < lim; ++mask) addDeficient(colsOf(mask, nI, basis));
      break;
    }
    case NlpCq::kCrsc: {
      // i belongs to the subspace component when grad g_i . d vanishes on the
      // whole linearization cone, i.e. sup of -grad g_i . d over it is 0.
      Matrix A = Matrix::Zero(K, n + nI);
      SignPattern sp(n + nI, Sign::kFree);
      for (int c = 0; c < nI; ++c) {
        A.block(c, 0, 1, n) = M0.col(c).transpose();
        A(c, n + c) = 1.0;
        sp.set(n + c, Sign::kNonNeg);
      }
      for (int j = 0; j < nE; ++j) A.block(nI + j, 0, 1, n) = M0.col(nI + j).transpose();
      std::vector<int> cols;
      for (int c = 0; c < nI; ++c) {
        Vector obj = Vector::Zero(n + nI);
        obj.head(n) = -M0.col(c);
        const MaximizeResult mr = maximizeLinear(obj, A, Vector::Zero(K), sp, opts.kernel);
        if (mr.status == LpStatus::kOptimal) cols.push_back(c);
      }
      cols.insert(cols.end(), eqCols.begin(), eqCols.end());
      r.witnessDetail = "subspace component " + familyString(cols, labels);
      addRank(cols);
      break;
    }
    default:
      break;
  }
  if (truncated)
    r.note = "subset enumeration truncated at " + std::to_string(opts.subsetCap);

  if (conds.empty()) {
    r.verdict = CqVerdict::kHolds;
    if (r.witnessDetail.empty()) r.witnessDetail = "no positively linearly dependent subfamily";
    return r;
  }
  if (affine && !opts.forceSampling) {
    r.verdict = CqVerdict::kHolds;
    r.witnessDetail = "constant gradients";
    return r;
  }
  return runSampler(std::move(r), grads, zStar, conds, labels, opts);
}

CqReport checkMpscRcpld(const MpscInstance& inst, const ActivePattern& pat,
                        const CqOptions& opts) {
  CqReport r = startReport("MPSC-RCPLD", nullptr);
  if (!pat.feasible()) return inconclusive(r, "point is not feasible");
  const int p = pat.p(), q = pat.q(), m = pat.m();
  const int N = p + q + 2 * m;
  const auto labels = stackedLabels(p, q, m);
  const Matrix M0 = multiplierMatrix(pat.at);
  std::vector<Sign> signs(N, Sign::kFree);
  for (int i = 0; i < p; ++i) signs[i] = Sign::kNonNeg;

  std::vector<int> baseCols;
  for (int j = 0; j < q; ++j) baseCols.push_back(p + j);
  for (int i : pat.IG) baseCols.push_back(p + q + i);
  for (int i : pat.IH) baseCols.push_back(p + q + m + i);
  std::sort(baseCols.begin(), baseCols.end());

  std::vector<RankCondition> conds;
  if (!baseCols.empty())
    conds.push_back({baseCols, false, rank(selectColumns(M0, baseCols), opts.kernel.rankTol)});
  const std::vector<int> basis = greedyBasis(M0, baseCols, opts.kernel.rankTol);

  const int nIg = static_cast<int>(pat.Ig.size());
  const int nB = static_cast<int>(pat.IGH.size());
  bool truncated = false;
  const uint64_t lim = maskLimit(nIg + 2 * nB, opts.subsetCap, &truncated);
  for (uint64_t mask = 1; mask < lim; ++mask) {
    std::vector<int> cols;
    for (int b = 0; b < nIg; ++b)
      if (mask >> b & 1) cols.push_back(pat.Ig[b]);
    cols.insert(cols.end(), basis.begin(), basis.end());
    std::vector<std::pair<int, int>> pairs;
    for (int b = 0; b < nB; ++b) {
      const bool g = mask >> (nIg + b) & 1;
      const bool h = mask >> (nIg + nB + b) & 1;
      const int i = pat.IGH[b];
      if (g) cols.push_back(p + q + i);
      if (h) cols.push_back(p + q + m + i);
      if (g && h) pairs.emplace_back(p + q + i, p + q + m + i);
    }
    SignPattern sp(static_cast<int>(cols.size()), Sign::kFree);
    auto pos = [&](int col) {
      return static_cast<int>(std::find(cols.begin(), cols.end(), col) - cols.begin());
    };
    for (size_t k = 0; k < cols.size(); ++k) sp.set(static_cast<int>(k), signs[cols[k]]);
    for (auto [a, b] : pairs) sp.addComplementaryPair(pos(a), pos(b));
    if (nonzeroConeKernelIntersection(selectColumns(M0, cols), sp, opts.kernel).found())
      conds.push_back({cols, true, 0});
  }
  if (truncated)
    r.note = "subset enumeration truncated at " + std::to_string(opts.subsetCap);
  if (conds.empty() || (inst.constraintsAffine() && !opts.forceSampling)) {
    r.verdict = CqVerdict::kHolds;
    r.witnessDetail = conds.empty() ? "no condition to check" : "constant gradients";
    return r;
  }
  const GradientMap grads = [&](const Vector& z) {
    return multiplierMatrix(evaluatePoint(inst, z));
  };
  return runSampler(std::move(r), grads, pat.at.z, conds, labels, opts);
}

CqReport checkPiecewise(const MpscInstance& inst, const ActivePattern& pat,
                        NlpCq which, const CqOptions& opts) {
  CqReport r = startReport(std::string("piecewise ") + nlpCqName(which), nullptr);
  if (!pat.feasible()) return inconclusive(r, "point is not feasible");
  auto severity = [](CqVerdict v) {
    switch (v) {
      case CqVerdict::kHolds: return 0;
      case CqVerdict::kHoldsOnSamples: return 1;
      case CqVerdict::kInconclusive: return 2;
      case CqVerdict::kViolatedOnSamples: return 3;
      case CqVerdict::kViolated: return 4;
    }
    return 2;
  };
  r.verdict = CqVerdict::kHolds;
  for (const Bipartition& bp : enumerateBipartitions(pat, opts.bipartitionCap)) {
    const NlpView view = buildBranchNlp(inst, pat, bp);
    const CqReport sub = checkNlpCq(view, pat.at.z, which, opts);
    if (!r.witnessDetail.empty()) r.witnessDetail += "; ";
    r.witnessDetail += sub.name + ": " + cqVerdictName(sub.verdict);
    r.sampled = r.sampled || sub.sampled;
    if (sub.sampled) r.sampling = sub.sampling;
    if (severity(sub.verdict) > severity(r.verdict)) {
      r.verdict = sub.verdict;
      r.multiplierWitness = sub.multiplierWitness;
      r.pointWitness = sub.pointWitness;
      if (verdictViolated(sub.verdict) || sub.verdict == CqVerdict::kInconclusive)
        r.note = "failing branch " + view.name +
                 (sub.witnessDetail.empty() ? "" : " (" + sub.witnessDetail + ")");
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Implication lattice

std::string LatticeViolation::toString() const {
  std::string out = premise + " => " + conclusion;
  if (sampledPremise) out += " (premise holds on samples)";
  return out;
}

std::vector<LatticeViolation> crossCheckImplications(const ImplicationBundle& b) {
  std::vector<LatticeViolation> out;
  auto cq = [&](const std::string& k) -> std::optional<CqVerdict> {
    auto it = b.cq.find(k);
    if (it == b.cq.end()) return std::nullopt;
    return it->second;
  };
  auto st = [&](const std::string& k) -> std::optional<bool> {
    auto it = b.stationarity.find(k);
    if (it == b.stationarity.end()) return std::nullopt;
    return it->second;
  };
  auto cqEdge = [&](const std::string& from, const std::string& to) {
    const auto a = cq(from), c = cq(to);
    if (a && c && verdictHolds(*a) && verdictViolated(*c))
      out.push_back({from, to, *a == CqVerdict::kHoldsOnSamples});
  };
  auto stEdge = [&](const std::string& from, const std::string& to) {
    const auto a = st(from), c = st(to);
    if (a && c && *a && !*c) out.push_back({from, to, false});
  };
  auto cqToSt = [&](const std::string& from, const std::string& to) {
    const auto a = cq(from);
    const auto c = st(to);
    if (a && c && verdictHolds(*a) && !*c)
      out.push_back({from, to, *a == CqVerdict::kHoldsOnSamples});
  };

  cqEdge("LICQ", "MFCQ");
  cqEdge("MFCQ", "CPLD");
  cqEdge("MFCQ", "NNAMCQ");
  cqEdge("CRCQ", "CPLD");
  cqEdge("NNAMCQ", "pseudo");
  cqEdge("pseudo", "quasi");
  cqEdge("CPLD", "piecewise-CPLD");
  cqEdge("MFCQ", "piecewise-MFCQ");
  cqEdge("CRCQ", "piecewise-CRCQ");
  cqEdge("piecewise-MFCQ", "piecewise-CPLD");
  cqEdge("piecewise-CRCQ", "piecewise-CPLD");
  cqEdge("RCPLD", "piecewise-RCPLD");
  cqEdge("piecewise-RCPLD", "RCPLD");
  cqEdge("FOSCMS(d)", "SOSCMS(d)");
  cqEdge("SOSCMS(d)", "pseudo(d)");
  cqEdge("pseudo(d)", "quasi(d)");

  stEdge("S", "M");
  stEdge("M", "W");
  stEdge("QM", "M");
  stEdge("S(d)", "M(d)");
  stEdge("M(d)", "W(d)");
  stEdge("StrongM(d)", "M(d)");

  if (const auto licq = cq("LICQ(d)"); licq && verdictHolds(*licq)) {
    const auto sm = st("StrongM(d)"), sd = st("S(d)");
    if (sm && sd && *sm != *sd)
      out.push_back({"LICQ(d)", "StrongM(d) = S(d)", *licq == CqVerdict::kHoldsOnSamples});
  }

  if (b.localMinimizer) {
    cqToSt("LICQ", "S");
    for (const char* k : {"MFCQ", "CPLD", "CRCQ", "RCPLD", "NNAMCQ", "quasi", "pseudo"})
      cqToSt(k, "M");
    cqToSt("LICQ(d)", "S(d)");
    cqToSt("quasi(d)", "M(d)");
  }
  return out;
}

}  // namespace mpsc
