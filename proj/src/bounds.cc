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

#include "mpsc/bounds.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mpsc/sampling.h"

namespace mpsc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> toStd(const Vector& z) { return {z.data(), z.data() + z.size()}; }

double checkedValue(const SmoothFunction& fn, const Vector& z) {
  const double v = fn.value(z);
  if (!std::isfinite(v)) throw DomainError(fn.expr().toString(), toStd(z), "value is not finite");
  return v;
}

}  // namespace

ResidualBreakdown residual(const MpscInstance& inst, const Vector& z) {
  if (z.size() != inst.n()) throw std::invalid_argument("point has wrong dimension");
  if (!z.allFinite()) throw DomainError("point", toStd(z), "point is not finite");
  ResidualBreakdown r;
  for (const auto& fn : inst.g()) r.gPart += std::max(checkedValue(fn, z), 0.0);
  for (const auto& fn : inst.h()) r.hPart += std::abs(checkedValue(fn, z));
  for (int i = 0; i < inst.m(); ++i) {
    const double a = std::abs(checkedValue(inst.switches()[i].G, z));
    const double b = std::abs(checkedValue(inst.switches()[i].H, z));
    const double mn = std::min(a, b);
    r.switchPart += mn;
    (a == mn ? r.beta1 : r.beta2).push_back(i);
  }
  r.total = r.gPart + r.hPart + r.switchPart;
  return r;
}

Bipartition selectBipartition(const ResidualBreakdown& r,
                              const std::vector<int>& biactive) {
  std::vector<int> b1, b2;
  for (int i : biactive)
    (std::binary_search(r.beta1.begin(), r.beta1.end(), i) ? b1 : b2).push_back(i);
  return Bipartition(b1, b2, biactive);
}

// ---------------------------------------------------------------------------
// Distance to the feasible set

namespace {

struct AffineSystem {
  Matrix Aeq;
  Vector beq;
  Matrix Ain;  // Ain y <= bin
  Vector bin;
};

AffineSystem linearize(const NlpView& view, const Vector& z) {
  const int n = view.n;
  AffineSystem s;
  s.Aeq.resize(static_cast<Eigen::Index>(view.eq.size()), n);
  s.beq.resize(static_cast<Eigen::Index>(view.eq.size()));
  for (size_t j = 0; j < view.eq.size(); ++j) {
    const Vector a = view.eq[j].gradient(z);
    s.Aeq.row(j) = a.transpose();
    s.beq[j] = a.dot(z) - view.eq[j].value(z);
  }
  s.Ain.resize(static_cast<Eigen::Index>(view.ineq.size()), n);
  s.bin.resize(static_cast<Eigen::Index>(view.ineq.size()));
  for (size_t i = 0; i < view.ineq.size(); ++i) {
    const Vector a = view.ineq[i].gradient(z);
    s.Ain.row(i) = a.transpose();
    s.bin[i] = a.dot(z) - view.ineq[i].value(z);
  }
  return s;
}

bool viewAffine(const NlpView& view) {
  for (const auto& fn : view.ineq)
    if (!fn.isAffine()) return false;
  for (const auto& fn : view.eq)
    if (!fn.isAffine()) return false;
  return true;
}

// The projection lies on the affine hull of the constraints active there, so
// the best feasible projection onto such hulls is the exact projection.
BranchDistance projectAffine(const AffineSystem& s, const Vector& z) {
  BranchDistance out;
  out.value = kInf;
  out.exact = true;
  const int p = static_cast<int>(s.Ain.rows());
  const double scale =
      std::max({1.0, s.beq.size() ? s.beq.lpNorm<Eigen::Infinity>() : 0.0,
                s.bin.size() ? s.bin.lpNorm<Eigen::Infinity>() : 0.0,
                z.lpNorm<Eigen::Infinity>()});
  const double tol = 1e-9 * scale;
  for (uint64_t mask = 0; mask < (uint64_t{1} << p); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < p; ++i)
      if (mask >> i & 1) act.push_back(i);
    const Eigen::Index rows = s.Aeq.rows() + static_cast<Eigen::Index>(act.size());
    Vector y = z;
    if (rows > 0) {
      Matrix A(rows, z.size());
      Vector b(rows);
      A.topRows(s.Aeq.rows()) = s.Aeq;
      b.head(s.Aeq.rows()) = s.beq;
      for (size_t k = 0; k < act.size(); ++k) {
        A.row(s.Aeq.rows() + k) = s.Ain.row(act[k]);
        b[s.Aeq.rows() + k] = s.bin[act[k]];
      }
      y = z + A.completeOrthogonalDecomposition().solve(b - A * z);
      if ((A * y - b).lpNorm<Eigen::Infinity>() > tol) continue;
    }
    if (p > 0 && ((s.Ain * y - s.bin).array() > tol).any()) continue;
    const double dist = (y - z).norm();
    if (dist < out.value) {
      out.value = dist;
      out.nearest = y;
    }
  }
  return out;
}

double maxViolation(const NlpView& view, const Vector& y) {
  double v = 0.0;
  for (const auto& fn : view.ineq) v = std::max(v, fn.value(y));
  for (const auto& fn : view.eq) v = std::max(v, std::abs(fn.value(y)));
  return v;
}

// min |y - z|^2 + mu * (sum max(g,0)^2 + sum h^2) by Levenberg-Marquardt.
Vector penaltySolve(const NlpView& view, const Vector& z, Vector y, double mu) {
  const int n = view.n;
  const int ni = static_cast<int>(view.ineq.size());
  const int ne = static_cast<int>(view.eq.size());
  const double sq = std::sqrt(mu);
  auto eval = [&](const Vector& x, Vector* r, Matrix* J) {
    r->resize(n + ni + ne);
    if (J) *J = Matrix::Zero(n + ni + ne, n);
    r->head(n) = x - z;
    if (J) J->topRows(n).setIdentity();
    for (int i = 0; i < ni; ++i) {
      const double g = view.ineq[i].value(x);
      (*r)[n + i] = g > 0 ? sq * g : 0.0;
      if (J && g > 0) J->row(n + i) = sq * view.ineq[i].gradient(x).transpose();
    }
    for (int j = 0; j < ne; ++j) {
      (*r)[n + ni + j] = sq * view.eq[j].value(x);
      if (J) J->row(n + ni + j) = sq * view.eq[j].gradient(x).transpose();
    }
  };
  double nu = 1e-3;
  Vector r;
  Matrix J;
  eval(y, &r, &J);
  double cost = r.squaredNorm();
  for (int it = 0; it < 200; ++it) {
    const Matrix JtJ = J.transpose() * J;
    const Vector rhs = -J.transpose() * r;
    const Vector step =
        (JtJ + nu * Matrix::Identity(n, n)).ldlt().solve(rhs);
    if (!step.allFinite()) break;
    const Vector trial = y + step;
    Vector rt;
    eval(trial, &rt, nullptr);
    const double ct = rt.squaredNorm();
    if (std::isfinite(ct) && ct < cost) {
      y = trial;
      eval(y, &r, &J);
      const bool small = step.norm() <= 1e-14 * (1.0 + y.norm());
      cost = ct;
      nu = std::max(nu / 3.0, 1e-12);
      if (small) break;
    } else {
      nu *= 4.0;
      if (nu > 1e12) break;
    }
  }
  return y;
}

// Minimum-norm Newton steps on the violated constraints.
Vector feasibilityPolish(const NlpView& view, Vector y, double tol) {
  const int n = view.n;
  for (int it = 0; it < 50; ++it) {
    std::vector<Vector> rows;
    std::vector<double> vals;
    for (const auto& fn : view.eq) {
      rows.push_back(fn.gradient(y));
      vals.push_back(fn.value(y));
    }
    for (const auto& fn : view.ineq) {
      const double g = fn.value(y);
      if (g > 0) {
        rows.push_back(fn.gradient(y));
        vals.push_back(g);
      }
    }
    double viol = 0.0;
    for (double v : vals) viol = std::max(viol, std::abs(v));
    if (viol <= tol) break;
    Matrix J(static_cast<Eigen::Index>(rows.size()), n);
    Vector c(static_cast<Eigen::Index>(rows.size()));
    for (size_t k = 0; k < rows.size(); ++k) {
      J.row(k) = rows[k].transpose();
      c[k] = vals[k];
    }
    const Vector step = J.completeOrthogonalDecomposition().solve(-c);
    if (!step.allFinite()) break;
    y += step;
  }
  return y;
}

BranchDistance projectLocal(const NlpView& view, const Vector& z,
                            const Vector& reference,
                            const DistanceOptions& opts) {
  BranchDistance out;
  out.value = kInf;
  out.exact = false;
  const double spread = std::max(1e-2, 0.5 * (z - reference).norm());
  for (int s = 0; s < opts.starts; ++s) {
    Vector y = z;
    if (s > 0) {
      auto rng = streamRng(opts.seed, Stream::kProjectionStarts, s);
      y = uniformBall(rng, z, spread);
    }
    try {
      double mu = 10.0;
      for (int round = 0; round < opts.penaltyRounds; ++round, mu *= opts.penaltyFactor)
        y = penaltySolve(view, z, y, mu);
      y = feasibilityPolish(view, y, opts.feasTol);
      if (!y.allFinite() || maxViolation(view, y) > 1e3 * opts.feasTol) continue;
    } catch (const DomainError&) {
      continue;
    }
    const double dist = (y - z).norm();
    if (dist < out.value) {
      out.value = dist;
      out.nearest = y;
    }
  }
  return out;
}

}  // namespace

DistanceResult distanceToFeasible(const MpscInstance& inst,
                                  const ActivePattern& reference,
                                  const Vector& z, const DistanceOptions& opts) {
  const ResidualBreakdown res = residual(inst, z);
  DistanceResult out;
  if (res.total == 0.0) {
    out.value = 0.0;
    out.nearest = z;
    out.branch = selectBipartition(res, reference.IGH);
    return out;
  }
  out.value = kInf;
  for (const Bipartition& bp : enumerateBipartitions(reference, opts.bipartitionCap)) {
    const NlpView view = buildBranchNlp(inst, reference, bp);
    BranchDistance bd;
    if (viewAffine(view) &&
        (uint64_t{1} << std::min<size_t>(view.ineq.size(), 63)) <= opts.activeSetCap)
      bd = projectAffine(linearize(view, z), z);
    else
      bd = projectLocal(view, z, reference.at.z, opts);
    bd.branch = bp;
    out.exact = out.exact && bd.exact;
    if (bd.value < out.value) {
      out.value = bd.value;
      out.nearest = bd.nearest;
      out.branch = bp;
    }
    out.branches.push_back(std::move(bd));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Error-bound modulus

bool inDirectionalNeighborhood(const Vector& u, const DirectionalNeighborhood& v) {
  const double nu = u.norm(), nd = v.d.norm();
  return (nd * u - nu * v.d).norm() <= v.delta * nu * nd;
}

ErrorBoundEstimate estimateErrorBoundOnPoints(const MpscInstance& inst,
                                              const ActivePattern& reference,
                                              const std::vector<Vector>& points,
                                              const DistanceOptions& opts) {
  ErrorBoundEstimate est;
  est.center = reference.at.z;
  est.usedSamples = static_cast<int>(points.size());
  const size_t N = points.size();
  std::vector<double> res(N, 0.0), dist(N, 0.0);
  std::vector<char> exact(N, 1);
  parallelFor(N, [&](size_t s) {
    res[s] = residual(inst, points[s]).total;
    if (res[s] <= 0.0) return;
    const DistanceResult d = distanceToFeasible(inst, reference, points[s], opts);
    dist[s] = d.value;
    exact[s] = d.exact;
  });
  for (size_t s = 0; s < N; ++s) {
    if (res[s] <= 0.0) continue;
    ++est.infeasibleSamples;
    est.exactDistances = est.exactDistances && exact[s];
    const double ratio = dist[s] / res[s];
    if (est.worstPoint.size() == 0 || ratio > est.alphaHat) {
      est.alphaHat = ratio;
      est.worstPoint = points[s];
      est.worstDistance = dist[s];
      est.worstResidual = res[s];
    }
  }
  est.inconclusive = est.infeasibleSamples < 10;
  return est;
}

ErrorBoundEstimate estimateErrorBoundModulus(
    const MpscInstance& inst, const ActivePattern& reference, double radius,
    int samples, uint64_t seed,
    const std::optional<DirectionalNeighborhood>& direction,
    const DistanceOptions& opts) {
  if (!(radius > 0)) throw std::invalid_argument("radius must be positive");
  const Vector& c = reference.at.z;
  std::vector<Vector> points;
  for (int s = 0; s < samples; ++s) {
    auto rng = streamRng(seed, Stream::kErrorBound, static_cast<uint64_t>(s));
    Vector z = uniformBall(rng, c, radius);
    if (direction && !inDirectionalNeighborhood(z - c, *direction)) continue;
    points.push_back(std::move(z));
  }
  ErrorBoundEstimate est = estimateErrorBoundOnPoints(inst, reference, points, opts);
  est.radius = radius;
  est.samples = samples;
  est.seed = seed;
  est.direction = direction;
  return est;
}

// ---------------------------------------------------------------------------
// Exact penalty

PenaltyFunction::PenaltyFunction(const MpscInstance& inst, double lf, double alpha)
    : inst_(&inst), lf_(lf), alpha_(alpha), weight_(lf * alpha) {}

double PenaltyFunction::operator()(const Vector& z) const {
  return inst_->f().value(z) + weight_ * residual(*inst_, z).total;
}

PenaltyFunction PenaltyFunction::withWeight(double w) const {
  PenaltyFunction out = *this;
  out.weight_ = w;
  return out;
}

PenaltyFunction buildPenalty(const MpscInstance& inst, const Vector& zStar,
                             double alphaHat, double radius, int lipschitzSamples,
                             uint64_t seed) {
  if (!(alphaHat > 0)) throw std::invalid_argument("alphaHat must be positive");
  double mx = 0.0;
  for (int s = 0; s < lipschitzSamples; ++s) {
    auto rng = streamRng(seed, Stream::kLipschitz, static_cast<uint64_t>(s));
    mx = std::max(mx, inst.f().gradient(uniformBall(rng, zStar, radius)).norm());
  }
  return PenaltyFunction(inst, 1.1 * mx, alphaHat);
}

PenaltyCheck verifyPenaltyLocalMin(const PenaltyFunction& pen,
                                   const Vector& zStar, double radius,
                                   int samples, uint64_t seed, double tol) {
  PenaltyCheck out;
  const double base = pen(zStar);
  const size_t N = static_cast<size_t>(std::max(samples, 0));
  std::vector<Vector> pts(N);
  std::vector<double> viol(N);
  parallelFor(N, [&](size_t s) {
    auto rng = streamRng(seed, Stream::kPenalty, s);
    pts[s] = uniformBall(rng, zStar, radius);
    viol[s] = base - pen(pts[s]);
  });
  out.worstViolation = -kInf;
  for (size_t s = 0; s < N; ++s)
    if (viol[s] > out.worstViolation) {
      out.worstViolation = viol[s];
      out.witness = pts[s];
    }
  if (N == 0) out.worstViolation = 0.0;
  out.holds = out.worstViolation <= tol;
  return out;
}

}  // namespace mpsc
