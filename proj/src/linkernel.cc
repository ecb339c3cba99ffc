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

#include "mpsc/linkernel.h"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mpsc {

// ---------------------------------------------------------------------------
// SignPattern

SignPattern::SignPattern(int size, Sign fill)
    : signs_(size, fill), pairOf_(size, -1) {}

void SignPattern::set(int i, Sign s) { signs_.at(i) = s; }

void SignPattern::addComplementaryPair(int a, int b) {
  if (a == b) throw std::invalid_argument("complementary pair needs two coordinates");
  if (a < 0 || b < 0 || a >= size() || b >= size())
    throw std::out_of_range("complementary pair outside pattern");
  if (pairOf_[a] >= 0 || pairOf_[b] >= 0)
    throw std::invalid_argument("coordinate already in a complementary pair");
  pairOf_[a] = pairOf_[b] = static_cast<int>(pairs_.size());
  pairs_.emplace_back(a, b);
}

SignPattern SignPattern::convexCase(uint64_t k) const {
  SignPattern out(size());
  out.signs_ = signs_;
  for (size_t j = 0; j < pairs_.size(); ++j) {
    const int zeroed = ((k >> j) & 1u) ? pairs_[j].second : pairs_[j].first;
    out.signs_[zeroed] = Sign::kZero;
  }
  return out;
}

bool SignPattern::admits(const Vector& x, double tol) const {
  if (x.size() != size()) return false;
  for (int i = 0; i < size(); ++i) {
    if (signs_[i] == Sign::kZero && x[i] != 0.0) return false;
    if (signs_[i] == Sign::kNonNeg && x[i] < -tol) return false;
  }
  for (const auto& [a, b] : pairs_)
    if (std::min(std::abs(x[a]), std::abs(x[b])) > tol) return false;
  return true;
}

void checkPairCap(const SignPattern& pat, int maxPairs) {
  if (static_cast<int>(pat.pairs().size()) > maxPairs)
    throw CapExceeded("complementarity case enumeration needs 2^" +
                      std::to_string(pat.pairs().size()) +
                      " cases; cap is 2^" + std::to_string(maxPairs));
}

// ---------------------------------------------------------------------------
// LinearCertificate

namespace {

double residualScale(const Matrix& A, const Vector& b, const Vector& x) {
  double s = 1.0;
  if (b.size() > 0) s = std::max(s, b.lpNorm<Eigen::Infinity>());
  if (A.size() > 0 && x.size() > 0)
    s = std::max(s, A.cwiseAbs().maxCoeff() * x.lpNorm<Eigen::Infinity>());
  return s;
}

double residualNorm(const Matrix& A, const Vector& b, const Vector& x) {
  if (A.rows() == 0) return 0.0;
  return (A * x - b).lpNorm<Eigen::Infinity>();
}

}  // namespace

LinearCertificate LinearCertificate::feasible(const Matrix& A, const Vector& b,
                                              const SignPattern& pat,
                                              Vector witness,
                                              uint64_t caseIndex, double tol) {
  const double r = residualNorm(A, b, witness);
  if (r > tol * residualScale(A, b, witness) || !pat.admits(witness, tol))
    throw std::logic_error("feasibility witness does not satisfy its system");
  return LinearCertificate(Status::kFeasible, std::move(witness), r, caseIndex);
}

LinearCertificate LinearCertificate::nonzero(const Matrix& A,
                                             const SignPattern& pat,
                                             Vector witness,
                                             uint64_t caseIndex, double tol) {
  const Vector zero = Vector::Zero(A.rows());
  const double r = residualNorm(A, zero, witness);
  if (r > tol * residualScale(A, zero, witness) || !pat.admits(witness, tol) ||
      std::abs(witness.lpNorm<Eigen::Infinity>() - 1.0) > 1e-12)
    throw std::logic_error("nonzero witness does not satisfy its system");
  return LinearCertificate(Status::kNonzeroFound, std::move(witness), r,
                           caseIndex);
}

LinearCertificate LinearCertificate::infeasible() {
  return LinearCertificate(Status::kInfeasible, Vector(), 0.0, 0);
}

LinearCertificate LinearCertificate::onlyZero() {
  return LinearCertificate(Status::kOnlyZero, Vector(), 0.0, 0);
}

// ---------------------------------------------------------------------------
// One-sided Jacobi SVD

namespace {

// Orthogonalizes the columns of U in place, accumulating the rotations in V,
// so that A V = U with mutually orthogonal columns of U.
void jacobiSweeps(Matrix& U, Matrix& V) {
  const int n = static_cast<int>(U.cols());
  V = Matrix::Identity(n, n);
  constexpr double kEps = 1e-15;
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double alpha = U.col(p).squaredNorm();
        const double beta = U.col(q).squaredNorm();
        const double gamma = U.col(p).dot(U.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= kEps * std::sqrt(alpha * beta))
          continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Matrix* M : {&U, &V}) {
          for (int r = 0; r < M->rows(); ++r) {
            const double up = (*M)(r, p);
            const double uq = (*M)(r, q);
            (*M)(r, p) = c * up - s * uq;
            (*M)(r, q) = s * up + c * uq;
          }
        }
      }
    }
    if (!rotated) break;
  }
}

}  // namespace

Vector singularValues(const Matrix& M) {
  if (M.size() == 0) return Vector();
  Matrix U = M;
  Matrix V;
  jacobiSweeps(U, V);
  Vector s(U.cols());
  for (int j = 0; j < U.cols(); ++j) s[j] = U.col(j).norm();
  std::sort(s.data(), s.data() + s.size(), std::greater<double>());
  return s;
}

int rank(const Matrix& M, double tolRank) {
  if (M.size() == 0) return 0;
  const Vector s = singularValues(M);
  const double smax = s[0];
  if (smax == 0.0) return 0;
  int r = 0;
  for (int j = 0; j < s.size(); ++j)
    if (s[j] > tolRank * smax) ++r;
  return std::min<int>(r, std::min(M.rows(), M.cols()));
}

Matrix nullspaceBasis(const Matrix& M, double tolRank) {
  const int n = static_cast<int>(M.cols());
  if (n == 0) return Matrix(0, 0);
  if (M.rows() == 0) return Matrix::Identity(n, n);
  Matrix U = M;
  Matrix V;
  jacobiSweeps(U, V);
  std::vector<double> sigma(n);
  for (int j = 0; j < n; ++j) sigma[j] = U.col(j).norm();
  const double smax = *std::max_element(sigma.begin(), sigma.end());
  // Keep the n - rank columns with the smallest singular values so the basis
  // dimension always matches rank().
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return sigma[a] < sigma[b]; });
  int r = 0;
  if (smax > 0.0)
    for (double s : sigma)
      if (s > tolRank * smax) ++r;
  r = std::min<int>(r, std::min<int>(M.rows(), n));
  const int k = n - r;
  std::vector<int> keep(order.begin(), order.begin() + k);
  std::sort(keep.begin(), keep.end());
  Matrix out(n, k);
  for (int j = 0; j < k; ++j) out.col(j) = V.col(keep[j]);
  return out;
}

// ---------------------------------------------------------------------------
// Simplex

LinearProgram::LinearProgram(int numVars)
    : Aeq(0, numVars),
      beq(0),
      Aub(0, numVars),
      bub(0),
      signs(numVars, Sign::kFree) {}

void LinearProgram::addEquality(const Vector& row, double rhs) {
  Aeq.conservativeResize(Aeq.rows() + 1, numVars());
  Aeq.row(Aeq.rows() - 1) = row.transpose();
  beq.conservativeResize(beq.size() + 1);
  beq[beq.size() - 1] = rhs;
}

void LinearProgram::addInequality(const Vector& row, double rhs) {
  Aub.conservativeResize(Aub.rows() + 1, numVars());
  Aub.row(Aub.rows() - 1) = row.transpose();
  bub.conservativeResize(bub.size() + 1);
  bub[bub.size() - 1] = rhs;
}

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kReducedCostTol = 1e-10;
constexpr int kMaxPivots = 200000;

// Standard form min c.y, A y = b >= 0, y >= 0.
struct StandardForm {
  Matrix A;
  Vector b;
  Vector c;
  std::vector<int> pos;  // column of the positive part of x_j, or -1
  std::vector<int> neg;  // column of the negative part of x_j, or -1
};

StandardForm toStandardForm(const LinearProgram& lp, const Vector& objective,
                            bool maximize) {
  const int nv = lp.numVars();
  StandardForm sf;
  sf.pos.assign(nv, -1);
  sf.neg.assign(nv, -1);
  int cols = 0;
  for (int j = 0; j < nv; ++j) {
    if (lp.signs[j] == Sign::kZero) continue;
    sf.pos[j] = cols++;
    if (lp.signs[j] == Sign::kFree) sf.neg[j] = cols++;
  }
  const int slackStart = cols;
  cols += static_cast<int>(lp.Aub.rows());
  const int rows = static_cast<int>(lp.Aeq.rows() + lp.Aub.rows());
  sf.A = Matrix::Zero(rows, cols);
  sf.b = Vector::Zero(rows);
  sf.c = Vector::Zero(cols);
  auto fillRow = [&](int r, const auto& row, double rhs) {
    for (int j = 0; j < nv; ++j) {
      if (sf.pos[j] >= 0) sf.A(r, sf.pos[j]) = row(j);
      if (sf.neg[j] >= 0) sf.A(r, sf.neg[j]) = -row(j);
    }
    sf.b[r] = rhs;
  };
  int r = 0;
  for (int i = 0; i < lp.Aeq.rows(); ++i) fillRow(r++, lp.Aeq.row(i), lp.beq[i]);
  for (int i = 0; i < lp.Aub.rows(); ++i) {
    fillRow(r, lp.Aub.row(i), lp.bub[i]);
    sf.A(r, slackStart + i) = 1.0;
    ++r;
  }
  for (int i = 0; i < rows; ++i)
    if (sf.b[i] < 0) {
      sf.A.row(i) *= -1.0;
      sf.b[i] *= -1.0;
    }
  if (objective.size() == nv) {
    const double sgn = maximize ? -1.0 : 1.0;
    for (int j = 0; j < nv; ++j) {
      if (sf.pos[j] >= 0) sf.c[sf.pos[j]] = sgn * objective[j];
      if (sf.neg[j] >= 0) sf.c[sf.neg[j]] = -sgn * objective[j];
    }
  }
  return sf;
}

void pivot(Matrix& T, std::vector<int>& basis, int row, int col) {
  T.row(row) /= T(row, col);
  for (int i = 0; i < T.rows(); ++i) {
    if (i == row) continue;
    const double f = T(i, col);
    if (f != 0.0) T.row(i) -= f * T.row(row);
  }
  basis[row] = col;
}

enum class SimplexOutcome { kOptimal, kUnbounded };

// Tableau rows 0..m-1 are constraints, row m holds reduced costs, the last
// column holds the right-hand side. Bland's rule: lowest-index entering
// column, ratio ties broken by lowest basic variable index.
SimplexOutcome runSimplex(Matrix& T, std::vector<int>& basis, int activeCols,
                          int* enteringOnUnbounded) {
  const int m = static_cast<int>(T.rows()) - 1;
  const int rhs = static_cast<int>(T.cols()) - 1;
  for (int it = 0; it < kMaxPivots; ++it) {
    int enter = -1;
    for (int j = 0; j < activeCols; ++j)
      if (T(m, j) < -kReducedCostTol) {
        enter = j;
        break;
      }
    if (enter < 0) return SimplexOutcome::kOptimal;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (T(i, enter) <= kPivotTol) continue;
      const double ratio = std::max(T(i, rhs), 0.0) / T(i, enter);
      if (leave < 0) {
        best = ratio;
        leave = i;
        continue;
      }
      const double slack = 1e-14 * std::max(1.0, best);
      if (ratio < best - slack ||
          (ratio <= best + slack && basis[i] < basis[leave])) {
        best = std::min(best, ratio);
        leave = i;
      }
    }
    if (leave < 0) {
      if (enteringOnUnbounded) *enteringOnUnbounded = enter;
      return SimplexOutcome::kUnbounded;
    }
    pivot(T, basis, leave, enter);
  }
  throw std::runtime_error("simplex pivot limit reached");
}

// Recomputes basic values from the original data for accuracy.
void polishBasic(const StandardForm& sf, const std::vector<int>& basis,
                 const std::vector<int>& rows, Vector& y, double tol) {
  const int k = static_cast<int>(basis.size());
  if (k == 0) return;
  Matrix B(rows.size(), k);
  Vector rhs(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < k; ++j) B(i, j) = sf.A(rows[i], basis[j]);
    rhs[i] = sf.b[rows[i]];
  }
  const Vector yb = B.colPivHouseholderQr().solve(rhs);
  if (!yb.allFinite() || (yb.array() < -tol).any()) return;
  Vector candidate = y;
  for (int j = 0; j < k; ++j) candidate[basis[j]] = std::max(yb[j], 0.0);
  const double before = (sf.A * y - sf.b).lpNorm<Eigen::Infinity>();
  const double after = (sf.A * candidate - sf.b).lpNorm<Eigen::Infinity>();
  if (after <= before) y = candidate;
}

}  // namespace

LpSolution solveLinearProgram(const LinearProgram& lp, const Vector& objective,
                              bool maximize, double tol) {
  const StandardForm sf = toStandardForm(lp, objective, maximize);
  const int m = static_cast<int>(sf.A.rows());
  const int n = static_cast<int>(sf.A.cols());
  LpSolution out;

  // Phase 1: artificial variable per row.
  Matrix T = Matrix::Zero(m + 1, n + m + 1);
  T.topLeftCorner(m, n) = sf.A;
  T.block(0, n, m, m) = Matrix::Identity(m, m);
  T.col(n + m).head(m) = sf.b;
  for (int i = 0; i < m; ++i) {
    T.row(m).head(n) -= sf.A.row(i);
    T(m, n + m) -= sf.b[i];
  }
  std::vector<int> basis(m);
  std::iota(basis.begin(), basis.end(), n);
  runSimplex(T, basis, n + m, nullptr);
  const double infeas = -T(m, n + m);
  const double scale = std::max(1.0, m > 0 ? sf.b.lpNorm<Eigen::Infinity>() : 0.0);
  if (infeas > tol * scale) return out;

  // Drive artificials out of the basis; drop redundant rows.
  std::vector<int> keepRows;
  for (int i = 0; i < m; ++i) {
    if (basis[i] >= n) {
      int col = -1;
      double bestAbs = kPivotTol;
      for (int j = 0; j < n; ++j)
        if (std::abs(T(i, j)) > bestAbs) {
          bestAbs = std::abs(T(i, j));
          col = j;
        }
      if (col < 0) continue;
      pivot(T, basis, i, col);
    }
    keepRows.push_back(i);
  }

  // Phase 2 tableau.
  const int m2 = static_cast<int>(keepRows.size());
  Matrix T2 = Matrix::Zero(m2 + 1, n + 1);
  std::vector<int> basis2(m2);
  for (int r = 0; r < m2; ++r) {
    T2.row(r).head(n) = T.row(keepRows[r]).head(n);
    T2(r, n) = T(keepRows[r], n + m);
    basis2[r] = basis[keepRows[r]];
  }
  T2.row(m2).head(n) = sf.c.transpose();
  for (int r = 0; r < m2; ++r) {
    const double cb = sf.c[basis2[r]];
    if (cb != 0.0) T2.row(m2) -= cb * T2.row(r);
  }
  int enteringRay = -1;
  const SimplexOutcome outcome = runSimplex(T2, basis2, n, &enteringRay);

  Vector y = Vector::Zero(n);
  for (int r = 0; r < m2; ++r) y[basis2[r]] = std::max(T2(r, n), 0.0);
  polishBasic(sf, basis2, keepRows, y, tol);

  out.x = Vector::Zero(lp.numVars());
  for (int j = 0; j < lp.numVars(); ++j) {
    double v = 0.0;
    if (sf.pos[j] >= 0) v += y[sf.pos[j]];
    if (sf.neg[j] >= 0) v -= y[sf.neg[j]];
    out.x[j] = v;
  }
  if (outcome == SimplexOutcome::kUnbounded) {
    out.status = LpStatus::kUnbounded;
    out.value = maximize ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
    return out;
  }
  out.status = LpStatus::kOptimal;
  out.value = objective.size() == lp.numVars() ? objective.dot(out.x) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Pattern-level operations

namespace {

LinearProgram equalityProgram(const Matrix& A, const Vector& b,
                              const SignPattern& convex) {
  LinearProgram lp(static_cast<int>(A.cols()));
  lp.Aeq = A;
  lp.beq = b;
  lp.signs = convex.signs();
  return lp;
}

// Zero entries exactly zero and tiny negative NonNeg entries clamped.
void cleanWitness(Vector& x, const SignPattern& convex, double tol) {
  for (int i = 0; i < x.size(); ++i) {
    if (convex[i] == Sign::kZero) x[i] = 0.0;
    if (convex[i] == Sign::kNonNeg && x[i] < 0.0 && x[i] >= -tol) x[i] = 0.0;
  }
}

void normalizeRay(Vector& x) {
  int arg = 0;
  for (int i = 1; i < x.size(); ++i)
    if (std::abs(x[i]) > std::abs(x[arg]) + 1e-14) arg = i;
  // Positive scaling only: the ray must keep its signs.
  const double s = x[arg] > 0.0 ? 1.0 : -1.0;
  x /= std::abs(x[arg]);
  x = x.unaryExpr([](double v) { return v == 0.0 ? 0.0 : v; });
  x[arg] = s;
}

}  // namespace

LinearCertificate feasibleUnderPattern(const Matrix& A, const Vector& b,
                                       const SignPattern& pat,
                                       const KernelOptions& opts) {
  if (A.cols() != pat.size() || A.rows() != b.size())
    throw std::invalid_argument("feasibleUnderPattern: dimension mismatch");
  checkPairCap(pat, opts.maxPairs);
  for (uint64_t k = 0; k < pat.caseCount(); ++k) {
    const SignPattern convex = pat.convexCase(k);
    const LpSolution sol =
        solveLinearProgram(equalityProgram(A, b, convex), Vector(), false,
                           opts.linTol);
    if (sol.status != LpStatus::kOptimal) continue;
    Vector x = sol.x;
    cleanWitness(x, convex, opts.linTol);
    return LinearCertificate::feasible(A, b, pat, std::move(x), k, opts.linTol);
  }
  return LinearCertificate::infeasible();
}

LinearCertificate nonzeroConeKernelIntersection(const Matrix& A,
                                                const SignPattern& pat,
                                                const KernelOptions& opts) {
  if (A.cols() != pat.size())
    throw std::invalid_argument("nonzeroConeKernelIntersection: dimension mismatch");
  checkPairCap(pat, opts.maxPairs);
  const int nv = static_cast<int>(A.cols());
  for (uint64_t k = 0; k < pat.caseCount(); ++k) {
    const SignPattern convex = pat.convexCase(k);
    std::vector<int> freeCols;
    for (int j = 0; j < nv; ++j)
      if (convex[j] == Sign::kFree) freeCols.push_back(j);
    if (!freeCols.empty()) {
      Matrix sub(A.rows(), freeCols.size());
      for (size_t c = 0; c < freeCols.size(); ++c) sub.col(c) = A.col(freeCols[c]);
      const Matrix basis = nullspaceBasis(sub, opts.rankTol);
      if (basis.cols() > 0) {
        Vector x = Vector::Zero(nv);
        for (size_t c = 0; c < freeCols.size(); ++c) x[freeCols[c]] = basis(c, 0);
        normalizeRay(x);
        return LinearCertificate::nonzero(A, pat, std::move(x), k, opts.linTol);
      }
    }
    for (int i = 0; i < nv; ++i) {
      if (convex[i] != Sign::kNonNeg) continue;
      LinearProgram lp = equalityProgram(A, Vector::Zero(A.rows()), convex);
      Vector e = Vector::Zero(nv);
      e[i] = 1.0;
      lp.addEquality(e, 1.0);
      const LpSolution sol = solveLinearProgram(lp, Vector(), false, opts.linTol);
      if (sol.status != LpStatus::kOptimal) continue;
      Vector x = sol.x;
      cleanWitness(x, convex, opts.linTol);
      normalizeRay(x);
      cleanWitness(x, convex, opts.linTol);
      return LinearCertificate::nonzero(A, pat, std::move(x), k, opts.linTol);
    }
  }
  return LinearCertificate::onlyZero();
}

MaximizeResult maximizeLinear(const Vector& c, const Matrix& A,
                              const Vector& b, const SignPattern& pat,
                              const KernelOptions& opts) {
  if (A.cols() != pat.size() || c.size() != pat.size() || A.rows() != b.size())
    throw std::invalid_argument("maximizeLinear: dimension mismatch");
  checkPairCap(pat, opts.maxPairs);
  MaximizeResult best;
  bool any = false;
  for (uint64_t k = 0; k < pat.caseCount(); ++k) {
    const SignPattern convex = pat.convexCase(k);
    const LpSolution sol =
        solveLinearProgram(equalityProgram(A, b, convex), c, true, opts.linTol);
    if (sol.status == LpStatus::kInfeasible) continue;
    if (sol.status == LpStatus::kUnbounded) {
      best.status = LpStatus::kUnbounded;
      best.value = std::numeric_limits<double>::infinity();
      best.argmax = sol.x;
      best.caseIndex = k;
      return best;
    }
    Vector x = sol.x;
    cleanWitness(x, convex, opts.linTol);
    const double v = c.dot(x);
    if (!any || v > best.value + opts.linTol) {
      best.status = LpStatus::kOptimal;
      best.value = v;
      best.argmax = std::move(x);
      best.caseIndex = k;
      any = true;
    }
  }
  return best;
}

}  // namespace mpsc
