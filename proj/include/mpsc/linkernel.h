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

// Dense linear-algebra kernel shared by every certificate-producing check:
// rank and null spaces from a one-sided Jacobi SVD, a two-phase simplex with
// Bland's rule, and exhaustive enumeration of complementarity cases.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mpsc/errors.h"
#include "mpsc/model.h"

namespace mpsc {

inline constexpr double kDefaultRankTol = 1e-10;
inline constexpr double kDefaultLinTol = 1e-9;
inline constexpr int kDefaultMaxPairs = 20;

enum class Sign { kFree, kNonNeg, kZero };

// Per-coordinate sign restrictions plus "complementary pairs" (a, b) meaning
// x_a = 0 or x_b = 0.
class SignPattern {
 public:
  SignPattern() = default;
  explicit SignPattern(int size, Sign fill = Sign::kFree);

  int size() const { return static_cast<int>(signs_.size()); }
  Sign operator[](int i) const { return signs_[i]; }
  void set(int i, Sign s);
  const std::vector<Sign>& signs() const { return signs_; }

  // Both coordinates must be distinct and not yet in another pair.
  void addComplementaryPair(int a, int b);
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

  // 2^(number of pairs). Case k zeroes the first coordinate of pair j when
  // bit j of k is 0 and the second coordinate otherwise.
  uint64_t caseCount() const { return uint64_t{1} << pairs_.size(); }
  // Convex sub-pattern for case k: no pairs, zeroed coordinates set to kZero.
  SignPattern convexCase(uint64_t k) const;

  // Exact membership (Zero entries exactly 0, NonNeg >= -tol, pairs with a
  // zero member within tol).
  bool admits(const Vector& x, double tol) const;

 private:
  std::vector<Sign> signs_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<int> pairOf_;
};

struct KernelOptions {
  double rankTol = kDefaultRankTol;
  double linTol = kDefaultLinTol;
  int maxPairs = kDefaultMaxPairs;
};

// Outcome of a linear feasibility or nonzero-cone search. Witnesses are
// re-verified on construction; a witness that fails its system is a
// std::logic_error.
class LinearCertificate {
 public:
  enum class Status { kFeasible, kInfeasible, kNonzeroFound, kOnlyZero };

  static LinearCertificate feasible(const Matrix& A, const Vector& b,
                                    const SignPattern& pat, Vector witness,
                                    uint64_t caseIndex, double tol);
  static LinearCertificate nonzero(const Matrix& A, const SignPattern& pat,
                                   Vector witness, uint64_t caseIndex,
                                   double tol);
  static LinearCertificate infeasible();
  static LinearCertificate onlyZero();

  Status status() const { return status_; }
  bool found() const {
    return status_ == Status::kFeasible || status_ == Status::kNonzeroFound;
  }
  const Vector& witness() const { return witness_; }
  double residual() const { return residual_; }
  // Complementarity case that produced the witness.
  uint64_t caseIndex() const { return case_; }

 private:
  LinearCertificate(Status s, Vector w, double r, uint64_t c)
      : status_(s), witness_(std::move(w)), residual_(r), case_(c) {}
  Status status_;
  Vector witness_;
  double residual_ = 0.0;
  uint64_t case_ = 0;
};

// Singular values (descending) from one-sided Jacobi iteration.
Vector singularValues(const Matrix& M);

// Number of singular values above tol * (largest singular value).
int rank(const Matrix& M, double tolRank = kDefaultRankTol);

// Orthonormal basis of {x : Mx = 0} as columns; cols(M) - rank(M) columns.
Matrix nullspaceBasis(const Matrix& M, double tolRank = kDefaultRankTol);

// Linear program over x with per-coordinate signs:
//   Aeq x = beq, Aub x <= bub.
// Either block may have zero rows.
struct LinearProgram {
  Matrix Aeq;
  Vector beq;
  Matrix Aub;
  Vector bub;
  std::vector<Sign> signs;

  LinearProgram() = default;
  explicit LinearProgram(int numVars);
  int numVars() const { return static_cast<int>(signs.size()); }
  void addEquality(const Vector& row, double rhs);
  void addInequality(const Vector& row, double rhs);
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Vector x;
  double value = 0.0;
};

// Maximizes (maximize = true) or minimizes objective . x. An empty objective
// means pure feasibility.
LpSolution solveLinearProgram(const LinearProgram& lp, const Vector& objective,
                              bool maximize, double tol = kDefaultLinTol);

// Does A x = b have a solution respecting `pat`? Cases are tried in order
// and the first feasible one is reported.
LinearCertificate feasibleUnderPattern(const Matrix& A, const Vector& b,
                                       const SignPattern& pat,
                                       const KernelOptions& opts = {});

// Is there x != 0 with A x = 0 respecting `pat`? The witness has unit
// max-norm and a positive largest-magnitude entry.
LinearCertificate nonzeroConeKernelIntersection(
    const Matrix& A, const SignPattern& pat, const KernelOptions& opts = {});

struct MaximizeResult {
  LpStatus status = LpStatus::kInfeasible;
  double value = 0.0;  // +inf when unbounded
  Vector argmax;       // a feasible point attaining value (if bounded)
  uint64_t caseIndex = 0;
};

// sup c . x over {A x = b, x respects pat}, maximized over all cases.
MaximizeResult maximizeLinear(const Vector& c, const Matrix& A,
                              const Vector& b, const SignPattern& pat,
                              const KernelOptions& opts = {});

// Throws CapExceeded if `pat` has more pairs than allowed.
void checkPairCap(const SignPattern& pat, int maxPairs);

}  // namespace mpsc
