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

#include <doctest.h>

#include <random>

#include "mpsc/linkernel.h"
#include "support.h"

using namespace mpsc;
using mpsc::testing::RandomSystem;
using mpsc::testing::randomSystem;
using mpsc::testing::vec;

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix M(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double x : row) M(i, j++) = x;
    ++i;
  }
  return M;
}

// Multiplier system of the switching example at the origin: columns grad g, grad G,
// grad H; right-hand side -grad f.
Matrix switchingSystem() { return rows({{-1, 1, 0}, {1, 0, 1}}); }
Vector switchingRhs() { return vec({-1, 0}); }

}  // namespace

TEST_CASE("rank") {
  CHECK(rank(rows({{-1, 0}, {1, 0}})) == 1);
  CHECK(rank(rows({{1, 0}, {0, 1}})) == 2);
  CHECK(rank(Matrix::Zero(3, 2)) == 0);
  CHECK(rank(Matrix(0, 3)) == 0);
  CHECK(rank(rows({{-1, 0}, {1 - 2 * 0.1 * 0.01, -2 * 0.01 * 0.1}})) == 2);
  const Vector s = singularValues(rows({{3, 0}, {0, -4}}));
  CHECK(s(0) == doctest::Approx(4));
  CHECK(s(1) == doctest::Approx(3));
}

TEST_CASE("null space basis") {
  const Matrix n1 = nullspaceBasis(rows({{1, 0}}));
  REQUIRE(n1.cols() == 1);
  CHECK(std::abs(n1(0, 0)) < 1e-14);
  CHECK(std::abs(std::abs(n1(1, 0)) - 1) < 1e-14);
  CHECK(nullspaceBasis(Matrix::Zero(1, 2)).cols() == 2);
  // -mu_g + mu_G = 0, mu_g + mu_H = 0 has generator (1, 1, -1).
  const Matrix n3 = nullspaceBasis(switchingSystem());
  REQUIRE(n3.cols() == 1);
  const Vector g = n3.col(0) / n3(0, 0);
  CHECK(g(1) == doctest::Approx(1));
  CHECK(g(2) == doctest::Approx(-1));
  // Orthonormality on a random matrix.
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  Matrix M(3, 7);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 7; ++j) M(i, j) = nd(rng);
  const Matrix N = nullspaceBasis(M);
  CHECK(N.cols() == 4);
  CHECK((M * N).norm() < 1e-12);
  CHECK((N.transpose() * N - Matrix::Identity(4, 4)).norm() < 1e-12);
}

TEST_CASE("feasibility under sign patterns") {
  // S-system: both switching multipliers forced to zero.
  SignPattern s(3);
  s.set(0, Sign::kNonNeg);
  s.set(1, Sign::kZero);
  s.set(2, Sign::kZero);
  CHECK(feasibleUnderPattern(switchingSystem(), switchingRhs(), s).status() ==
        LinearCertificate::Status::kInfeasible);
  // M-system: complementary pair on (G, H).
  SignPattern m(3);
  m.set(0, Sign::kNonNeg);
  m.addComplementaryPair(2, 1);
  const LinearCertificate c = feasibleUnderPattern(switchingSystem(), switchingRhs(), m);
  REQUIRE(c.found());
  CHECK(c.witness()(0) == doctest::Approx(0).epsilon(1e-12));
  CHECK(c.witness()(1) == doctest::Approx(-1));
  CHECK(c.witness()(2) == 0.0);
  // Zero right-hand side, all free.
  const LinearCertificate z = feasibleUnderPattern(switchingSystem(), vec({0, 0}), SignPattern(3));
  REQUIRE(z.found());
  CHECK(z.witness().norm() == 0.0);
}

TEST_CASE("nonzero cone-kernel intersection") {
  // NNAMCQ system at the switching example: only zero.
  SignPattern m(3);
  m.set(0, Sign::kNonNeg);
  m.addComplementaryPair(2, 1);
  CHECK(nonzeroConeKernelIntersection(switchingSystem(), m).status() ==
        LinearCertificate::Status::kOnlyZero);
  // Opposite gradients with free multipliers.
  const LinearCertificate c = nonzeroConeKernelIntersection(rows({{-1, 1}, {0, 0}}), SignPattern(2));
  REQUIRE(c.found());
  CHECK(c.witness()(0) == doctest::Approx(c.witness()(1)));
  CHECK(c.witness().cwiseAbs().maxCoeff() == doctest::Approx(1));
  CHECK(nonzeroConeKernelIntersection(Matrix::Identity(3, 3), SignPattern(3)).status() ==
        LinearCertificate::Status::kOnlyZero);
}

TEST_CASE("linear maximization") {
  SignPattern free1(1);
  const MaximizeResult one = maximizeLinear(vec({1}), rows({{1}}), vec({1}), free1);
  CHECK(one.status == LpStatus::kOptimal);
  CHECK(one.value == doctest::Approx(1));
  SignPattern nn(1, Sign::kNonNeg);
  const MaximizeResult unb = maximizeLinear(vec({1}), Matrix(0, 1), Vector(0), nn);
  CHECK(unb.status == LpStatus::kUnbounded);
  CHECK(std::isinf(unb.value));
  SignPattern bad(1, Sign::kNonNeg);
  CHECK(maximizeLinear(vec({1}), rows({{1}}), vec({-1}), bad).status == LpStatus::kInfeasible);

  // Second-order value 2 + 0 * lambda_G over the directional S-multipliers.
  SignPattern dirS(3);
  dirS.set(0, Sign::kZero);
  dirS.set(2, Sign::kZero);
  const MaximizeResult so = maximizeLinear(vec({0, 0, 0}), switchingSystem(), switchingRhs(), dirS);
  CHECK(so.status == LpStatus::kOptimal);
  CHECK(2 + so.value == doctest::Approx(2));
  CHECK(so.argmax(1) == doctest::Approx(-1));
}

TEST_CASE("sign pattern bookkeeping") {
  SignPattern p(4);
  p.addComplementaryPair(0, 2);
  CHECK_THROWS(p.addComplementaryPair(2, 3));
  CHECK_THROWS(p.addComplementaryPair(1, 1));
  CHECK(p.caseCount() == 2);
  CHECK(p.convexCase(0)[0] == Sign::kZero);
  CHECK(p.convexCase(1)[2] == Sign::kZero);
  CHECK(p.admits(vec({0, 5, 3, 1}), 1e-9));
  CHECK_FALSE(p.admits(vec({1, 5, 3, 1}), 1e-9));
  SignPattern big(50);
  for (int k = 0; k < 21; ++k) big.addComplementaryPair(2 * k, 2 * k + 1);
  CHECK_THROWS_AS(checkPairCap(big, 20), CapExceeded);
  CHECK_THROWS_AS(feasibleUnderPattern(Matrix::Zero(1, 50), vec({1}), big), CapExceeded);
}

TEST_CASE("property: verdicts are invariant under positive row scaling") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> sc(0.01, 100);
  std::vector<std::tuple<Matrix, Vector, SignPattern>> fixtures;
  SignPattern m(3);
  m.set(0, Sign::kNonNeg);
  m.addComplementaryPair(2, 1);
  SignPattern s(3);
  s.set(0, Sign::kNonNeg);
  s.set(1, Sign::kZero);
  s.set(2, Sign::kZero);
  fixtures.emplace_back(switchingSystem(), switchingRhs(), m);
  fixtures.emplace_back(switchingSystem(), switchingRhs(), s);
  for (int k = 0; k < 6; ++k) {
    const RandomSystem r = randomSystem(rng);
    fixtures.emplace_back(r.A, r.b, r.pat);
  }
  for (const auto& [A, b, pat] : fixtures) {
    const bool base = feasibleUnderPattern(A, b, pat).found();
    for (int t = 0; t < 10; ++t) {
      Vector d(A.rows());
      for (int i = 0; i < A.rows(); ++i) d(i) = sc(rng);
      CHECK(feasibleUnderPattern(d.asDiagonal() * A, d.asDiagonal() * b, pat).found() == base);
    }
  }
}

TEST_CASE("property: kernel agrees with the basic-solution oracle") {
  std::mt19937_64 rng(8);
  int agree = 0, feasibleCount = 0;
  for (int t = 0; t < 100; ++t) {
    const RandomSystem s = randomSystem(rng);
    const LinearCertificate c = feasibleUnderPattern(s.A, s.b, s.pat);
    const bool oracle = mpsc::testing::oracleFeasible(s.A, s.b, s.pat);
    agree += c.found() == oracle;
    feasibleCount += oracle;
    if (c.found()) {
      CHECK((s.A * c.witness() - s.b).cwiseAbs().maxCoeff() <= 1e-9 * (1 + s.b.cwiseAbs().maxCoeff()));
      CHECK(s.pat.admits(c.witness(), 1e-9));
    }
    const LinearCertificate k = nonzeroConeKernelIntersection(s.A, s.pat);
    CHECK(k.found() == mpsc::testing::oracleNonzeroKernel(s.A, s.pat));
    if (k.found()) {
      CHECK((s.A * k.witness()).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK(k.witness().cwiseAbs().maxCoeff() == doctest::Approx(1));
    }
  }
  CHECK(agree == 100);
  // Both outcomes occur.
  CHECK(feasibleCount > 10);
  CHECK(feasibleCount < 90);
}
