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

#include <cmath>
#include <random>

#include "mpsc/model.h"
#include "support.h"

using namespace mpsc;
using mpsc::testing::vec;

namespace {

std::vector<double> pt(std::initializer_list<double> v) { return v; }

// Random smooth expression over n variables built from the whole grammar
// except division, log and sqrt (which need domain care).
Expr randomTree(std::mt19937_64& rng, int n, int depth) {
  std::uniform_int_distribution<int> pick(0, 8), var(0, n - 1), small(-3, 3);
  if (depth == 0) {
    return pick(rng) < 6 ? Expr::var(var(rng)) : Expr::constant(small(rng) * 0.5);
  }
  switch (pick(rng)) {
    case 0:
    case 1:
      return randomTree(rng, n, depth - 1) + randomTree(rng, n, depth - 1);
    case 2:
      return randomTree(rng, n, depth - 1) - randomTree(rng, n, depth - 1);
    case 3:
    case 4:
      return randomTree(rng, n, depth - 1) * randomTree(rng, n, depth - 1);
    case 5:
      return pow(randomTree(rng, n, depth - 1), std::uniform_int_distribution<int>(0, 3)(rng));
    case 6:
      return sin(randomTree(rng, n, depth - 1));
    case 7:
      return cos(randomTree(rng, n, depth - 1));
    default:
      return exp(Expr::constant(0.25) * randomTree(rng, n, depth - 1));
  }
}

double relErr(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("differentiate: polynomial and constant rules") {
  const Expr z1 = Expr::var(0), z2 = Expr::var(1);
  const Expr f = z1 + pow(z2, 2);
  const Expr df2 = differentiate(f, 1);
  for (double a : {-1.5, 0.0, 0.7}) CHECK(df2.evaluate(pt({0.3, a})) == doctest::Approx(2 * a));

  const Expr H = z1 - pow(z1, 2) * pow(z2, 2);
  const Expr dH1 = differentiate(H, 0);
  for (auto [a, b] : {std::pair{0.1, 0.1}, {0.5, -2.0}, {0.0, 0.0}})
    CHECK(dH1.evaluate(pt({a, b})) == doctest::Approx(1 - 2 * a * b * b));

  CHECK(differentiate(Expr::constant(4.5), 0).isZero());
}

TEST_CASE("constant folding after differentiation") {
  const Expr z1 = Expr::var(0), z2 = Expr::var(1);
  CHECK(differentiate(z1 * z2, 0).toString() == "z2");
  CHECK(differentiate(z1 + z2, 1).isOne());
  CHECK(pow(z1, 0).isOne());
  CHECK(differentiate(Expr::constant(3) * z1, 1).isZero());
}

TEST_CASE("evaluate: value, gradient and Hessian of the objective") {
  const MpscInstance inst = mpsc::testing::switchingExample();
  const FunctionValue fv = inst.f().evaluate(pt({0, 0}), true);
  CHECK(fv.value == 0.0);
  CHECK(fv.gradient(0) == 1.0);
  CHECK(fv.gradient(1) == 0.0);
  REQUIRE(fv.hessian);
  CHECK((*fv.hessian)(0, 0) == 0.0);
  CHECK((*fv.hessian)(1, 1) == 2.0);
  CHECK((*fv.hessian)(0, 1) == 0.0);
}

TEST_CASE("evaluate: switching function of the CPLD counterexample") {
  const MpscInstance inst = mpsc::testing::cpldCounterexample();
  const SmoothFunction& H = inst.switches()[0].H;
  CHECK(H.value(vec({0, 0})) == 0.0);
  const Vector g = H.gradient(vec({0, 0}));
  CHECK(g(0) == 1.0);
  CHECK(g(1) == 0.0);
  const Vector g2 = H.gradient(vec({0.1, 0.1}));
  CHECK(g2(0) == doctest::Approx(1 - 2 * 0.1 * 0.01));
  CHECK(g2(1) == doctest::Approx(-2 * 0.01 * 0.1));
}

TEST_CASE("domain errors are raised, never silent non-finite values") {
  const Expr z1 = Expr::var(0);
  CHECK_THROWS_AS(log(z1).evaluate(pt({-1.0})), DomainError);
  CHECK_THROWS_AS(log(z1).evaluate(pt({0.0})), DomainError);
  CHECK_THROWS_AS(sqrt(z1).evaluate(pt({-0.5})), DomainError);
  CHECK_THROWS_AS((Expr::constant(1) / z1).evaluate(pt({0.0})), DomainError);
  CHECK_THROWS_AS(pow(z1, -1).evaluate(pt({0.0})), DomainError);
  CHECK(sqrt(z1).evaluate(pt({0.0})) == 0.0);
  try {
    log(z1).evaluate(pt({-1.0}));
  } catch (const DomainError& e) {
    CHECK(e.point() == pt({-1.0}));
    CHECK(e.node().find("log") != std::string::npos);
  }
}

TEST_CASE("instance signature and affinity") {
  const MpscInstance a = mpsc::testing::switchingExample();
  CHECK(a.n() == 2);
  CHECK(a.p() == 1);
  CHECK(a.q() == 0);
  CHECK(a.m() == 1);
  CHECK(a.multiplierDimension() == 3);
  CHECK(a.constraintsAffine());
  CHECK_FALSE(a.f().isAffine());
  CHECK_FALSE(mpsc::testing::cpldCounterexample().constraintsAffine());
  CHECK_THROWS_AS(MpscInstance(1, Expr::var(1), {}, {}, {}), std::invalid_argument);
}

TEST_CASE("property: symbolic derivatives agree with finite differences") {
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worstGrad = 0.0, worstHess = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 3;
    const SmoothFunction fn(randomTree(rng, n, 3), n);
    for (int k = 0; k < 10; ++k) {
      Vector z(n);
      for (int i = 0; i < n; ++i) z(i) = u(rng);
      const Vector grad = fn.gradient(z);
      const Matrix hess = fn.hessian(z);
      for (int i = 0; i < n; ++i) {
        const double h = 1e-6;
        Vector zp = z, zm = z;
        zp(i) += h;
        zm(i) -= h;
        worstGrad = std::max(worstGrad, relErr((fn.value(zp) - fn.value(zm)) / (2 * h), grad(i)));
        for (int j = 0; j < n; ++j) {
          const double s = 1e-4;
          auto at = [&](double di, double dj) {
            Vector w = z;
            w(i) += di;
            w(j) += dj;
            return fn.value(w);
          };
          const double fd = (at(s, s) - at(s, -s) - at(-s, s) + at(-s, -s)) / (4 * s * s);
          worstHess = std::max(worstHess, relErr(fd, hess(i, j)));
          CHECK(hess(i, j) == hess(j, i));
        }
      }
    }
  }
  CHECK(worstGrad < 1e-5);
  CHECK(worstHess < 1e-4);
}

TEST_CASE("property: differentiation is linear") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2;
    const Expr e1 = randomTree(rng, n, 3), e2 = randomTree(rng, n, 3);
    const double a = std::round(u(rng) * 8) / 4;
    const Expr lhs = differentiate(Expr::constant(a) * e1 + e2, 0);
    const Expr rhs = Expr::constant(a) * differentiate(e1, 0) + differentiate(e2, 0);
    for (int k = 0; k < 10; ++k) {
      const std::vector<double> z{u(rng), u(rng)};
      CHECK(std::abs(lhs.evaluate(z) - rhs.evaluate(z)) <= 1e-12 * std::max(1.0, std::abs(rhs.evaluate(z))));
    }
  }
}
