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

#include "mpsc/analysis.h"
#include "mpsc/bounds.h"
#include "mpsc/errors.h"
#include "support.h"

using namespace mpsc;
using mpsc::testing::vec;

using Set = std::vector<int>;

TEST_CASE("index sets at a biactive point") {
  const MpscInstance inst = mpsc::testing::switchingExample();
  const ActivePattern pat = computeIndexSets(inst, vec({0, 0}));
  CHECK(pat.feasible());
  CHECK(pat.Ig == Set{0});
  CHECK(pat.IGH == Set{0});
  CHECK(pat.IG.empty());
  CHECK(pat.IH.empty());
  CHECK(pat.residual == 0.0);

  const ActivePattern ce = computeIndexSets(mpsc::testing::cpldCounterexample(), vec({0, 0}));
  CHECK(ce.IGH == Set{0});
}

TEST_CASE("index sets away from the origin") {
  const MpscInstance inst = mpsc::testing::switchingExample();
  const ActivePattern pat = computeIndexSets(inst, vec({1, 0}));
  CHECK(pat.Ig.empty());
  CHECK(pat.IH == Set{0});
  CHECK(pat.IG.empty());
  CHECK(pat.IGH.empty());
  const ActivePattern bad = computeIndexSets(inst, vec({0.5, 0.5}));
  CHECK_FALSE(bad.feasible());
  CHECK(bad.violatedSwitches == Set{0});
  CHECK(computeIndexSets(inst, vec({1e-8 * 1.5, 0})).nearBoundary);
}

TEST_CASE("directional index sets") {
  const MpscInstance inst = mpsc::testing::switchingExample();
  const ActivePattern pat = computeIndexSets(inst, vec({0, 0}));
  const DirectionalPattern dp = computeDirectionalIndexSets(pat, vec({0, -1}));
  CHECK(dp.inLinearizationCone);
  CHECK(dp.Igd.empty());
  CHECK(dp.IGd == Set{0});
  CHECK(dp.IHd.empty());
  CHECK(dp.IGHd.empty());

  const DirectionalPattern zero = computeDirectionalIndexSets(pat, vec({0, 0}));
  CHECK(zero.Igd == pat.Ig);
  CHECK(zero.IGHd == pat.IGH);
  CHECK(zero.IGd.empty());
  CHECK(zero.IHd.empty());

  const ActivePattern ce = computeIndexSets(mpsc::testing::cpldCounterexample(), vec({0, 0}));
  CHECK(computeDirectionalIndexSets(ce, vec({0, 1})).IGHd == Set{0});
}

TEST_CASE("linearization and critical cones") {
  const MpscInstance inst = mpsc::testing::switchingExample();
  const ActivePattern pat = computeIndexSets(inst, vec({0, 0}));
  CHECK(linearizationConeMember(pat, vec({0, -1})));
  CHECK_FALSE(linearizationConeMember(pat, vec({1, 1})));
  CHECK(linearizationConeMember(pat, vec({1, 0})));
  CHECK(criticalConeMember(pat, vec({0, -1})));
  CHECK_FALSE(criticalConeMember(pat, vec({1, 0})));
  CHECK(criticalConeMember(pat, vec({0, 0})));
}

TEST_CASE("bipartition enumeration order and caps") {
  const MpscInstance inst = mpsc::testing::switchingExample();
  const auto one = enumerateBipartitions(computeIndexSets(inst, vec({0, 0})));
  REQUIRE(one.size() == 2);
  CHECK(one[0].beta1 == Set{0});
  CHECK(one[0].beta2.empty());
  CHECK(one[1].beta2 == Set{0});
  CHECK(one[0].toString() == "{1};{}");

  const auto none = enumerateBipartitions(computeIndexSets(inst, vec({1, 0})));
  REQUIRE(none.size() == 1);
  CHECK(none[0].beta1.empty());
  CHECK(none[0].beta2.empty());

  const MpscInstance two = parseInstance("vars: x y\nobjective: x\nswitch: x, y\nswitch: y, x\n");
  const ActivePattern tp = computeIndexSets(two, vec({0, 0}));
  CHECK(enumerateBipartitions(tp).size() == 4);
  CHECK_THROWS_AS(enumerateBipartitions(tp, 1), CapExceeded);
  CHECK_THROWS_AS(Bipartition({0}, {0}, {0}), std::invalid_argument);
  CHECK_THROWS_AS(Bipartition({0}, {}, {0, 1}), std::invalid_argument);
}

TEST_CASE("tightened and branch problems") {
  const MpscInstance inst = mpsc::testing::switchingExample();
  const ActivePattern pat = computeIndexSets(inst, vec({0, 0}));
  const NlpView t = buildTnlp(inst, pat);
  REQUIRE(t.eq.size() == 2);
  CHECK(t.eqFrom[0].label() == "G1");
  CHECK(t.eqFrom[1].label() == "H1");
  REQUIRE(t.ineq.size() == 1);
  CHECK(t.ineqFrom[0].label() == "g1");

  const MpscInstance ce = mpsc::testing::cpldCounterexample();
  const ActivePattern cp = computeIndexSets(ce, vec({0, 0}));
  const NlpView b1 = buildBranchNlp(ce, cp, Bipartition({0}, {}, cp.IGH));
  REQUIRE(b1.eq.size() == 1);
  CHECK(b1.eqFrom[0].label() == "G1");
  CHECK(b1.eq[0].value(vec({0.3, 1})) == -0.3);
  const NlpView tc = buildTnlp(ce, cp);
  REQUIRE(tc.eq.size() == 2);
  CHECK(tc.eq[1].value(vec({0.5, 2})) == doctest::Approx(0.5 - 0.25 * 4));
}

TEST_CASE("property: zero direction reproduces the plain pattern on the corpus") {
  for (uint64_t k = 0; k < 100; ++k) {
    const MpscInstance inst = mpsc::testing::randomInstance(11, k);
    const ActivePattern pat = computeIndexSets(inst, Vector::Zero(inst.n()));
    REQUIRE(pat.feasible());
    const DirectionalPattern dp = computeDirectionalIndexSets(pat, Vector::Zero(inst.n()));
    CHECK(dp.Igd == pat.Ig);
    CHECK(dp.IGHd == pat.IGH);
    CHECK(dp.IGd.empty());
    CHECK(dp.IHd.empty());
    CHECK(dp.inLinearizationCone);
  }
}

TEST_CASE("property: branch feasible sets lie in the switching feasible set") {
  // Affine fixture with two biactive pairs; branch feasible sets are
  // polyhedra sampled by rejection.
  const MpscInstance inst = parseInstance(
      "vars: x y w\nobjective: x\nineq: x + y + w - 1\nswitch: x - w, y\nswitch: y + w, x\n");
  const ActivePattern pat = computeIndexSets(inst, vec({0, 0, 0}));
  REQUIRE(pat.IGH.size() == 2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const Bipartition& bp : enumerateBipartitions(pat)) {
    const NlpView v = buildBranchNlp(inst, pat, bp);
    int checked = 0;
    // Branch equalities are affine and fix a subspace; sample it through a
    // null-space parametrization.
    REQUIRE(v.eq.size() == 2);
    Matrix A(2, 3);
    for (size_t r = 0; r < v.eq.size(); ++r) A.row(static_cast<Eigen::Index>(r)) = v.eq[r].gradient(vec({0, 0, 0})).transpose();
    const Matrix N = Eigen::FullPivLU<Matrix>(A).kernel();
    while (checked < 1000) {
      Vector c(N.cols());
      for (int j = 0; j < N.cols(); ++j) c(j) = u(rng);
      const Vector z = N * c;
      bool ok = true;
      for (const auto& g : v.ineq) ok = ok && g.value(z) <= 0;
      if (!ok) continue;
      CHECK(residual(inst, z).total <= 1e-8);
      ++checked;
    }
  }
}

TEST_CASE("property: every feasible point belongs to some branch") {
  const MpscInstance inst = mpsc::testing::switchingExample();
  const ActivePattern pat = computeIndexSets(inst, vec({0, 0}));
  const auto bps = enumerateBipartitions(pat);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  int feasible = 0;
  for (int k = 0; k < 20000 && feasible < 1000; ++k) {
    // Draw on the axes half the time so feasible points actually occur.
    Vector z = vec({u(rng), u(rng)});
    if (k % 2) z(k % 4 == 1 ? 0 : 1) = 0.0;
    if (residual(inst, z).total != 0.0) continue;
    ++feasible;
    bool inSome = false;
    for (const Bipartition& bp : bps) {
      const NlpView v = buildBranchNlp(inst, pat, bp);
      bool ok = true;
      for (const auto& g : v.ineq) ok = ok && g.value(z) <= 0;
      for (const auto& h : v.eq) ok = ok && h.value(z) == 0;
      inSome = inSome || ok;
    }
    CHECK(inSome);
  }
  CHECK(feasible == 1000);
}
