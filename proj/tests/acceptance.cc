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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "mpsc/bounds.h"
#include "mpsc/cli.h"
#include "mpsc/cones.h"
#include "mpsc/cq.h"
#include "mpsc/format.h"
#include "mpsc/stationarity.h"
#include "support.h"

using namespace mpsc;
using mpsc::testing::vec;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "failed: " + what;
    }
  }
};

int failures = 0;

void criterion(int id, const char* title, double limitSeconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limitSeconds > 0 && secs >= limitSeconds) {
    o.pass = false;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += "runtime limit " + formatDouble(limitSeconds) + " s exceeded";
  }
  if (!o.pass) ++failures;
  std::printf("criterion %2d %s: %s (%.3f s)%s%s\n", id, o.pass ? "PASS" : "FAIL", title, secs,
              o.detail.empty() ? "" : " ", o.detail.c_str());
  std::fflush(stdout);
}

ActivePattern originOf(const MpscInstance& inst) {
  return computeIndexSets(inst, Vector::Zero(inst.n()));
}

double oracleDistance(const Vector& z) {
  return std::min(std::hypot(z(0), std::max(z(1), 0.0)), std::hypot(z(1), std::min(z(0), 0.0)));
}

Outcome switchingStationarity() {
  Outcome o;
  const MpscInstance inst = loadInstance(mpsc::testing::fixturePath("switching.mpsc"));
  const ActivePattern pat = originOf(inst);
  o.require(checkM(pat).holds, "M holds");
  o.require(!checkS(pat).holds, "S fails");
  const DirectionalPattern dp = computeDirectionalIndexSets(pat, vec({0, -1}));
  o.require(checkLicq(dp).verdict == CqVerdict::kHolds, "LICQ(d) holds");
  o.require(checkDirectional(dp, StationarityKind::kSd).holds, "S(d) holds");
  return o;
}

Outcome cpldCounterexample() {
  Outcome o;
  const MpscInstance inst = loadInstance(mpsc::testing::fixturePath("counterexample.mpsc"));
  const ActivePattern pat = originOf(inst);
  const CqReport a = checkNlpCq(buildTnlp(inst, pat), pat.at.z, NlpCq::kCpld);
  const CqReport b = checkNlpCq(buildTnlp(inst, pat), pat.at.z, NlpCq::kCpld);
  o.require(a.verdict == CqVerdict::kViolatedOnSamples, "TNLP-CPLD violated on samples");
  o.require(a.pointWitness && a.pointWitness->norm() <= a.sampling.radius * (1 + 1e-12),
            "witness inside the sampling ball");
  o.require(a.pointWitness && b.pointWitness && *a.pointWitness == *b.pointWitness,
            "witness reproducible");
  for (const Bipartition& bp : enumerateBipartitions(pat))
    o.require(checkNlpCq(buildBranchNlp(inst, pat, bp), pat.at.z, NlpCq::kLicq).verdict ==
                  CqVerdict::kHolds,
              "LICQ on NLP" + bp.toString());
  o.require(checkPiecewise(inst, pat, NlpCq::kCpld).holds(), "piecewise CPLD holds");
  if (a.pointWitness) o.detail = "witness (" + formatVector(asSpan(*a.pointWitness)) + ")";
  return o;
}

Outcome coneTable() {
  Outcome o;
  int rows = 0, probes = 0;
  for (const auto& row : mpsc::testing::coneTableRows()) {
    const FactorCone c = mpsc::testing::computeCone(row);
    o.require(c.tag == row.expected, std::string(row.label) + " tag");
    const int bad = mpsc::testing::coneOracleDisagreements(row, c);
    o.require(bad == 0, std::string(row.label) + " oracle disagreements " + std::to_string(bad));
    ++rows;
    probes += static_cast<int>(mpsc::testing::probeGrid().size());
  }
  o.require(rows == 19, "19 rows");
  if (o.pass) o.detail = std::to_string(rows) + " rows, " + std::to_string(probes) + " probes";
  return o;
}

Outcome errorBound() {
  Outcome o;
  const MpscInstance inst = loadInstance(mpsc::testing::fixturePath("switching.mpsc"));
  const ActivePattern ref = originOf(inst);
  const ErrorBoundEstimate e = estimateErrorBoundModulus(inst, ref, 0.5, 10000, 0);
  o.require(!e.inconclusive, "estimate conclusive");
  o.require(e.alphaHat >= 0.95 && e.alphaHat <= 1.05, "alpha in [0.95, 1.05]");
  o.require(std::abs(e.worstDistance - oracleDistance(e.worstPoint)) <= 1e-12,
            "worst distance matches the closed-form projection");
  // Every distance against the closed form on a separate batch.
  std::mt19937_64 rng(1);
  double worst = 0;
  for (int k = 0; k < 2000; ++k) {
    const Vector z = uniformBall(rng, Vector::Zero(2), 0.5);
    worst = std::max(worst, std::abs(distanceToFeasible(inst, ref, z).value - oracleDistance(z)));
  }
  o.require(worst <= 1e-12, "projection distances");
  const double r = residual(inst, vec({0.3, 0.2})).total;
  const double d = distanceToFeasible(inst, ref, vec({0.3, 0.2})).value;
  o.require(r == 0.2, "residual(0.3, 0.2) = 0.2");
  o.require(d == 0.2, "distance(0.3, 0.2) = 0.2");
  o.detail = "alpha " + formatDouble(e.alphaHat) + " over " + std::to_string(e.usedSamples) + " samples";
  return o;
}

Outcome exactPenalty() {
  Outcome o;
  const MpscInstance inst = loadInstance(mpsc::testing::fixturePath("switching.mpsc"));
  const ActivePattern ref = originOf(inst);
  const Vector zs = vec({0, 0});
  const ErrorBoundEstimate e = estimateErrorBoundModulus(inst, ref, 0.1, 1000, 0);
  const PenaltyFunction pen = buildPenalty(inst, zs, e.alphaHat, 0.1, 1000, 0);
  const PenaltyCheck full = verifyPenaltyLocalMin(pen, zs, 0.1, 10000, 0);
  o.require(full.holds, "penalized local minimum with weight " + formatDouble(pen.weight()));
  const PenaltyFunction half = pen.withWeight(pen.weight() / 2);
  o.require(half.weight() < 1, "halved weight below 1");
  const PenaltyCheck weak = verifyPenaltyLocalMin(half, zs, 0.1, 10000, 0);
  o.require(!weak.holds, "halved weight fails");
  o.require(!weak.holds && weak.witness(0) < 0 && std::abs(weak.witness(1)) < std::abs(weak.witness(0)),
            "witness near the negative z1 axis");
  o.detail = "weight " + formatDouble(pen.weight());
  if (!weak.holds) o.detail += ", halved witness (" + formatVector(asSpan(weak.witness)) + ")";
  return o;
}

// Directions with entries in {-1, 0, 1} that lie in the linearization cone.
std::vector<Vector> gridDirections(const ActivePattern& pat, size_t limit) {
  std::vector<Vector> out;
  const int n = pat.n();
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (int code = 1; code < total && out.size() < limit; ++code) {
    Vector d(n);
    int c = code;
    for (int i = 0; i < n; ++i, c /= 3) d(i) = (c % 3) - 1.0;
    if (linearizationConeMember(pat, d)) out.push_back(d);
  }
  return out;
}

Outcome latticeSuite() {
  Outcome o;
  constexpr int kInstances = 200;
  int directions = 0, violations = 0, strongChecks = 0;
  // How often each premise holds, so a vacuous pass is visible.
  int sCount = 0, mCount = 0, qmCount = 0, licqCount = 0, mfcqCount = 0, cpldCount = 0;
  int strongCount = 0, fosCount = 0, pseudoCount = 0;
  auto edge = [&](bool premise, bool conclusion, const std::string& name, uint64_t k) {
    if (premise && !conclusion) {
      ++violations;
      o.require(false, name + " on instance " + std::to_string(k));
    }
  };
  for (uint64_t k = 0; k < kInstances; ++k) {
    const MpscInstance inst = mpsc::testing::randomInstance(2026, k);
    const ActivePattern pat = originOf(inst);
    const DirectionalPattern plain = plainDirectional(pat);
    ImplicationBundle base;
    const bool w = checkW(pat).holds, m = checkM(pat).holds, s = checkS(pat).holds;
    const bool qm = checkQM(pat).holds;
    const CqReport licq = checkLicq(plain), mfcq = checkMfcq(pat), nnamcq = checkFoscms(plain);
    const CqReport cpld = checkNlpCq(buildTnlp(inst, pat), pat.at.z, NlpCq::kCpld);
    const CqReport pcpld = checkPiecewise(inst, pat, NlpCq::kCpld);
    sCount += s;
    mCount += m;
    qmCount += qm;
    licqCount += licq.holds();
    mfcqCount += mfcq.holds();
    cpldCount += cpld.holds();
    edge(s, m, "S => M", k);
    edge(m, w, "M => W", k);
    edge(qm, m, "QM => M", k);
    edge(licq.holds(), !mfcq.violated(), "LICQ => MFCQ", k);
    edge(mfcq.holds(), !nnamcq.violated(), "MFCQ => NNAMCQ", k);
    edge(cpld.holds(), !pcpld.violated(), "CPLD => piecewise CPLD", k);
    base.stationarity = {{"W", w}, {"M", m}, {"S", s}, {"QM", qm}};
    base.cq = {{"LICQ", licq.verdict},  {"MFCQ", mfcq.verdict}, {"NNAMCQ", nnamcq.verdict},
               {"CPLD", cpld.verdict},  {"piecewise-CPLD", pcpld.verdict}};
    for (const LatticeViolation& v : crossCheckImplications(base)) {
      ++violations;
      o.require(false, "cross-check " + v.toString() + " on instance " + std::to_string(k));
    }
    for (const Vector& d : gridDirections(pat, 6)) {
      ++directions;
      const DirectionalPattern dp = computeDirectionalIndexSets(pat, d);
      const bool md = checkDirectional(dp, StationarityKind::kMd).holds;
      const bool sd = checkDirectional(dp, StationarityKind::kSd).holds;
      const bool wd = checkDirectional(dp, StationarityKind::kWd).holds;
      const bool strong = checkStrongM(dp).holds;
      const CqReport licqD = checkLicq(dp), fos = checkFoscms(dp), sos = checkSoscms(inst, dp);
      const CqReport quasi = checkQuasiNormality(inst, dp), pseudo = checkPseudoNormality(inst, dp);
      strongCount += strong;
      fosCount += fos.holds();
      pseudoCount += pseudo.holds();
      edge(strong, md, "StrongM(d) => M(d)", k);
      edge(sd, md, "S(d) => M(d)", k);
      edge(fos.holds(), !sos.violated(), "FOSCMS(d) => SOSCMS(d)", k);
      edge(pseudo.holds(), !quasi.violated(), "pseudo(d) => quasi(d)", k);
      if (licqD.holds()) {
        ++strongChecks;
        edge(true, strong == sd, "under LICQ(d), StrongM(d) = S(d)", k);
      }
      ImplicationBundle b;
      b.stationarity = {{"M(d)", md}, {"S(d)", sd}, {"W(d)", wd}, {"StrongM(d)", strong}};
      b.cq = {{"LICQ(d)", licqD.verdict}, {"FOSCMS(d)", fos.verdict}, {"SOSCMS(d)", sos.verdict},
              {"quasi(d)", quasi.verdict}, {"pseudo(d)", pseudo.verdict}};
      for (const LatticeViolation& v : crossCheckImplications(b)) {
        ++violations;
        o.require(false, "cross-check " + v.toString() + " on instance " + std::to_string(k));
      }
    }
  }
  o.require(directions > 0 && strongChecks > 0, "directional coverage");
  if (o.pass)
    o.detail = std::to_string(kInstances) + " instances, " + std::to_string(directions) + " directions, " +
               std::to_string(strongChecks) + " LICQ(d) comparisons, " + std::to_string(violations) +
               " violations; premises held: S " + std::to_string(sCount) + ", M " + std::to_string(mCount) +
               ", QM " + std::to_string(qmCount) + ", LICQ " + std::to_string(licqCount) + ", MFCQ " +
               std::to_string(mfcqCount) + ", CPLD " + std::to_string(cpldCount) + ", StrongM(d) " +
               std::to_string(strongCount) + ", FOSCMS(d) " + std::to_string(fosCount) + ", pseudo(d) " +
               std::to_string(pseudoCount);
  return o;
}

Outcome qStationarity() {
  Outcome o;
  const MpscInstance inst = loadInstance(mpsc::testing::fixturePath("switching.mpsc"));
  const ActivePattern pat = originOf(inst);
  const auto bps = enumerateBipartitions(pat);
  o.require(bps.size() == 2, "two bipartitions");
  for (const Bipartition& bp : bps) {
    const StationarityVerdict q = checkQ(pat, bp);
    o.require(q.holds, "Q" + bp.toString() + " holds");
    if (q.holds) {
      o.require(stationarityResidual(pat.at, *q.multiplier) <= 1e-9, "lambda residual");
      // mu lies in the gradient null space.
      const double muRes = (multiplierMatrix(pat.at) * q.mu->stacked()).cwiseAbs().maxCoeff();
      o.require(muRes <= 1e-9, "mu residual");
    }
  }
  // bps[0] puts the biactive pair in the first group.
  const UpgradeReport u = checkQtoSUpgrade(pat, bps[0]);
  o.require(!u.holds, "upgrade fails");
  bool firstBranch = false;
  for (const UpgradeFailure& f : u.failures) firstBranch = firstBranch || f.condition == "first-branch";
  o.require(firstBranch, "failure on the first-group product condition");
  o.require(!checkS(pat).holds, "consistent with S failing");
  return o;
}

Outcome kernelOracle() {
  Outcome o;
  std::mt19937_64 rng(20260214);
  int agreeFeasible = 0, agreeKernel = 0;
  for (int t = 0; t < 100; ++t) {
    const mpsc::testing::RandomSystem s = mpsc::testing::randomSystem(rng);
    agreeFeasible += feasibleUnderPattern(s.A, s.b, s.pat).found() == mpsc::testing::oracleFeasible(s.A, s.b, s.pat);
    agreeKernel += nonzeroConeKernelIntersection(s.A, s.pat).found() == mpsc::testing::oracleNonzeroKernel(s.A, s.pat);
  }
  o.require(agreeFeasible == 100, "feasibility agreement");
  o.require(agreeKernel == 100, "kernel agreement");
  o.detail = "feasibility " + std::to_string(agreeFeasible) + "/100, kernel " + std::to_string(agreeKernel) + "/100";
  return o;
}

Outcome secondOrder() {
  Outcome o;
  const MpscInstance inst = loadInstance(mpsc::testing::fixturePath("switching.mpsc"));
  const ActivePattern pat = originOf(inst);
  const SecondOrderResult so = secondOrderNecessary(inst, computeDirectionalIndexSets(pat, vec({0, -1})));
  o.require(so.multiplierExists && !so.unbounded, "bounded second-order value");
  o.require(std::abs(so.value - 2) <= 1e-9, "value 2");
  o.require(so.witness && std::abs(so.witness->G(0) + 1) <= 1e-9, "witness lambda G = -1");
  const SoscReport r = secondOrderSufficient(inst, pat);
  o.require(r.verdict.holds && r.directionalRouteHolds, "SOSC via the directional route");
  o.detail = std::string("plain route ") + (r.plainRouteHolds ? "holds" : "fails") + ", directional route " +
             (r.directionalRouteHolds ? "holds" : "fails");
  return o;
}

Outcome determinism() {
  Outcome o;
  for (const char* fixture : {"switching.mpsc", "counterexample.mpsc"}) {
    std::string first;
    for (int threads : {1, 1, 1, 4}) {
      RunConfig cfg;
      cfg.command = "analyze";
      cfg.instancePath = mpsc::testing::fixturePath(fixture);
      cfg.output = "records";
      cfg.threads = threads;
      std::ostringstream out, err;
      o.require(runCommand(cfg, out, err) == 0, std::string("analyze ") + fixture);
      if (first.empty()) first = out.str();
      o.require(out.str() == first, std::string("identical records for ") + fixture + " with " +
                                        std::to_string(threads) + " threads");
    }
  }
  return o;
}

}  // namespace

int main() {
  criterion(1, "switching example: M not S, LICQ(d) and S(d) along (0,-1)", 1.0, switchingStationarity);
  criterion(2, "counterexample: TNLP-CPLD violated on samples, branches regular", 1.0, cpldCounterexample);
  criterion(3, "cone table against the sampling oracle", 10.0, coneTable);
  criterion(4, "error bound modulus and exact projection", 5.0, errorBound);
  criterion(5, "exact penalty at the switching example", 5.0, exactPenalty);
  criterion(6, "implication lattice on the random corpus", 120.0, latticeSuite);
  criterion(7, "Q-stationarity certificates and failed upgrade", 1.0, qStationarity);
  criterion(8, "kernel agreement with the basic-solution oracle", 0.0, kernelOracle);
  criterion(9, "second-order value and SOSC", 1.0, secondOrder);
  criterion(10, "records output determinism", 0.0, determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
