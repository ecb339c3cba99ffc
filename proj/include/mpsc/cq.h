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

// Constraint qualifications. Pointwise conditions are decided exactly;
// conditions quantified over a neighborhood are checked on seeded samples and
// say so in their verdict.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpsc/analysis.h"
#include "mpsc/linkernel.h"

namespace mpsc {

enum class CqVerdict {
  kHolds,
  kViolated,
  kHoldsOnSamples,
  kViolatedOnSamples,
  kInconclusive,
};

// "HOLDS", "VIOLATED", "HOLDS-ON-SAMPLES", "VIOLATED-ON-SAMPLES",
// "INCONCLUSIVE".
const char* cqVerdictName(CqVerdict v);
inline bool verdictHolds(CqVerdict v) {
  return v == CqVerdict::kHolds || v == CqVerdict::kHoldsOnSamples;
}
inline bool verdictViolated(CqVerdict v) {
  return v == CqVerdict::kViolated || v == CqVerdict::kViolatedOnSamples;
}

struct SamplingParams {
  double radius = 1e-3;
  int samples = 200;
  uint64_t seed = 0;
};

struct SequenceParams {
  double t0 = 1e-1;
  double gamma = 0.5;
  int steps = 30;
  int perturbations = 32;
  double delta = 1e-3;
  int maxRaysPerFace = 64;
};

struct CqOptions {
  KernelOptions kernel;
  double tolAct = kDefaultActTol;
  SamplingParams sampling;
  SequenceParams sequence;
  int bipartitionCap = kDefaultBipartitionCap;
  uint64_t subsetCap = uint64_t{1} << 12;
  // Sample neighborhood conditions even when constant gradients decide them.
  bool forceSampling = false;
};

struct CqReport {
  std::string name;
  CqVerdict verdict = CqVerdict::kInconclusive;
  std::optional<Vector> direction;
  std::optional<Vector> multiplierWitness;  // stacked (g, h, G, H) or view order
  std::optional<Vector> pointWitness;
  std::string witnessDetail;
  bool sampled = false;
  SamplingParams sampling;
  std::string note;

  bool holds() const { return verdictHolds(verdict); }
  bool violated() const { return verdictViolated(verdict); }
};

// Linear independence of the directional gradient family. d = 0 gives the
// plain MPSC-LICQ.
CqReport checkLicq(const DirectionalPattern& dp, const CqOptions& opts = {});

// Positive-linear independence of the tightened problem's active gradients.
CqReport checkMfcq(const ActivePattern& pat, const CqOptions& opts = {});

// No nonzero multiplier with the directional M sign pattern annihilates the
// constraint gradients. At d = 0 this is MPSC-NNAMCQ.
CqReport checkFoscms(const DirectionalPattern& dp, const CqOptions& opts = {});

// As FOSCMS, restricted to multipliers with nonnegative constraint curvature
// along d.
CqReport checkSoscms(const MpscInstance& inst, const DirectionalPattern& dp,
                     const CqOptions& opts = {});

CqReport checkQuasiNormality(const MpscInstance& inst,
                             const DirectionalPattern& dp,
                             const CqOptions& opts = {});
CqReport checkPseudoNormality(const MpscInstance& inst,
                              const DirectionalPattern& dp,
                              const CqOptions& opts = {});

enum class NlpCq { kLicq, kMfcq, kCrcq, kRcrcq, kCpld, kRcpld, kCrsc };
const char* nlpCqName(NlpCq which);
std::optional<NlpCq> parseNlpCq(const std::string& name);

// A constraint qualification of a derived nonlinear program at zStar.
CqReport checkNlpCq(const NlpView& view, const Vector& zStar, NlpCq which,
                    const CqOptions& opts = {});

// Relaxed constant positive linear dependence tailored to the switching
// structure.
CqReport checkMpscRcpld(const MpscInstance& inst, const ActivePattern& pat,
                        const CqOptions& opts = {});

// `which` on every branch problem; holds only if every branch holds.
CqReport checkPiecewise(const MpscInstance& inst, const ActivePattern& pat,
                        NlpCq which, const CqOptions& opts = {});

// Verdicts gathered at one point, keyed by the names used in the lattice:
// CQs "LICQ", "MFCQ", "NNAMCQ", "CRCQ", "CPLD", "RCPLD", "quasi", "pseudo",
// "piecewise-CPLD", "LICQ(d)", "FOSCMS(d)", "SOSCMS(d)", "quasi(d)",
// "pseudo(d)"; stationarity "W", "M", "S", "QM", "W(d)", "M(d)", "S(d)",
// "StrongM(d)".
struct ImplicationBundle {
  std::map<std::string, CqVerdict> cq;
  std::map<std::string, bool> stationarity;
  bool localMinimizer = false;
};

struct LatticeViolation {
  std::string premise;
  std::string conclusion;
  bool sampledPremise = false;
  std::string toString() const;
};

// Encoded edges whose premise holds and whose conclusion is definitely false.
std::vector<LatticeViolation> crossCheckImplications(const ImplicationBundle& b);

}  // namespace mpsc
