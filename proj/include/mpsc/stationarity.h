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

// Stationarity checks at a feasible point, each returning a verdict with a
// re-verified multiplier certificate.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpsc/analysis.h"
#include "mpsc/linkernel.h"

namespace mpsc {

// Multipliers in (g, h, G, H) blocks.
struct MultiplierVector {
  Vector g, h, G, H;

  static MultiplierVector fromStacked(const Vector& x, int p, int q, int m);
  Vector stacked() const;
  // "(0; ; -1; 0)": blocks separated by "; ", entries by ",".
  std::string toString() const;
};

// Gradient matrix [Jg' Jh' JG' JH'] (n x (p+q+2m)).
Matrix multiplierMatrix(const PointData& pd);

// ||grad f + sum lambda * grad(constraint)||_inf.
double stationarityResidual(const PointData& pd, const MultiplierVector& lam);

enum class StationarityKind {
  kW, kM, kS, kWd, kMd, kSd, kQ, kQM, kStrongM, kAmResidual, kLinDescent,
  kSonc, kSosc,
};

const char* stationarityKindName(StationarityKind kind);

struct WorkingSet {
  std::vector<int> Jg, JG, JH;
  std::string toString() const;
};

struct StationarityVerdict {
  StationarityKind kind = StationarityKind::kW;
  bool holds = false;
  std::optional<MultiplierVector> multiplier;
  std::optional<MultiplierVector> mu;  // Q-stationarity partner
  std::optional<Vector> direction;
  std::optional<Bipartition> bipartition;
  std::optional<WorkingSet> workingSet;
  double residual = 0.0;  // certificate residual, or the computed value
  std::string note;

  std::string label() const;
};

struct StationarityOptions {
  KernelOptions kernel;
  int bipartitionCap = kDefaultBipartitionCap;
  uint64_t workingSetCap = uint64_t{1} << 16;
};

// Sign pattern of the W/M/S system in the direction of dp (d = 0 gives the
// plain systems). kind must be kW, kM or kS.
SignPattern stationarityPattern(const DirectionalPattern& dp,
                                StationarityKind kind);

StationarityVerdict checkW(const ActivePattern& pat,
                           const StationarityOptions& opts = {});
StationarityVerdict checkM(const ActivePattern& pat,
                           const StationarityOptions& opts = {});
StationarityVerdict checkS(const ActivePattern& pat,
                           const StationarityOptions& opts = {});

// kind in {kW, kM, kS}; reported as W(d)/M(d)/S(d).
StationarityVerdict checkDirectional(const DirectionalPattern& dp,
                                     StationarityKind kind,
                                     const StationarityOptions& opts = {});

StationarityVerdict checkQ(const ActivePattern& pat, const Bipartition& bp,
                           const StationarityOptions& opts = {});

// Q-stationary with respect to some bipartition; the Q multiplier is then an
// M-multiplier.
StationarityVerdict checkQM(const ActivePattern& pat,
                            const StationarityOptions& opts = {});

struct UpgradeFailure {
  std::string condition;  // "cross-branch", "first-branch", "second-branch"
  int i = 0;
  int iPrime = 0;
  std::string coordinates;  // e.g. "muG1*muH1"
};

struct UpgradeReport {
  bool holds = true;
  int nullspaceDimension = 0;
  std::vector<UpgradeFailure> failures;
};

// Does every mu in the null space of the multiplier system satisfy the
// products required to lift a Q-multiplier to an S-multiplier?
UpgradeReport checkQtoSUpgrade(const ActivePattern& pat, const Bipartition& bp,
                               const StationarityOptions& opts = {});

// Rank of the directional LICQ gradient family.
int directionalFamilyRank(const DirectionalPattern& dp, double rankTol);

std::vector<WorkingSet> enumerateWorkingSets(const DirectionalPattern& dp,
                                             const StationarityOptions& opts = {});

StationarityVerdict checkStrongM(const DirectionalPattern& dp,
                                 const StationarityOptions& opts = {});

// Smallest ||grad f(z) + sum lambda grad(.)(z)||_inf over multipliers with
// the sign pattern of z itself.
double amResidual(const MpscInstance& inst, const Vector& z,
                  double tolAct = kDefaultActTol,
                  const StationarityOptions& opts = {});

struct AmSequenceReport {
  std::vector<double> residuals;
  std::vector<double> distances;
  bool certified = false;
};

// Residuals and distances to zStar along a finite sequence; certified when
// both are nonincreasing and end below the given thresholds.
AmSequenceReport certifyAmSequence(const MpscInstance& inst,
                                   const Vector& zStar,
                                   const std::vector<Vector>& points,
                                   double finalTol = 1e-6,
                                   double tolAct = kDefaultActTol,
                                   const StationarityOptions& opts = {});

struct DescentResult {
  bool descentFound = false;
  double minimum = 0.0;
  Vector d;
  Bipartition branch;
};

// Minimizes grad f . d over each branch of the linearization cone intersected
// with the unit box.
DescentResult linearizedDescent(const ActivePattern& pat,
                                const StationarityOptions& opts = {});

// d' Hess f d and d' Hess P_k d for each multiplier coordinate k.
struct Curvature {
  double objective = 0.0;
  Vector constraints;
};
Curvature curvatureAlong(const MpscInstance& inst, const Vector& z,
                         const Vector& d);

struct SecondOrderResult {
  bool multiplierExists = false;
  bool unbounded = false;
  double value = 0.0;  // sup of d' Hess L d
  std::optional<MultiplierVector> witness;
  bool holds = false;  // value >= -tolLin
};

SecondOrderResult secondOrderNecessary(const MpscInstance& inst,
                                       const DirectionalPattern& dp,
                                       const StationarityOptions& opts = {});

struct SoscOptions {
  int samples = 256;
  uint64_t seed = 0;
  double sigma = 1e-8;
  int combinationsPerPiece = 32;
};

struct SoscDirection {
  Vector d;
  bool plainMultiplier = false;  // S-multiplier exists
  double plainValue = 0.0;
  bool directionalMultiplier = false;  // S(d)-multiplier exists
  double directionalValue = 0.0;
  std::optional<MultiplierVector> directionalWitness;
};

struct SoscReport {
  StationarityVerdict verdict;  // holds follows the directional route
  bool plainRouteHolds = false;
  bool directionalRouteHolds = false;
  bool exactEnumeration = false;
  std::vector<SoscDirection> directions;
};

SoscReport secondOrderSufficient(const MpscInstance& inst,
                                 const ActivePattern& pat,
                                 const SoscOptions& sosc = {},
                                 const StationarityOptions& opts = {});

// Directions generating each polyhedral piece of the critical cone: exact
// generators for small affine instances, projected samples otherwise.
std::vector<Vector> criticalDirections(const MpscInstance& inst,
                                       const ActivePattern& pat,
                                       const SoscOptions& sosc,
                                       bool* exact);

}  // namespace mpsc
