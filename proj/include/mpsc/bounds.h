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

// Error-bound residual, distance to the feasible set, sampled estimation of
// the error-bound modulus, and the exact l1 penalty built from it.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpsc/analysis.h"
#include "mpsc/errors.h"
#include "mpsc/expr.h"

namespace mpsc {

// Constraint residual split by constraint type. beta1 holds the switching
// indices whose |G| attains min{|G|, |H|} (ties included); beta2 the rest.
struct ResidualBreakdown {
  double gPart = 0.0;
  double hPart = 0.0;
  double switchPart = 0.0;
  double total = 0.0;
  std::vector<int> beta1, beta2;
};

// Throws DomainError for non-finite points or values.
ResidualBreakdown residual(const MpscInstance& inst, const Vector& z);

// The selected split restricted to the biactive indices of a reference point.
Bipartition selectBipartition(const ResidualBreakdown& r,
                              const std::vector<int>& biactive);

struct DistanceOptions {
  int starts = 8;
  int penaltyRounds = 5;
  double penaltyFactor = 10.0;
  uint64_t seed = 0;
  int bipartitionCap = kDefaultBipartitionCap;
  uint64_t activeSetCap = uint64_t{1} << 16;
  double feasTol = 1e-10;
};

struct BranchDistance {
  Bipartition branch;
  double value = 0.0;  // +inf when no feasible point was found
  Vector nearest;
  bool exact = false;
};

struct DistanceResult {
  double value = 0.0;
  Vector nearest;
  Bipartition branch;
  // False when some branch was solved by a local method; value is then an
  // upper bound.
  bool exact = true;
  std::vector<BranchDistance> branches;
};

// Euclidean distance from z to the union of the branch feasible sets of the
// reference pattern.
DistanceResult distanceToFeasible(const MpscInstance& inst,
                                  const ActivePattern& reference,
                                  const Vector& z,
                                  const DistanceOptions& opts = {});

struct DirectionalNeighborhood {
  Vector d;
  double delta = 0.2;
};

// || ||d|| u - ||u|| d || <= delta ||u|| ||d||.
bool inDirectionalNeighborhood(const Vector& u, const DirectionalNeighborhood& v);

struct ErrorBoundEstimate {
  Vector center;
  double radius = 0.0;
  int samples = 0;
  uint64_t seed = 0;
  std::optional<DirectionalNeighborhood> direction;
  int usedSamples = 0;
  int infeasibleSamples = 0;
  bool inconclusive = true;
  bool exactDistances = true;
  double alphaHat = 0.0;
  Vector worstPoint;
  double worstDistance = 0.0;
  double worstResidual = 0.0;
  std::string norms = "distance: Euclidean; residual: sum of scalar violations";
};

// Largest dist/residual over the given points; infeasible points only.
ErrorBoundEstimate estimateErrorBoundOnPoints(const MpscInstance& inst,
                                              const ActivePattern& reference,
                                              const std::vector<Vector>& points,
                                              const DistanceOptions& opts = {});

// Samples are drawn uniformly in the ball; with a direction, only the draws
// inside the directional neighborhood are kept.
ErrorBoundEstimate estimateErrorBoundModulus(
    const MpscInstance& inst, const ActivePattern& reference, double radius,
    int samples, uint64_t seed,
    const std::optional<DirectionalNeighborhood>& direction = std::nullopt,
    const DistanceOptions& opts = {});

// f(z) + weight * residual(z).total. Evaluation only.
class PenaltyFunction {
 public:
  PenaltyFunction(const MpscInstance& inst, double lf, double alpha);

  double operator()(const Vector& z) const;
  double lipschitz() const { return lf_; }
  double alpha() const { return alpha_; }
  double weight() const { return weight_; }
  bool degenerate() const { return weight_ <= 0.0; }
  PenaltyFunction withWeight(double w) const;

 private:
  const MpscInstance* inst_;
  double lf_;
  double alpha_;
  double weight_;
};

// Lipschitz estimate: 1.1 times the largest gradient norm of f over samples
// in the ball.
PenaltyFunction buildPenalty(const MpscInstance& inst, const Vector& zStar,
                             double alphaHat, double radius,
                             int lipschitzSamples = 1000, uint64_t seed = 0);

struct PenaltyCheck {
  bool holds = true;
  double worstViolation = 0.0;  // max of penalty(z*) - penalty(z)
  Vector witness;
};

PenaltyCheck verifyPenaltyLocalMin(const PenaltyFunction& pen,
                                   const Vector& zStar, double radius,
                                   int samples, uint64_t seed,
                                   double tol = 1e-9);

}  // namespace mpsc
