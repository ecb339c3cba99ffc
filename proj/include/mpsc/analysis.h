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

// Index-set classification of a point and a direction, plus the tightened
// problem and the branch problems built from it. Indices are 0-based
// internally; reports print them 1-based.

#pragma once

#include <string>
#include <vector>

#include "mpsc/model.h"

namespace mpsc {

inline constexpr double kDefaultActTol = 1e-8;
inline constexpr double kDefaultDirTol = 1e-8;
inline constexpr int kDefaultBipartitionCap = 20;

// Values and gradients of every problem function at one point. Jacobian rows
// are gradients.
struct PointData {
  Vector z;
  double f = 0.0;
  Vector gradF;
  Vector g, h, G, H;
  Matrix Jg, Jh, JG, JH;
};

PointData evaluatePoint(const MpscInstance& inst, const Vector& z);

// sum max(g,0) + sum |h| + sum min(|G|,|H|).
double feasibilityResidual(const PointData& pd);

struct ActivePattern {
  PointData at;
  double tolAct = kDefaultActTol;
  std::vector<int> Ig, IG, IH, IGH;
  // Switching pairs with both |G| and |H| above tolerance.
  std::vector<int> violatedSwitches;
  double residual = 0.0;
  // Some classified value lies in (tol, 2 tol].
  bool nearBoundary = false;

  int n() const { return static_cast<int>(at.z.size()); }
  int p() const { return static_cast<int>(at.g.size()); }
  int q() const { return static_cast<int>(at.h.size()); }
  int m() const { return static_cast<int>(at.G.size()); }
  bool feasible() const;
};

ActivePattern computeIndexSets(const MpscInstance& inst, const Vector& z,
                               double tolAct = kDefaultActTol);

struct DirectionalPattern {
  ActivePattern base;
  Vector d;
  double tolDir = kDefaultDirTol;
  std::vector<int> Igd, IGd, IHd, IGHd;
  bool inLinearizationCone = false;
  bool nearBoundary = false;
};

DirectionalPattern computeDirectionalIndexSets(const ActivePattern& pat,
                                               const Vector& d,
                                               double tolDir = kDefaultDirTol);

// Directional pattern for d = 0 (reduces to the plain sets).
DirectionalPattern plainDirectional(const ActivePattern& pat);

bool linearizationConeMember(const ActivePattern& pat, const Vector& d,
                             double tol = kDefaultDirTol);
bool criticalConeMember(const ActivePattern& pat, const Vector& d,
                        double tol = kDefaultDirTol);

struct Bipartition {
  std::vector<int> beta1, beta2;

  Bipartition() = default;
  // Throws std::invalid_argument unless beta1, beta2 partition `biactive`.
  Bipartition(std::vector<int> b1, std::vector<int> b2,
              const std::vector<int>& biactive);
  bool operator==(const Bipartition&) const = default;
  std::string toString() const;  // "{1};{}"
};

// All 2^|IGH| bipartitions. Counter k puts the j-th biactive index into
// beta1 when bit j of k is clear, so ({1},{}) precedes ({},{1}).
std::vector<Bipartition> enumerateBipartitions(
    const ActivePattern& pat, int cap = kDefaultBipartitionCap);

enum class ConstraintKind { kG, kH, kSwitchG, kSwitchH };

struct Provenance {
  ConstraintKind kind;
  int index;
  std::string label() const;  // "g1", "h2", "G1", "H1"
};

// A standard nonlinear program  ineq <= 0, eq = 0  derived from the instance.
struct NlpView {
  std::string name;
  std::vector<SmoothFunction> ineq;
  std::vector<Provenance> ineqFrom;
  std::vector<SmoothFunction> eq;
  std::vector<Provenance> eqFrom;
  int n = 0;
};

NlpView buildTnlp(const MpscInstance& inst, const ActivePattern& pat);
NlpView buildBranchNlp(const MpscInstance& inst, const ActivePattern& pat,
                       const Bipartition& bp);

}  // namespace mpsc
