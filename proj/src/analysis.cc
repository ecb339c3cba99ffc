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

#include "mpsc/analysis.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mpsc/errors.h"
#include "mpsc/format.h"

namespace mpsc {

namespace {

void fillRows(const std::vector<SmoothFunction>& fns, const Vector& z,
              Vector& values, Matrix& jac) {
  const int n = static_cast<int>(z.size());
  values.resize(fns.size());
  jac.resize(fns.size(), n);
  for (size_t i = 0; i < fns.size(); ++i) {
    values[i] = fns[i].value(z);
    jac.row(i) = fns[i].gradient(z).transpose();
  }
}

bool inBand(double v, double tol) {
  const double a = std::abs(v);
  return a > tol && a <= 2.0 * tol;
}

}  // namespace

PointData evaluatePoint(const MpscInstance& inst, const Vector& z) {
  if (z.size() != inst.n())
    throw std::invalid_argument("point has dimension " +
                                std::to_string(z.size()) + ", expected " +
                                std::to_string(inst.n()));
  PointData pd;
  pd.z = z;
  pd.f = inst.f().value(z);
  pd.gradF = inst.f().gradient(z);
  fillRows(inst.g(), z, pd.g, pd.Jg);
  fillRows(inst.h(), z, pd.h, pd.Jh);
  std::vector<SmoothFunction> Gs, Hs;
  for (const auto& sw : inst.switches()) {
    Gs.push_back(sw.G);
    Hs.push_back(sw.H);
  }
  fillRows(Gs, z, pd.G, pd.JG);
  fillRows(Hs, z, pd.H, pd.JH);
  return pd;
}

double feasibilityResidual(const PointData& pd) {
  double r = 0.0;
  for (int i = 0; i < pd.g.size(); ++i) r += std::max(pd.g[i], 0.0);
  for (int i = 0; i < pd.h.size(); ++i) r += std::abs(pd.h[i]);
  for (int i = 0; i < pd.G.size(); ++i)
    r += std::min(std::abs(pd.G[i]), std::abs(pd.H[i]));
  return r;
}

bool ActivePattern::feasible() const {
  if (!violatedSwitches.empty()) return false;
  for (int i = 0; i < at.g.size(); ++i)
    if (at.g[i] > tolAct) return false;
  for (int i = 0; i < at.h.size(); ++i)
    if (std::abs(at.h[i]) > tolAct) return false;
  return true;
}

ActivePattern computeIndexSets(const MpscInstance& inst, const Vector& z,
                               double tolAct) {
  if (!(tolAct > 0)) throw std::invalid_argument("activity tolerance must be positive");
  if (!z.allFinite()) throw std::invalid_argument("point is not finite");
  ActivePattern pat;
  pat.at = evaluatePoint(inst, z);
  pat.tolAct = tolAct;
  const PointData& pd = pat.at;
  for (int i = 0; i < pd.g.size(); ++i) {
    if (std::abs(pd.g[i]) <= tolAct) pat.Ig.push_back(i);
    pat.nearBoundary |= inBand(pd.g[i], tolAct);
  }
  for (int j = 0; j < pd.h.size(); ++j) pat.nearBoundary |= inBand(pd.h[j], tolAct);
  for (int i = 0; i < pd.G.size(); ++i) {
    const bool gz = std::abs(pd.G[i]) <= tolAct;
    const bool hz = std::abs(pd.H[i]) <= tolAct;
    if (gz && hz)
      pat.IGH.push_back(i);
    else if (gz)
      pat.IG.push_back(i);
    else if (hz)
      pat.IH.push_back(i);
    else
      pat.violatedSwitches.push_back(i);
    pat.nearBoundary |= inBand(pd.G[i], tolAct) || inBand(pd.H[i], tolAct);
  }
  pat.residual = feasibilityResidual(pd);
  return pat;
}

DirectionalPattern computeDirectionalIndexSets(const ActivePattern& pat,
                                               const Vector& d, double tolDir) {
  if (d.size() != pat.n()) throw std::invalid_argument("direction has wrong dimension");
  DirectionalPattern dp;
  dp.base = pat;
  dp.d = d;
  dp.tolDir = tolDir;
  const PointData& pd = pat.at;
  for (int i : pat.Ig) {
    const double s = pd.Jg.row(i).dot(d);
    if (std::abs(s) <= tolDir) dp.Igd.push_back(i);
    dp.nearBoundary |= inBand(s, tolDir);
  }
  for (int i : pat.IGH) {
    const double a = pd.JG.row(i).dot(d);
    const double b = pd.JH.row(i).dot(d);
    const bool az = std::abs(a) <= tolDir;
    const bool bz = std::abs(b) <= tolDir;
    if (az && bz)
      dp.IGHd.push_back(i);
    else if (az)
      dp.IGd.push_back(i);
    else if (bz)
      dp.IHd.push_back(i);
    dp.nearBoundary |= inBand(a, tolDir) || inBand(b, tolDir);
  }
  dp.inLinearizationCone = linearizationConeMember(pat, d, tolDir);
  return dp;
}

DirectionalPattern plainDirectional(const ActivePattern& pat) {
  return computeDirectionalIndexSets(pat, Vector::Zero(pat.n()));
}

bool linearizationConeMember(const ActivePattern& pat, const Vector& d,
                             double tol) {
  const PointData& pd = pat.at;
  for (int i : pat.Ig)
    if (pd.Jg.row(i).dot(d) > tol) return false;
  for (int j = 0; j < pd.h.size(); ++j)
    if (std::abs(pd.Jh.row(j).dot(d)) > tol) return false;
  for (int i : pat.IG)
    if (std::abs(pd.JG.row(i).dot(d)) > tol) return false;
  for (int i : pat.IH)
    if (std::abs(pd.JH.row(i).dot(d)) > tol) return false;
  for (int i : pat.IGH)
    if (std::abs(pd.JG.row(i).dot(d) * pd.JH.row(i).dot(d)) > tol * tol)
      return false;
  return true;
}

bool criticalConeMember(const ActivePattern& pat, const Vector& d, double tol) {
  return linearizationConeMember(pat, d, tol) && pat.at.gradF.dot(d) <= tol;
}

Bipartition::Bipartition(std::vector<int> b1, std::vector<int> b2,
                         const std::vector<int>& biactive)
    : beta1(std::move(b1)), beta2(std::move(b2)) {
  std::sort(beta1.begin(), beta1.end());
  std::sort(beta2.begin(), beta2.end());
  std::vector<int> all;
  std::merge(beta1.begin(), beta1.end(), beta2.begin(), beta2.end(),
             std::back_inserter(all));
  std::vector<int> ref = biactive;
  std::sort(ref.begin(), ref.end());
  if (all != ref)
    throw std::invalid_argument("bipartition " + toString() +
                                " does not partition the biactive set " +
                                formatIndexSet(ref));
}

std::string Bipartition::toString() const {
  return formatIndexSet(beta1) + ";" + formatIndexSet(beta2);
}

std::vector<Bipartition> enumerateBipartitions(const ActivePattern& pat,
                                               int cap) {
  const int k = static_cast<int>(pat.IGH.size());
  if (k > cap)
    throw CapExceeded("biactive set has " + std::to_string(k) +
                      " indices; bipartition cap is 2^" + std::to_string(cap));
  std::vector<Bipartition> out;
  out.reserve(size_t{1} << k);
  for (uint64_t c = 0; c < (uint64_t{1} << k); ++c) {
    std::vector<int> b1, b2;
    for (int j = 0; j < k; ++j)
      ((c >> j) & 1u ? b2 : b1).push_back(pat.IGH[j]);
    out.emplace_back(std::move(b1), std::move(b2), pat.IGH);
  }
  return out;
}

std::string Provenance::label() const {
  static const char* kNames[] = {"g", "h", "G", "H"};
  return kNames[static_cast<int>(kind)] + std::to_string(index + 1);
}

namespace {

NlpView baseView(const MpscInstance& inst, std::string name) {
  NlpView v;
  v.name = std::move(name);
  v.n = inst.n();
  for (int i = 0; i < inst.p(); ++i) {
    v.ineq.push_back(inst.g()[i]);
    v.ineqFrom.push_back({ConstraintKind::kG, i});
  }
  for (int j = 0; j < inst.q(); ++j) {
    v.eq.push_back(inst.h()[j]);
    v.eqFrom.push_back({ConstraintKind::kH, j});
  }
  return v;
}

void addSwitchEqualities(const MpscInstance& inst, NlpView& v,
                         const std::vector<bool>& useG,
                         const std::vector<bool>& useH) {
  for (int i = 0; i < inst.m(); ++i)
    if (useG[i]) {
      v.eq.push_back(inst.switches()[i].G);
      v.eqFrom.push_back({ConstraintKind::kSwitchG, i});
    }
  for (int i = 0; i < inst.m(); ++i)
    if (useH[i]) {
      v.eq.push_back(inst.switches()[i].H);
      v.eqFrom.push_back({ConstraintKind::kSwitchH, i});
    }
}

}  // namespace

NlpView buildTnlp(const MpscInstance& inst, const ActivePattern& pat) {
  NlpView v = baseView(inst, "TNLP");
  std::vector<bool> useG(inst.m(), false), useH(inst.m(), false);
  for (int i : pat.IG) useG[i] = true;
  for (int i : pat.IH) useH[i] = true;
  for (int i : pat.IGH) useG[i] = useH[i] = true;
  addSwitchEqualities(inst, v, useG, useH);
  return v;
}

NlpView buildBranchNlp(const MpscInstance& inst, const ActivePattern& pat,
                       const Bipartition& bp) {
  Bipartition check(bp.beta1, bp.beta2, pat.IGH);
  NlpView v = baseView(inst, "NLP(" + bp.toString() + ")");
  std::vector<bool> useG(inst.m(), false), useH(inst.m(), false);
  for (int i : pat.IG) useG[i] = true;
  for (int i : pat.IH) useH[i] = true;
  for (int i : bp.beta1) useG[i] = true;
  for (int i : bp.beta2) useH[i] = true;
  addSwitchEqualities(inst, v, useG, useH);
  return v;
}

}  // namespace mpsc
