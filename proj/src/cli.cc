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

#include "mpsc/cli.h"

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mpsc/cones.h"
#include "mpsc/format.h"
#include "mpsc/parser.h"
#include "mpsc/sampling.h"

namespace mpsc {

// ---------------------------------------------------------------------------
// Analysis bundle

PointAnalysis analyzePoint(const MpscInstance& inst, const Vector& z,
                           const AnalysisOptions& opts) {
  PointAnalysis a;
  a.pattern = computeIndexSets(inst, z, opts.cq.tolAct);
  a.bundle.localMinimizer = opts.localMinimizer;
  a.amResidual = amResidual(inst, z, opts.cq.tolAct, opts.stationarity);
  if (!a.pattern.feasible()) return a;
  const ActivePattern& pat = a.pattern;
  const StationarityOptions& so = opts.stationarity;

  auto addSt = [&](const std::string& key, StationarityVerdict v) {
    a.bundle.stationarity[key] = v.holds;
    a.stationarity.push_back({key, std::move(v)});
  };
  addSt("W", checkW(pat, so));
  addSt("M", checkM(pat, so));
  addSt("S", checkS(pat, so));
  addSt("QM", checkQM(pat, so));
  for (const Bipartition& bp : enumerateBipartitions(pat, so.bipartitionCap))
    a.q.push_back({checkQ(pat, bp, so), checkQtoSUpgrade(pat, bp, so)});
  a.descent = linearizedDescent(pat, so);
  if (opts.secondOrder) a.sosc = secondOrderSufficient(inst, pat, opts.sosc, so);

  auto addCq = [&](const std::string& key, CqReport r) {
    a.bundle.cq[key] = r.verdict;
    a.cqs.push_back({key, std::move(r)});
  };
  const DirectionalPattern dp = plainDirectional(pat);
  const NlpView tnlp = buildTnlp(inst, pat);
  addCq("LICQ", checkLicq(dp, opts.cq));
  addCq("MFCQ", checkMfcq(pat, opts.cq));
  addCq("NNAMCQ", checkFoscms(dp, opts.cq));
  addCq("quasi", checkQuasiNormality(inst, dp, opts.cq));
  addCq("pseudo", checkPseudoNormality(inst, dp, opts.cq));
  addCq("CRCQ", checkNlpCq(tnlp, z, NlpCq::kCrcq, opts.cq));
  addCq("RCRCQ", checkNlpCq(tnlp, z, NlpCq::kRcrcq, opts.cq));
  addCq("CPLD", checkNlpCq(tnlp, z, NlpCq::kCpld, opts.cq));
  addCq("TNLP-RCPLD", checkNlpCq(tnlp, z, NlpCq::kRcpld, opts.cq));
  addCq("CRSC", checkNlpCq(tnlp, z, NlpCq::kCrsc, opts.cq));
  addCq("RCPLD", checkMpscRcpld(inst, pat, opts.cq));
  addCq("piecewise-MFCQ", checkPiecewise(inst, pat, NlpCq::kMfcq, opts.cq));
  addCq("piecewise-CRCQ", checkPiecewise(inst, pat, NlpCq::kCrcq, opts.cq));
  addCq("piecewise-CPLD", checkPiecewise(inst, pat, NlpCq::kCpld, opts.cq));
  addCq("piecewise-RCPLD", checkPiecewise(inst, pat, NlpCq::kRcpld, opts.cq));
  return a;
}

DirectionAnalysis analyzeDirection(const MpscInstance& inst,
                                   const PointAnalysis& plain, const Vector& d,
                                   const AnalysisOptions& opts) {
  DirectionAnalysis a;
  a.pattern = computeDirectionalIndexSets(plain.pattern, d, opts.tolDir);
  a.bundle = plain.bundle;
  a.usable = plain.pattern.feasible() && a.pattern.inLinearizationCone;
  if (a.usable) {
    const StationarityOptions& so = opts.stationarity;
    auto addSt = [&](const std::string& key, StationarityVerdict v) {
      a.bundle.stationarity[key] = v.holds;
      a.stationarity.push_back({key, std::move(v)});
    };
    addSt("W(d)", checkDirectional(a.pattern, StationarityKind::kW, so));
    addSt("M(d)", checkDirectional(a.pattern, StationarityKind::kM, so));
    addSt("S(d)", checkDirectional(a.pattern, StationarityKind::kS, so));
    addSt("StrongM(d)", checkStrongM(a.pattern, so));
    if (opts.secondOrder) a.sonc = secondOrderNecessary(inst, a.pattern, so);

    auto addCq = [&](const std::string& key, CqReport r) {
      a.bundle.cq[key] = r.verdict;
      a.cqs.push_back({key, std::move(r)});
    };
    addCq("LICQ(d)", checkLicq(a.pattern, opts.cq));
    addCq("FOSCMS(d)", checkFoscms(a.pattern, opts.cq));
    addCq("SOSCMS(d)", checkSoscms(inst, a.pattern, opts.cq));
    addCq("quasi(d)", checkQuasiNormality(inst, a.pattern, opts.cq));
    addCq("pseudo(d)", checkPseudoNormality(inst, a.pattern, opts.cq));
  }
  a.violations = crossCheckImplications(a.bundle);
  return a;
}

// ---------------------------------------------------------------------------
// Argument helpers

Vector parseVector(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t()"));
    item.erase(item.find_last_not_of(" \t()") + 1);
    double v = 0.0;
    if (!parseDouble(item, v)) throw std::invalid_argument("malformed number '" + item + "'");
    vals.push_back(v);
  }
  if (vals.empty()) throw std::invalid_argument("empty vector");
  return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Bipartition parseBipartition(const std::string& text,
                             const std::vector<int>& biactive) {
  const size_t semi = text.find(';');
  if (semi == std::string::npos)
    throw std::invalid_argument("bipartition must look like 'a;b'");
  auto side = [](std::string s) {
    std::vector<int> out;
    std::string cleaned;
    for (char c : s)
      if (c != '{' && c != '}' && !std::isspace(static_cast<unsigned char>(c))) cleaned += c;
    std::stringstream ss(cleaned);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      int v = 0;
      try {
        v = std::stoi(item);
      } catch (const std::exception&) {
        throw std::invalid_argument("malformed index '" + item + "'");
      }
      if (v < 1) throw std::invalid_argument("indices are 1-based");
      out.push_back(v - 1);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  return Bipartition(side(text.substr(0, semi)), side(text.substr(semi + 1)), biactive);
}

void Report::write(std::ostream& out, bool records) const {
  if (records) {
    for (const auto& [k, v] : records_) out << k << '\t' << v << '\n';
  } else {
    for (const auto& line : text_) out << line << '\n';
  }
}

// ---------------------------------------------------------------------------
// Report rendering

namespace {

std::string vecText(const Vector& v) { return "(" + formatVector(asSpan(v)) + ")"; }
std::string vecRec(const Vector& v) { return formatVector(asSpan(v)); }
std::string boolRec(bool b) { return b ? "true" : "false"; }

void emitVerdict(Report& rep, const std::string& prefix, const StationarityVerdict& v) {
  std::string line = v.label() + ": " + (v.holds ? "HOLDS" : "FAILS");
  if (v.holds && v.multiplier) line += ", λ = " + v.multiplier->toString();
  if (v.holds && v.mu) line += ", μ = " + v.mu->toString();
  if (v.workingSet && v.holds) line += ", working set " + v.workingSet->toString();
  if (!v.note.empty()) line += " [" + v.note + "]";
  rep.text(line);
  const std::string key = prefix + v.label();
  rep.record(key, v.holds ? "HOLDS" : "FAILS");
  if (v.multiplier) rep.record(key + ".multiplier", v.multiplier->toString());
  if (v.mu) rep.record(key + ".mu", v.mu->toString());
  if (v.holds) rep.record(key + ".residual", formatDouble(v.residual));
  if (v.workingSet) rep.record(key + ".workingSet", v.workingSet->toString());
  if (!v.note.empty()) rep.record(key + ".note", v.note);
}

void emitCq(Report& rep, const std::string& prefix, const CqReport& r) {
  std::string line = r.name + ": " + cqVerdictName(r.verdict);
  std::vector<std::string> extra;
  if (r.multiplierWitness) extra.push_back("λ = " + vecText(*r.multiplierWitness));
  if (r.pointWitness) extra.push_back("at " + vecText(*r.pointWitness));
  if (!r.witnessDetail.empty() && r.verdict != CqVerdict::kHolds) extra.push_back(r.witnessDetail);
  if (!r.note.empty()) extra.push_back(r.note);
  if (r.sampled)
    extra.push_back("radius " + formatDouble(r.sampling.radius) + ", " +
                    std::to_string(r.sampling.samples) + " samples, seed " +
                    std::to_string(r.sampling.seed));
  for (size_t k = 0; k < extra.size(); ++k) line += (k ? "; " : " (") + extra[k];
  if (!extra.empty()) line += ")";
  rep.text(line);
  const std::string key = prefix + r.name;
  rep.record(key, cqVerdictName(r.verdict));
  if (r.multiplierWitness) rep.record(key + ".multiplier", vecRec(*r.multiplierWitness));
  if (r.pointWitness) rep.record(key + ".point", vecRec(*r.pointWitness));
  if (!r.witnessDetail.empty()) rep.record(key + ".detail", r.witnessDetail);
  if (!r.note.empty()) rep.record(key + ".note", r.note);
  if (r.sampled) {
    rep.record(key + ".radius", formatDouble(r.sampling.radius));
    rep.record(key + ".samples", std::to_string(r.sampling.samples));
    rep.record(key + ".seed", std::to_string(r.sampling.seed));
  }
}

void emitPattern(Report& rep, const ActivePattern& pat) {
  rep.text("point " + vecText(pat.at.z));
  rep.text("Ig = " + formatIndexSet(pat.Ig) + ", IG = " + formatIndexSet(pat.IG) +
           ", IH = " + formatIndexSet(pat.IH) + ", IGH = " + formatIndexSet(pat.IGH));
  rep.text("feasibility residual " + formatDouble(pat.residual) +
           (pat.feasible() ? "" : " (infeasible)") +
           (pat.nearBoundary ? " (near tolerance boundary)" : ""));
  rep.record("point", vecRec(pat.at.z));
  rep.record("index.Ig", formatIndexSet(pat.Ig));
  rep.record("index.IG", formatIndexSet(pat.IG));
  rep.record("index.IH", formatIndexSet(pat.IH));
  rep.record("index.IGH", formatIndexSet(pat.IGH));
  rep.record("feasible", boolRec(pat.feasible()));
  rep.record("residual", formatDouble(pat.residual));
  rep.record("nearBoundary", boolRec(pat.nearBoundary));
}

void emitQ(Report& rep, const QEntry& q) {
  emitVerdict(rep, "stationarity.", q.verdict);
  const std::string key = "stationarity." + q.verdict.label() + ".upgrade";
  std::string line = "  upgrade to S: " + std::string(q.upgrade.holds ? "HOLDS" : "FAILS") +
                     " (null space dimension " + std::to_string(q.upgrade.nullspaceDimension) + ")";
  for (const UpgradeFailure& f : q.upgrade.failures)
    line += "; " + f.condition + " " + f.coordinates;
  rep.text(line);
  rep.record(key, q.upgrade.holds ? "HOLDS" : "FAILS");
  rep.record(key + ".nullspaceDimension", std::to_string(q.upgrade.nullspaceDimension));
  for (size_t k = 0; k < q.upgrade.failures.size(); ++k)
    rep.record(key + ".failure." + std::to_string(k),
               q.upgrade.failures[k].condition + " " + q.upgrade.failures[k].coordinates);
}

void emitDescent(Report& rep, const DescentResult& d) {
  rep.text(std::string("linearized descent: ") +
           (d.descentFound ? "FOUND d = " + vecText(d.d) + " on NLP(" + d.branch.toString() + ")"
                           : "NONE") +
           ", minimum " + formatDouble(d.minimum));
  rep.record("descent.found", boolRec(d.descentFound));
  rep.record("descent.minimum", formatDouble(d.minimum));
  if (d.descentFound) {
    rep.record("descent.direction", vecRec(d.d));
    rep.record("descent.branch", d.branch.toString());
  }
}

void emitSosc(Report& rep, const SoscReport& s) {
  rep.text(std::string("SOSC: ") + (s.verdict.holds ? "HOLDS" : "FAILS") +
           " (plain route " + (s.plainRouteHolds ? "holds" : "fails") +
           ", directional route " + (s.directionalRouteHolds ? "holds" : "fails") + ", " +
           std::to_string(s.directions.size()) + " critical directions, " +
           (s.exactEnumeration ? "exact enumeration" : "sampled") + ")");
  rep.record("stationarity.SOSC", s.verdict.holds ? "HOLDS" : "FAILS");
  rep.record("stationarity.SOSC.plainRoute", boolRec(s.plainRouteHolds));
  rep.record("stationarity.SOSC.directionalRoute", boolRec(s.directionalRouteHolds));
  rep.record("stationarity.SOSC.exact", boolRec(s.exactEnumeration));
  rep.record("stationarity.SOSC.directions", std::to_string(s.directions.size()));
  if (!s.verdict.note.empty()) rep.record("stationarity.SOSC.note", s.verdict.note);
}

void emitSonc(Report& rep, const std::string& prefix, const SecondOrderResult& r) {
  std::string line = "SONC(d): ";
  if (!r.multiplierExists) {
    line += "M(d) fails";
  } else if (r.unbounded) {
    line += "HOLDS (curvature unbounded above)";
  } else {
    line += std::string(r.holds ? "HOLDS" : "FAILS") + ", value " + formatDouble(r.value);
    if (r.witness) line += ", λ = " + r.witness->toString();
  }
  rep.text(line);
  rep.record(prefix + "SONC(d).multiplierExists", boolRec(r.multiplierExists));
  if (r.multiplierExists) {
    rep.record(prefix + "SONC(d)", r.holds ? "HOLDS" : "FAILS");
    rep.record(prefix + "SONC(d).value", r.unbounded ? "inf" : formatDouble(r.value));
    if (r.witness) rep.record(prefix + "SONC(d).multiplier", r.witness->toString());
  }
}

int emitViolations(Report& rep, const std::string& prefix,
                   const std::vector<LatticeViolation>& v) {
  if (v.empty()) rep.text("implication lattice: no violations");
  for (const LatticeViolation& x : v) rep.text("implication lattice VIOLATED: " + x.toString());
  rep.record(prefix + "lattice.violations", std::to_string(v.size()));
  for (size_t k = 0; k < v.size(); ++k)
    rep.record(prefix + "lattice.violation." + std::to_string(k), v[k].toString());
  return v.empty() ? 0 : 2;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

AnalysisOptions analysisOptions(const RunConfig& cfg) {
  AnalysisOptions o;
  KernelOptions ko;
  ko.rankTol = cfg.tolRank;
  ko.linTol = cfg.tolLin;
  o.cq.kernel = ko;
  o.cq.tolAct = cfg.tolAct;
  o.cq.sampling.radius = cfg.radius.value_or(1e-3);
  o.cq.sampling.samples = cfg.samples.value_or(200);
  o.cq.sampling.seed = cfg.seed;
  o.cq.bipartitionCap = cfg.bipartitionCap;
  o.stationarity.kernel = ko;
  o.stationarity.bipartitionCap = cfg.bipartitionCap;
  o.sosc.seed = cfg.seed;
  o.localMinimizer = cfg.assumeLocalMin;
  return o;
}

Vector firstPoint(const RunConfig& cfg, const MpscInstance& inst) {
  Vector z = cfg.points.empty() ? Vector::Zero(inst.n()) : cfg.points.front();
  if (z.size() != inst.n()) throw std::invalid_argument("point has wrong dimension");
  return z;
}

std::vector<Vector> directionsOf(const RunConfig& cfg, const MpscInstance& inst) {
  for (const Vector& d : cfg.directions)
    if (d.size() != inst.n()) throw std::invalid_argument("direction has wrong dimension");
  return cfg.directions;
}

// ---------------------------------------------------------------------------
// Commands

int cmdAnalyze(const RunConfig& cfg, const MpscInstance& inst, Report& rep) {
  const AnalysisOptions opts = analysisOptions(cfg);
  const Vector z = firstPoint(cfg, inst);
  const PointAnalysis a = analyzePoint(inst, z, opts);
  emitPattern(rep, a.pattern);
  rep.text("AM residual " + formatDouble(a.amResidual));
  rep.record("stationarity.AM.residual", formatDouble(a.amResidual));
  if (!a.pattern.feasible()) {
    rep.text("point is infeasible; stationarity and constraint qualifications skipped");
    return 0;
  }
  for (const NamedVerdict& v : a.stationarity) emitVerdict(rep, "stationarity.", v.verdict);
  for (const QEntry& q : a.q) emitQ(rep, q);
  emitDescent(rep, a.descent);
  if (a.sosc) emitSosc(rep, *a.sosc);
  for (const NamedCq& c : a.cqs) emitCq(rep, "cq.", c.report);

  std::vector<Vector> dirs = directionsOf(cfg, inst);
  int code = 0;
  if (dirs.empty()) {
    code = emitViolations(rep, "", crossCheckImplications(a.bundle));
  }
  for (size_t k = 0; k < dirs.size(); ++k) {
    const std::string prefix = "dir." + std::to_string(k) + ".";
    const DirectionAnalysis da = analyzeDirection(inst, a, dirs[k], opts);
    rep.text("direction d = " + vecText(dirs[k]));
    rep.record(prefix + "d", vecRec(dirs[k]));
    const DirectionalPattern& dp = da.pattern;
    rep.text("Ig(d) = " + formatIndexSet(dp.Igd) + ", IG(d) = " + formatIndexSet(dp.IGd) +
             ", IH(d) = " + formatIndexSet(dp.IHd) + ", IGH(d) = " + formatIndexSet(dp.IGHd));
    rep.record(prefix + "index.Ig(d)", formatIndexSet(dp.Igd));
    rep.record(prefix + "index.IG(d)", formatIndexSet(dp.IGd));
    rep.record(prefix + "index.IH(d)", formatIndexSet(dp.IHd));
    rep.record(prefix + "index.IGH(d)", formatIndexSet(dp.IGHd));
    rep.record(prefix + "linearizationCone", boolRec(dp.inLinearizationCone));
    rep.record(prefix + "criticalCone", boolRec(criticalConeMember(a.pattern, dirs[k], opts.tolDir)));
    if (!da.usable) rep.text("direction is not in the linearization cone; directional checks skipped");
    for (const NamedVerdict& v : da.stationarity)
      emitVerdict(rep, prefix + "stationarity.", v.verdict);
    if (da.sonc) emitSonc(rep, prefix + "stationarity.", *da.sonc);
    for (const NamedCq& c : da.cqs) emitCq(rep, prefix + "cq.", c.report);
    code = std::max(code, emitViolations(rep, prefix, da.violations));
  }
  return code;
}

int cmdStationarity(const RunConfig& cfg, const MpscInstance& inst, Report& rep) {
  const AnalysisOptions opts = analysisOptions(cfg);
  const StationarityOptions& so = opts.stationarity;
  const std::string kind = lower(cfg.kind);
  const Vector z = firstPoint(cfg, inst);
  const std::vector<Vector> dirs = directionsOf(cfg, inst);

  if (kind == "am") {
    if (cfg.points.size() <= 1) {
      const double r = amResidual(inst, z, cfg.tolAct, so);
      rep.text("AM residual " + formatDouble(r));
      rep.record("stationarity.AM.residual", formatDouble(r));
      return 0;
    }
    std::vector<Vector> seq(cfg.points.begin() + 1, cfg.points.end());
    const AmSequenceReport r = certifyAmSequence(inst, z, seq, 1e-6, cfg.tolAct, so);
    for (size_t k = 0; k < seq.size(); ++k) {
      rep.text("z" + std::to_string(k + 1) + " = " + vecText(seq[k]) + ": residual " +
               formatDouble(r.residuals[k]) + ", distance " + formatDouble(r.distances[k]));
      rep.record("stationarity.AM.sequence." + std::to_string(k) + ".residual",
                 formatDouble(r.residuals[k]));
      rep.record("stationarity.AM.sequence." + std::to_string(k) + ".distance",
                 formatDouble(r.distances[k]));
    }
    rep.text(std::string("AM: ") + (r.certified ? "CERTIFIED" : "NOT CERTIFIED"));
    rep.record("stationarity.AM", r.certified ? "CERTIFIED" : "NOT CERTIFIED");
    return 0;
  }

  const ActivePattern pat = computeIndexSets(inst, z, cfg.tolAct);
  emitPattern(rep, pat);
  if (!pat.feasible()) throw std::invalid_argument("point is not feasible");
  const Vector d = dirs.empty() ? Vector::Zero(inst.n()) : dirs.front();
  const DirectionalPattern dp = computeDirectionalIndexSets(pat, d, opts.tolDir);

  if (kind == "w" || kind == "m" || kind == "s") {
    const StationarityKind k = kind == "w" ? StationarityKind::kW
                               : kind == "m" ? StationarityKind::kM
                                             : StationarityKind::kS;
    StationarityVerdict v;
    if (dirs.empty())
      v = k == StationarityKind::kW ? checkW(pat, so)
          : k == StationarityKind::kM ? checkM(pat, so)
                                      : checkS(pat, so);
    else
      v = checkDirectional(dp, k, so);
    emitVerdict(rep, "stationarity.", v);
  } else if (kind == "q") {
    std::vector<Bipartition> bps;
    if (cfg.bipartition)
      bps.push_back(parseBipartition(*cfg.bipartition, pat.IGH));
    else
      bps = enumerateBipartitions(pat, so.bipartitionCap);
    for (const Bipartition& bp : bps)
      emitQ(rep, {checkQ(pat, bp, so), checkQtoSUpgrade(pat, bp, so)});
  } else if (kind == "qm") {
    emitVerdict(rep, "stationarity.", checkQM(pat, so));
  } else if (kind == "strongm") {
    emitVerdict(rep, "stationarity.", checkStrongM(dp, so));
  } else if (kind == "sonc") {
    emitSonc(rep, "stationarity.", secondOrderNecessary(inst, dp, so));
  } else if (kind == "sosc") {
    emitSosc(rep, secondOrderSufficient(inst, pat, opts.sosc, so));
  } else if (kind == "descent") {
    emitDescent(rep, linearizedDescent(pat, so));
  } else {
    throw std::invalid_argument("unknown stationarity kind '" + cfg.kind + "'");
  }
  return 0;
}

int cmdCq(const RunConfig& cfg, const MpscInstance& inst, Report& rep) {
  const AnalysisOptions opts = analysisOptions(cfg);
  const Vector z = firstPoint(cfg, inst);
  const ActivePattern pat = computeIndexSets(inst, z, cfg.tolAct);
  const std::vector<Vector> dirs = directionsOf(cfg, inst);
  const DirectionalPattern dp =
      dirs.empty() ? plainDirectional(pat)
                   : computeDirectionalIndexSets(pat, dirs.front(), opts.tolDir);
  std::string name = lower(cfg.cqName);
  for (const char* prefix : {"mpsc-", "tnlp-"})
    if (name.rfind(prefix, 0) == 0 && name != "mpsc-rcpld") name = name.substr(5);

  CqReport r;
  if (name == "licq") {
    r = checkLicq(dp, opts.cq);
  } else if (name == "mfcq") {
    r = checkMfcq(pat, opts.cq);
  } else if (name == "nnamcq" || name == "foscms") {
    r = checkFoscms(dp, opts.cq);
  } else if (name == "soscms") {
    r = checkSoscms(inst, dp, opts.cq);
  } else if (name == "quasi" || name == "quasi-normality") {
    r = checkQuasiNormality(inst, dp, opts.cq);
  } else if (name == "pseudo" || name == "pseudo-normality") {
    r = checkPseudoNormality(inst, dp, opts.cq);
  } else if (name == "mpsc-rcpld") {
    r = checkMpscRcpld(inst, pat, opts.cq);
  } else if (name.rfind("piecewise-", 0) == 0) {
    const auto which = parseNlpCq(name.substr(10));
    if (!which) throw std::invalid_argument("unknown constraint qualification '" + cfg.cqName + "'");
    r = checkPiecewise(inst, pat, *which, opts.cq);
  } else if (const auto which = parseNlpCq(name)) {
    if (!pat.feasible()) throw std::invalid_argument("point is not feasible");
    r = checkNlpCq(buildTnlp(inst, pat), z, *which, opts.cq);
  } else {
    throw std::invalid_argument("unknown constraint qualification '" + cfg.cqName + "'");
  }
  emitCq(rep, "cq.", r);
  return 0;
}

int cmdBranches(const RunConfig& cfg, const MpscInstance& inst, Report& rep) {
  const AnalysisOptions opts = analysisOptions(cfg);
  const Vector z = firstPoint(cfg, inst);
  const ActivePattern pat = computeIndexSets(inst, z, cfg.tolAct);
  emitPattern(rep, pat);
  if (!pat.feasible()) throw std::invalid_argument("point is not feasible");
  auto describe = [&](const NlpView& v, const std::string& prefix) {
    std::string ineq, eq;
    for (const Provenance& p : v.ineqFrom) ineq += (ineq.empty() ? "" : ",") + p.label();
    for (const Provenance& p : v.eqFrom) eq += (eq.empty() ? "" : ",") + p.label();
    rep.text(v.name + ": inequalities {" + ineq + "}, equalities {" + eq + "}");
    rep.record(prefix + ".ineq", "{" + ineq + "}");
    rep.record(prefix + ".eq", "{" + eq + "}");
  };
  const NlpView tnlp = buildTnlp(inst, pat);
  describe(tnlp, "TNLP");
  const std::vector<Bipartition> bps = enumerateBipartitions(pat, opts.cq.bipartitionCap);
  rep.record("branches", std::to_string(bps.size()));
  const NlpCq table[] = {NlpCq::kLicq, NlpCq::kMfcq, NlpCq::kCrcq, NlpCq::kCpld,
                         NlpCq::kRcpld, NlpCq::kCrsc};
  for (size_t k = 0; k < bps.size(); ++k) {
    const NlpView view = buildBranchNlp(inst, pat, bps[k]);
    const std::string prefix = "branch." + std::to_string(k);
    rep.record(prefix, view.name);
    describe(view, prefix);
    std::string row = " ";
    for (NlpCq w : table) {
      const CqReport r = checkNlpCq(view, z, w, opts.cq);
      row += std::string(" ") + nlpCqName(w) + "=" + cqVerdictName(r.verdict);
      rep.record(prefix + "." + nlpCqName(w), cqVerdictName(r.verdict));
    }
    rep.text(row);
  }
  for (NlpCq w : {NlpCq::kMfcq, NlpCq::kCrcq, NlpCq::kCpld})
    emitCq(rep, "cq.", checkPiecewise(inst, pat, w, opts.cq));
  return 0;
}

ErrorBoundEstimate runEstimate(const RunConfig& cfg, const MpscInstance& inst,
                               const ActivePattern& pat) {
  std::optional<DirectionalNeighborhood> dir;
  if (!cfg.directions.empty()) dir = DirectionalNeighborhood{cfg.directions.front(), cfg.delta.value_or(0.2)};
  DistanceOptions dopts;
  dopts.seed = cfg.seed;
  dopts.bipartitionCap = cfg.bipartitionCap;
  return estimateErrorBoundModulus(inst, pat, cfg.radius.value_or(0.1),
                                   cfg.samples.value_or(1000), cfg.seed, dir, dopts);
}

void emitEstimate(Report& rep, const ErrorBoundEstimate& e) {
  std::string line = "error bound modulus: ";
  line += e.inconclusive ? "INCONCLUSIVE" : "alpha = " + formatDouble(e.alphaHat);
  line += " (radius " + formatDouble(e.radius) + ", " + std::to_string(e.usedSamples) +
          " samples used, " + std::to_string(e.infeasibleSamples) + " infeasible, seed " +
          std::to_string(e.seed) + (e.exactDistances ? ", exact distances" : ", local distances") + ")";
  rep.text(line);
  rep.text(e.norms);
  if (e.direction)
    rep.text("directional neighborhood d = " + vecText(e.direction->d) + ", delta " +
             formatDouble(e.direction->delta));
  if (e.worstPoint.size())
    rep.text("worst ratio at " + vecText(e.worstPoint) + ": distance " +
             formatDouble(e.worstDistance) + ", residual " + formatDouble(e.worstResidual));
  rep.record("errorbound.inconclusive", boolRec(e.inconclusive));
  rep.record("errorbound.alpha", formatDouble(e.alphaHat));
  rep.record("errorbound.radius", formatDouble(e.radius));
  rep.record("errorbound.samples", std::to_string(e.samples));
  rep.record("errorbound.usedSamples", std::to_string(e.usedSamples));
  rep.record("errorbound.infeasibleSamples", std::to_string(e.infeasibleSamples));
  rep.record("errorbound.seed", std::to_string(e.seed));
  rep.record("errorbound.exactDistances", boolRec(e.exactDistances));
  if (e.direction) {
    rep.record("errorbound.direction", vecRec(e.direction->d));
    rep.record("errorbound.delta", formatDouble(e.direction->delta));
  }
  if (e.worstPoint.size()) {
    rep.record("errorbound.worst.point", vecRec(e.worstPoint));
    rep.record("errorbound.worst.distance", formatDouble(e.worstDistance));
    rep.record("errorbound.worst.residual", formatDouble(e.worstResidual));
  }
}

int cmdErrorBound(const RunConfig& cfg, const MpscInstance& inst, Report& rep) {
  const Vector z = firstPoint(cfg, inst);
  const ActivePattern pat = computeIndexSets(inst, z, cfg.tolAct);
  if (!pat.feasible()) throw std::invalid_argument("reference point is not feasible");
  emitEstimate(rep, runEstimate(cfg, inst, pat));
  return 0;
}

int cmdPenalty(const RunConfig& cfg, const MpscInstance& inst, Report& rep) {
  const Vector z = firstPoint(cfg, inst);
  const ActivePattern pat = computeIndexSets(inst, z, cfg.tolAct);
  if (!pat.feasible()) throw std::invalid_argument("reference point is not feasible");
  const ErrorBoundEstimate e = runEstimate(cfg, inst, pat);
  emitEstimate(rep, e);
  const double alpha = e.inconclusive || e.alphaHat <= 0 ? 1.0 : e.alphaHat;
  if (e.inconclusive) rep.text("modulus estimate inconclusive; using alpha = 1");
  const double radius = cfg.radius.value_or(0.1);
  PenaltyFunction pen = buildPenalty(inst, z, alpha, radius, 1000, cfg.seed);
  if (cfg.weight) pen = pen.withWeight(*cfg.weight);
  const PenaltyCheck chk =
      verifyPenaltyLocalMin(pen, z, radius, cfg.samples.value_or(1000), cfg.seed);
  rep.text("Lf = " + formatDouble(pen.lipschitz()) + ", weight = " + formatDouble(pen.weight()) +
           (pen.degenerate() ? " (degenerate)" : ""));
  rep.text(std::string("penalized local minimum: ") + (chk.holds ? "HOLDS" : "FAILS") +
           ", worst violation " + formatDouble(chk.worstViolation) +
           (chk.witness.size() ? " at " + vecText(chk.witness) : ""));
  rep.record("penalty.lf", formatDouble(pen.lipschitz()));
  rep.record("penalty.alpha", formatDouble(pen.alpha()));
  rep.record("penalty.weight", formatDouble(pen.weight()));
  rep.record("penalty.degenerate", boolRec(pen.degenerate()));
  rep.record("penalty.localMin", chk.holds ? "HOLDS" : "FAILS");
  rep.record("penalty.worstViolation", formatDouble(chk.worstViolation));
  if (chk.witness.size()) rep.record("penalty.witness", vecRec(chk.witness));
  return 0;
}

int cmdCones(const RunConfig& cfg, const MpscInstance& inst, Report& rep) {
  const Vector z = firstPoint(cfg, inst);
  const std::vector<Vector> dirs = directionsOf(cfg, inst);
  const PointData pd = evaluatePoint(inst, z);
  const double tol = cfg.tolAct;
  for (int i = 0; i < inst.m(); ++i) {
    const Pair a{pd.G[i], pd.H[i]};
    const std::string key = "cones.switch" + std::to_string(i + 1);
    const FactorCone t = tangentSwitch(a, tol);
    const FactorCone rn = regularNormalSwitch(a, tol);
    const FactorCone ln = limitingNormalSwitch(a, tol);
    std::string line = "switch " + std::to_string(i + 1) + " at (" + formatDouble(a.first) +
                       "," + formatDouble(a.second) + "): tangent " + t.name() +
                       ", regular normal " + rn.name() + ", limiting normal " + ln.name();
    rep.record(key + ".tangent", t.name());
    rep.record(key + ".regularNormal", rn.name());
    rep.record(key + ".limitingNormal", ln.name());
    if (!dirs.empty()) {
      const Pair d{pd.JG.row(i).dot(dirs.front()), pd.JH.row(i).dot(dirs.front())};
      const FactorCone dn = directionalNormalSwitch(a, d, tol, kDefaultDirTol);
      line += ", directional normal " + dn.name();
      rep.record(key + ".directionalNormal", dn.name());
      try {
        const FactorCone rt = regularNormalOfTangentSwitch(a, d, tol, kDefaultDirTol);
        line += ", regular normal of tangent " + rt.name();
        rep.record(key + ".regularNormalOfTangent", rt.name());
      } catch (const NotInTangent&) {
        line += ", direction not tangent";
        rep.record(key + ".regularNormalOfTangent", "not tangent");
      }
    }
    rep.text(line);
  }
  const ActivePattern pat = computeIndexSets(inst, z, tol);
  if (pat.feasible()) {
    const ProductCone tan = productTangent(pat);
    rep.text("product tangent " + tan.toString());
    rep.record("cones.productTangent", tan.toString());
    if (!dirs.empty()) {
      const ProductCone dn = productDirectionalNormal(computeDirectionalIndexSets(pat, dirs.front()));
      rep.text("product directional normal " + dn.toString());
      rep.record("cones.productDirectionalNormal", dn.toString());
    }
  }
  return 0;
}

}  // namespace

int runCommand(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.tolAct <= 0 || cfg.tolLin <= 0 || cfg.tolRank <= 0)
      throw std::invalid_argument("tolerances must be positive");
    if (cfg.output != "text" && cfg.output != "records")
      throw std::invalid_argument("output must be text or records");
    setThreadCount(cfg.threads);
    const MpscInstance inst = loadInstance(cfg.instancePath);
    Report rep;
    int code = 0;
    if (cfg.command == "analyze") code = cmdAnalyze(cfg, inst, rep);
    else if (cfg.command == "stationarity") code = cmdStationarity(cfg, inst, rep);
    else if (cfg.command == "cq") code = cmdCq(cfg, inst, rep);
    else if (cfg.command == "branches") code = cmdBranches(cfg, inst, rep);
    else if (cfg.command == "errorbound") code = cmdErrorBound(cfg, inst, rep);
    else if (cfg.command == "penalty") code = cmdPenalty(cfg, inst, rep);
    else if (cfg.command == "cones") code = cmdCones(cfg, inst, rep);
    else throw std::invalid_argument("unknown command '" + cfg.command + "'");
    rep.write(out, cfg.output == "records");
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stationarity, constraint qualifications and error bounds for programs "
               "with switching constraints",
               "mpsc-check"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::vector<std::string> pointText, dirText, atText;
  double radius = 0.0, delta = 0.0, weight = 0.0;
  int samples = 0;
  std::string bip;
  std::vector<CLI::Option*> radiusOpts, samplesOpts, bipOpts, deltaOpts, weightOpts;

  auto common = [&](CLI::App* sc) {
    sc->add_option("instance", cfg.instancePath, "Instance file")->required();
    sc->add_option("--point", pointText, "Point as comma-separated decimals (repeatable)");
    sc->add_option("--dir", dirText, "Direction as comma-separated decimals");
    sc->add_option("--tol-act", cfg.tolAct, "Activity tolerance");
    sc->add_option("--tol-lin", cfg.tolLin, "Linear-system tolerance");
    sc->add_option("--tol-rank", cfg.tolRank, "Relative rank tolerance");
    radiusOpts.push_back(sc->add_option("--radius", radius, "Sampling radius"));
    samplesOpts.push_back(sc->add_option("--samples", samples, "Sample count"));
    sc->add_option("--seed", cfg.seed, "Random seed");
    bipOpts.push_back(sc->add_option("--bipartition", bip, "Bipartition 'a;b' (1-based)"));
    sc->add_option("--bipartition-cap", cfg.bipartitionCap, "Largest biactive set enumerated");
    sc->add_option("--output", cfg.output, "text or records")
        ->check(CLI::IsMember({"text", "records"}));
    sc->add_option("--threads", cfg.threads, "Worker threads for sampling loops");
    sc->add_flag("--assume-local-min", cfg.assumeLocalMin,
                 "Also check implications that need a local minimizer");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "Index sets, all verdicts and the implication lattice");
  common(analyze);
  CLI::App* stat = app.add_subcommand("stationarity", "One stationarity concept");
  common(stat);
  stat->add_option("--kind", cfg.kind, "W, M, S, Q, QM, strongM, AM, SONC, SOSC or descent")
      ->required();
  CLI::App* cq = app.add_subcommand("cq", "One constraint qualification");
  common(cq);
  cq->add_option("--name", cfg.cqName, "licq, mfcq, nnamcq, foscms, soscms, quasi, pseudo, "
                 "crcq, rcrcq, cpld, rcpld, crsc, mpsc-rcpld or piecewise-<nlp cq>")
      ->required();
  CLI::App* branches = app.add_subcommand("branches", "Bipartitions, TNLP and per-branch CQs");
  common(branches);
  CLI::App* eb = app.add_subcommand("errorbound", "Sampled error-bound modulus");
  common(eb);
  deltaOpts.push_back(eb->add_option("--delta", delta, "Directional neighborhood width"));
  CLI::App* pen = app.add_subcommand("penalty", "Exact penalty weight and local-minimum check");
  common(pen);
  deltaOpts.push_back(pen->add_option("--delta", delta, "Directional neighborhood width"));
  weightOpts.push_back(pen->add_option("--weight", weight, "Override the penalty weight"));
  CLI::App* cones = app.add_subcommand("cones", "Switching-cone tags at a point");
  common(cones);
  cones->add_option("--at", atText, "Point (same as --point)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  auto given = [](const std::vector<CLI::Option*>& opts) {
    for (CLI::Option* o : opts)
      if (o->count()) return true;
    return false;
  };
  try {
    cfg.command = app.get_subcommands().front()->get_name();
    for (const auto& t : pointText) cfg.points.push_back(parseVector(t));
    for (const auto& t : atText) cfg.points.push_back(parseVector(t));
    for (const auto& t : dirText) cfg.directions.push_back(parseVector(t));
    if (given(radiusOpts)) cfg.radius = radius;
    if (given(samplesOpts)) cfg.samples = samples;
    if (given(bipOpts)) cfg.bipartition = bip;
    if (given(deltaOpts)) cfg.delta = delta;
    if (given(weightOpts)) cfg.weight = weight;
    if (cfg.radius && !(*cfg.radius > 0)) throw std::invalid_argument("radius must be positive");
    if (cfg.samples && *cfg.samples < 1) throw std::invalid_argument("samples must be positive");
    if (cfg.threads < 1) throw std::invalid_argument("threads must be positive");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return runCommand(cfg, out, err);
}

}  // namespace mpsc
