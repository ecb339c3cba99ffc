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

// Command-line front end and the full per-point analysis it reports.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mpsc/analysis.h"
#include "mpsc/bounds.h"
#include "mpsc/cq.h"
#include "mpsc/stationarity.h"

namespace mpsc {

struct AnalysisOptions {
  CqOptions cq;
  StationarityOptions stationarity;
  SoscOptions sosc;
  double tolDir = kDefaultDirTol;
  bool localMinimizer = false;
  bool secondOrder = true;
};

struct NamedCq {
  std::string key;
  CqReport report;
};

struct NamedVerdict {
  std::string key;
  StationarityVerdict verdict;
};

struct QEntry {
  StationarityVerdict verdict;
  UpgradeReport upgrade;
};

// Everything computed at a point without a direction.
struct PointAnalysis {
  ActivePattern pattern;
  std::vector<NamedVerdict> stationarity;
  std::vector<QEntry> q;
  double amResidual = 0.0;
  DescentResult descent;
  std::optional<SoscReport> sosc;
  std::vector<NamedCq> cqs;
  ImplicationBundle bundle;
};

struct DirectionAnalysis {
  DirectionalPattern pattern;
  bool usable = false;  // direction in the linearization cone
  std::vector<NamedVerdict> stationarity;
  std::optional<SecondOrderResult> sonc;
  std::vector<NamedCq> cqs;
  ImplicationBundle bundle;  // plain entries merged with the directional ones
  std::vector<LatticeViolation> violations;
};

PointAnalysis analyzePoint(const MpscInstance& inst, const Vector& z,
                           const AnalysisOptions& opts = {});
DirectionAnalysis analyzeDirection(const MpscInstance& inst,
                                   const PointAnalysis& plain, const Vector& d,
                                   const AnalysisOptions& opts = {});

// Comma-separated decimals; throws std::invalid_argument.
Vector parseVector(const std::string& text);

// "1,2;3" or "{1,2};{3}" with 1-based indices.
Bipartition parseBipartition(const std::string& text,
                             const std::vector<int>& biactive);

struct RunConfig {
  std::string command;
  std::string instancePath;
  std::vector<Vector> points;
  std::vector<Vector> directions;
  double tolAct = kDefaultActTol;
  double tolLin = kDefaultLinTol;
  double tolRank = kDefaultRankTol;
  std::optional<double> radius;
  std::optional<int> samples;
  uint64_t seed = 0;
  int bipartitionCap = kDefaultBipartitionCap;
  std::optional<std::string> bipartition;
  std::string kind;    // stationarity --kind
  std::string cqName;  // cq --name
  std::optional<double> delta;
  std::optional<double> weight;
  std::string output = "text";
  int threads = 1;
  bool assumeLocalMin = false;
};

// Text lines for people, KEY<TAB>VALUE records for machines.
class Report {
 public:
  void text(const std::string& line) { text_.push_back(line); }
  void record(const std::string& key, const std::string& value) {
    records_.emplace_back(key, value);
  }
  void write(std::ostream& out, bool records) const;

 private:
  std::vector<std::string> text_;
  std::vector<std::pair<std::string, std::string>> records_;
};

// 0 on completed analysis, 2 on lattice violations, 1 on errors.
int runCommand(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Parses arguments (program name first) and runs the command.
int runCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace mpsc
