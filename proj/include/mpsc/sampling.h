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

// Counter-based random streams. Every sample is drawn from a generator
// seeded by (seed, stream, index) alone, so results never depend on the
// order or the thread in which samples are produced.

#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "mpsc/model.h"

namespace mpsc {

// Stream identifiers keep unrelated sample families independent.
enum class Stream : uint64_t {
  kNeighborhood = 1,
  kDirections = 2,
  kErrorBound = 3,
  kPenalty = 4,
  kLipschitz = 5,
  kProjectionStarts = 6,
  kSequencePerturbation = 7,
  kCorpus = 8,
};

std::mt19937_64 streamRng(uint64_t seed, Stream stream, uint64_t index);

// Uniform in [-1, 1].
double symmetricUniform(std::mt19937_64& rng);

// Uniform on the Euclidean unit sphere in R^n (n >= 1).
Vector unitSphere(std::mt19937_64& rng, int n);

// Uniform in the closed Euclidean ball of the given radius around center.
Vector uniformBall(std::mt19937_64& rng, const Vector& center, double radius);

// Worker count used by parallelFor. 1 means run serially on the caller.
void setThreadCount(int threads);
int threadCount();

// Runs body(i) for i in [0, count). Bodies must write only to slots owned by
// their index; the result is then identical for every thread count.
void parallelFor(size_t count, const std::function<void(size_t)>& body);

}  // namespace mpsc
