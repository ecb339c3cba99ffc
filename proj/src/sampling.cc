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

#include "mpsc/sampling.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mpsc {

std::mt19937_64 streamRng(uint64_t seed, Stream stream, uint64_t index) {
  const uint64_t s = static_cast<uint64_t>(stream);
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(s), static_cast<uint32_t>(index),
                    static_cast<uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

double symmetricUniform(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
}

Vector unitSphere(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (;;) {
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
    const double norm = v.norm();
    if (norm > 1e-12) return v / norm;
  }
}

Vector uniformBall(std::mt19937_64& rng, const Vector& center, double radius) {
  const int n = static_cast<int>(center.size());
  if (n == 0) return center;
  const Vector dir = unitSphere(rng, n);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return center + radius * std::pow(u, 1.0 / n) * dir;
}

namespace {
std::atomic<int> gThreads{1};
}  // namespace

void setThreadCount(int threads) { gThreads = std::max(1, threads); }

int threadCount() { return gThreads.load(); }

void parallelFor(size_t count, const std::function<void(size_t)>& body) {
  const size_t workers = std::min<size_t>(threadCount(), count);
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failureMutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failureMutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace mpsc
