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

#pragma once

#include <stdexcept>
#include <string>

namespace mpsc {

// A combinatorial enumeration (bipartitions, complementarity cases, working
// sets, subsets) would exceed its configured cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point passed to the switching-cone calculus is not in the switching set.
class NotInSet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A direction passed where a tangent direction is required is not tangent.
class NotInTangent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mpsc
