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

// Instance files:
//
//   vars: z1 z2
//   objective: z1 + z2^2
//   ineq: -z1 + z2          # expr <= 0
//   eq: ...                 # expr = 0
//   switch: z1 , z2         # G * H = 0
//
// Expressions use + - * / ^ (integer exponents), parentheses, sin cos exp
// log sqrt, decimal literals and the declared variable names.

#pragma once

#include <stdexcept>
#include <string>

#include "mpsc/model.h"

namespace mpsc {

// Line and column are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class SyntaxError : public ParseError {
 public:
  using ParseError::ParseError;
};

class UnknownVariable : public ParseError {
 public:
  using ParseError::ParseError;
};

// Wrong number of expressions for a section or arguments for a function.
class ArityError : public ParseError {
 public:
  using ParseError::ParseError;
};

MpscInstance parseInstance(const std::string& text);

// Reads and parses a file; an unreadable file is a std::runtime_error.
MpscInstance loadInstance(const std::string& path);

}  // namespace mpsc
