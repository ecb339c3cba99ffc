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

#include <Eigen/Core>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpsc/expr.h"

namespace mpsc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline std::span<const double> asSpan(const Vector& v) {
  return {v.data(), static_cast<size_t>(v.size())};
}

struct FunctionValue {
  double value = 0.0;
  Vector gradient;
  std::optional<Matrix> hessian;
};

// A scalar function of n variables with its symbolic gradient. The Hessian
// table (lower triangle only) is built on first use and shared by copies.
class SmoothFunction {
 public:
  SmoothFunction(Expr value, int dimension);

  int dimension() const { return dimension_; }
  const Expr& expr() const { return value_; }
  const std::vector<Expr>& gradientExprs() const { return gradient_; }
  // d^2/(dz_row dz_col) for col <= row.
  const Expr& hessianExpr(int row, int col) const;

  // True when every Hessian entry folds to the constant 0.
  bool isAffine() const;

  double value(std::span<const double> z) const;
  Vector gradient(std::span<const double> z) const;
  Matrix hessian(std::span<const double> z) const;
  FunctionValue evaluate(std::span<const double> z, bool withHessian) const;

  double value(const Vector& z) const { return value(asSpan(z)); }
  Vector gradient(const Vector& z) const { return gradient(asSpan(z)); }
  Matrix hessian(const Vector& z) const { return hessian(asSpan(z)); }

 private:
  struct HessianTable {
    std::once_flag once;
    std::vector<Expr> lower;  // row-major packed lower triangle
  };
  const HessianTable& table() const;

  Expr value_;
  int dimension_;
  std::vector<Expr> gradient_;
  std::shared_ptr<HessianTable> hessian_;
};

struct SwitchPair {
  SmoothFunction G;
  SmoothFunction H;
};

// min f(z) s.t. g(z) <= 0, h(z) = 0, G_i(z) H_i(z) = 0.
class MpscInstance {
 public:
  MpscInstance(int n, Expr objective, std::vector<Expr> inequalities,
               std::vector<Expr> equalities,
               std::vector<std::pair<Expr, Expr>> switches,
               std::vector<std::string> names = {});

  int n() const { return n_; }
  int p() const { return static_cast<int>(g_.size()); }
  int q() const { return static_cast<int>(h_.size()); }
  int m() const { return static_cast<int>(switches_.size()); }

  const SmoothFunction& f() const { return f_; }
  const std::vector<SmoothFunction>& g() const { return g_; }
  const std::vector<SmoothFunction>& h() const { return h_; }
  const std::vector<SwitchPair>& switches() const { return switches_; }
  const std::vector<std::string>& names() const { return names_; }

  // Number of multiplier coordinates p + q + 2m, ordered (g, h, G, H).
  int multiplierDimension() const { return p() + q() + 2 * m(); }

  // Every constraint function (g, h, G, H) is affine.
  bool constraintsAffine() const;

 private:
  int n_;
  SmoothFunction f_;
  std::vector<SmoothFunction> g_;
  std::vector<SmoothFunction> h_;
  std::vector<SwitchPair> switches_;
  std::vector<std::string> names_;
};

}  // namespace mpsc
