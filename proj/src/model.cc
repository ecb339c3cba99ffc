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

#include "mpsc/model.h"

#include <stdexcept>

namespace mpsc {

SmoothFunction::SmoothFunction(Expr value, int dimension)
    : value_(std::move(value)),
      dimension_(dimension),
      hessian_(std::make_shared<HessianTable>()) {
  if (dimension < 0) throw std::invalid_argument("negative dimension");
  if (value_.maxVarIndex() >= dimension)
    throw std::invalid_argument("expression references z" +
                                std::to_string(value_.maxVarIndex() + 1) +
                                " beyond dimension " +
                                std::to_string(dimension));
  gradient_.reserve(dimension);
  for (int k = 0; k < dimension; ++k)
    gradient_.push_back(differentiate(value_, k));
}

const SmoothFunction::HessianTable& SmoothFunction::table() const {
  std::call_once(hessian_->once, [this] {
    auto& lower = hessian_->lower;
    lower.reserve(static_cast<size_t>(dimension_) * (dimension_ + 1) / 2);
    for (int r = 0; r < dimension_; ++r)
      for (int c = 0; c <= r; ++c)
        lower.push_back(differentiate(gradient_[r], c));
  });
  return *hessian_;
}

const Expr& SmoothFunction::hessianExpr(int row, int col) const {
  if (col > row) std::swap(row, col);
  return table().lower[static_cast<size_t>(row) * (row + 1) / 2 + col];
}

bool SmoothFunction::isAffine() const {
  for (const Expr& e : table().lower)
    if (!e.isZero()) return false;
  return true;
}

double SmoothFunction::value(std::span<const double> z) const {
  return value_.evaluate(z);
}

Vector SmoothFunction::gradient(std::span<const double> z) const {
  Vector out(dimension_);
  for (int k = 0; k < dimension_; ++k) out[k] = gradient_[k].evaluate(z);
  return out;
}

Matrix SmoothFunction::hessian(std::span<const double> z) const {
  Matrix out(dimension_, dimension_);
  const auto& lower = table().lower;
  size_t idx = 0;
  for (int r = 0; r < dimension_; ++r)
    for (int c = 0; c <= r; ++c) {
      const double v = lower[idx++].evaluate(z);
      out(r, c) = v;
      out(c, r) = v;
    }
  return out;
}

FunctionValue SmoothFunction::evaluate(std::span<const double> z,
                                       bool withHessian) const {
  if (static_cast<int>(z.size()) != dimension_)
    throw std::invalid_argument("point has wrong dimension");
  FunctionValue out;
  out.value = value(z);
  out.gradient = gradient(z);
  if (withHessian) out.hessian = hessian(z);
  return out;
}

MpscInstance::MpscInstance(int n, Expr objective,
                           std::vector<Expr> inequalities,
                           std::vector<Expr> equalities,
                           std::vector<std::pair<Expr, Expr>> switches,
                           std::vector<std::string> names)
    : n_(n), f_(std::move(objective), n), names_(std::move(names)) {
  for (auto& e : inequalities) g_.emplace_back(std::move(e), n);
  for (auto& e : equalities) h_.emplace_back(std::move(e), n);
  for (auto& [G, H] : switches)
    switches_.push_back({SmoothFunction(std::move(G), n),
                         SmoothFunction(std::move(H), n)});
  if (names_.empty())
    for (int k = 0; k < n; ++k) names_.push_back("z" + std::to_string(k + 1));
  if (static_cast<int>(names_.size()) != n)
    throw std::invalid_argument("variable name count differs from n");
}

bool MpscInstance::constraintsAffine() const {
  for (const auto& fn : g_)
    if (!fn.isAffine()) return false;
  for (const auto& fn : h_)
    if (!fn.isAffine()) return false;
  for (const auto& sw : switches_)
    if (!sw.G.isAffine() || !sw.H.isAffine()) return false;
  return true;
}

}  // namespace mpsc
