// cada/tensor.cc

// Copyright 2026 CADA-GAN Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "cada/tensor.h"

#include <cmath>

namespace cada {

int64_t ShapeNumel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    CADA_CHECK(d >= 0, "negative dimension in shape");
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<int64_t> shape)
    : shape_(std::move(shape)), data_(ShapeNumel(shape_), 0.0) {}

Tensor::Tensor(std::vector<int64_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  CADA_CHECK(ShapeNumel(shape_) == static_cast<int64_t>(data_.size()),
             "tensor data size " << data_.size() << " does not match shape " << ShapeStr());
}

Tensor Tensor::Full(std::vector<int64_t> shape, double v) {
  Tensor t(std::move(shape));
  t.Fill(v);
  return t;
}

Tensor Tensor::Reshaped(std::vector<int64_t> shape) const {
  CADA_CHECK(ShapeNumel(shape) == size(),
             "reshape " << ShapeStr() << " to incompatible element count");
  return Tensor(std::move(shape), data_);
}

void Tensor::Fill(double v) {
  for (double& x : data_) x = v;
}

void Tensor::FillNormal(Rng* rng, double mean, double stddev) {
  for (double& x : data_) x = mean + stddev * rng->Normal();
}

void Tensor::FillUniform(Rng* rng, double lo, double hi) {
  for (double& x : data_) x = rng->Uniform(lo, hi);
}

bool Tensor::AllFinite() const {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

double Tensor::MaxAbs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::fabs(x));
  return m;
}

std::string Tensor::ShapeStr() const {
  std::string s = "[";
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

int64_t Tensor::Offset(std::initializer_list<int64_t> idx) const {
  CADA_CHECK(idx.size() == shape_.size(), "index rank mismatch for shape " << ShapeStr());
  int64_t off = 0;
  int i = 0;
  for (int64_t v : idx) {
    CADA_CHECK(v >= 0 && v < shape_[i], "index out of range in dim " << i);
    off = off * shape_[i] + v;
    ++i;
  }
  return off;
}

}  // namespace cada
