// cada/tensor.h

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

#ifndef CADA_TENSOR_H_
#define CADA_TENSOR_H_

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "cada/common.h"
#include "cada/rng.h"

namespace cada {

// Dense row-major tensor of doubles. Value semantics; copies copy storage.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape);
  Tensor(std::vector<int64_t> shape, std::vector<double> data);

  static Tensor Full(std::vector<int64_t> shape, double v);
  static Tensor Scalar(double v) { return Tensor({1}, {v}); }

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t dim(int i) const { return shape_.at(i); }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](int64_t i) { return data_[i]; }
  double operator[](int64_t i) const { return data_[i]; }

  double& at(std::initializer_list<int64_t> idx) { return data_[Offset(idx)]; }
  double at(std::initializer_list<int64_t> idx) const { return data_[Offset(idx)]; }

  // Same storage, new shape; element count must match.
  Tensor Reshaped(std::vector<int64_t> shape) const;

  void Fill(double v);
  void FillNormal(Rng* rng, double mean, double stddev);
  void FillUniform(Rng* rng, double lo, double hi);

  bool SameShape(const Tensor& other) const { return shape_ == other.shape_; }
  bool AllFinite() const;
  double MaxAbs() const;

  std::string ShapeStr() const;

 private:
  int64_t Offset(std::initializer_list<int64_t> idx) const;

  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

int64_t ShapeNumel(const std::vector<int64_t>& shape);

}  // namespace cada

#endif  // CADA_TENSOR_H_
