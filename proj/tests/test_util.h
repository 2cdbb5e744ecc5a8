// tests/test_util.h

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

#ifndef CADA_TESTS_TEST_UTIL_H_
#define CADA_TESTS_TEST_UTIL_H_

#include <cmath>
#include <filesystem>
#include <string>

#include "cada/tensor.h"

namespace cada::testutil {

// Fresh scratch directory under the system temp root; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    namespace fs = std::filesystem;
    path_ = (fs::temp_directory_path() / ("cada-" + tag + "-" + std::to_string(::getpid())))
                .string();
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::string& path() const { return path_; }
  std::string File(const std::string& name) const {
    return (std::filesystem::path(path_) / name).string();
  }

 private:
  std::string path_;
};

// Largest relative disagreement, with an absolute floor so near-zero entries
// compare absolutely.
inline double MaxRelErr(const Tensor& a, const Tensor& b, double abs_floor = 1e-8) {
  double worst = 0;
  for (int64_t i = 0; i < a.size(); ++i) {
    double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), abs_floor});
    worst = std::max(worst, std::fabs(a[i] - b[i]) / denom);
  }
  return worst;
}

inline Tensor RandomTensor(std::vector<int64_t> shape, uint64_t seed, double scale = 1.0) {
  Tensor t(std::move(shape));
  Rng rng = Rng::Keyed(seed, 0x7e57);
  t.FillNormal(&rng, 0.0, scale);
  return t;
}

}  // namespace cada::testutil

#endif  // CADA_TESTS_TEST_UTIL_H_
