// cada/rng.h

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

#ifndef CADA_RNG_H_
#define CADA_RNG_H_

#include <cmath>
#include <cstdint>
#include <vector>

#include "cada/common.h"

namespace cada {

// Counter-based PRNG: output i of stream k is a pure function of (k, i).
// Stdlib engines and distributions are avoided everywhere results have to be
// reproducible across platforms and resumable from a serialized state.
class Rng {
 public:
  explicit Rng(uint64_t key = 0, uint64_t counter = 0) : key_(key), counter_(counter) {}

  static Rng Keyed(uint64_t seed, uint64_t stream) {
    uint64_t k = seed;
    k = Mix(k ^ 0x9e3779b97f4a7c15ull);
    k = Mix(k ^ stream);
    return Rng(k);
  }

  uint64_t NextU64() { return Mix(key_ + 0x9e3779b97f4a7c15ull * ++counter_); }

  // Uniform in [0, 1).
  double NextDouble() { return double(NextU64() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * NextDouble(); }

  // Uniform integer in [0, n).
  uint64_t NextBelow(uint64_t n) {
    CADA_CHECK(n > 0, "NextBelow: n must be positive");
    // Rejection sampling keeps the draw unbiased.
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = NextU64();
    } while (v >= limit);
    return v % n;
  }

  // Standard normal via Box-Muller (one value per call; the pair's second
  // half is dropped to keep the stream position simple to reason about).
  double Normal() {
    double u1 = 1.0 - NextDouble();  // (0, 1]
    double u2 = NextDouble();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  template <typename T>
  void Shuffle(std::vector<T>* v) {
    for (size_t i = v->size(); i > 1; --i) {
      size_t j = static_cast<size_t>(NextBelow(i));
      std::swap((*v)[i - 1], (*v)[j]);
    }
  }

  // n distinct values from [0, pool). Caller must ensure n <= pool.
  std::vector<int64_t> SampleWithoutReplacement(int64_t pool, int64_t n) {
    CADA_CHECK(n <= pool, "SampleWithoutReplacement: n=" << n << " exceeds pool=" << pool);
    std::vector<int64_t> idx(pool);
    for (int64_t i = 0; i < pool; ++i) idx[i] = i;
    // Partial Fisher-Yates: only the first n slots are needed.
    for (int64_t i = 0; i < n; ++i) {
      int64_t j = i + static_cast<int64_t>(NextBelow(uint64_t(pool - i)));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    return idx;
  }

  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }
  void set_state(uint64_t key, uint64_t counter) {
    key_ = key;
    counter_ = counter;
  }

 private:
  // splitmix64 finalizer.
  static uint64_t Mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t key_;
  uint64_t counter_;
};

}  // namespace cada

#endif  // CADA_RNG_H_
