// cada/common.h

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

#ifndef CADA_COMMON_H_
#define CADA_COMMON_H_

#include <cstdint>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cada {

// Error hierarchy. Every failure surfaces as one of these; CLI mains catch
// Error and exit nonzero with the message.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

namespace internal {
class MsgStream {
 public:
  template <typename T>
  MsgStream& operator<<(const T& v) {
    os_ << v;
    return *this;
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};
}  // namespace internal

#define CADA_MAKE_MSG(expr) \
  (::cada::internal::MsgStream() << expr).str()

#define CADA_CHECK(cond, expr)                              \
  do {                                                      \
    if (!(cond)) throw ::cada::ValidationError(CADA_MAKE_MSG(expr)); \
  } while (0)

inline void Warn(const std::string& msg) { std::cerr << "WARNING: " << msg << "\n"; }
inline void Info(const std::string& msg) { std::cerr << msg << "\n"; }

// FNV-1a over bytes; used for config hashes and per-utterance RNG keys.
inline uint64_t Fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t Fnv1a64(const std::string& s) { return Fnv1a64(s.data(), s.size()); }

}  // namespace cada

#endif  // CADA_COMMON_H_
