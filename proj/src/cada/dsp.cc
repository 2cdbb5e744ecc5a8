// cada/dsp.cc

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

#include "cada/dsp.h"

#include <cmath>

#include "cada/common.h"

namespace cada {

void Fft(std::vector<std::complex<double>>* a, bool inverse) {
  const size_t n = a->size();
  CADA_CHECK(n > 0 && (n & (n - 1)) == 0, "FFT size must be a power of two, got " << n);
  auto& v = *a;

  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(v[i], v[j]);
  }

  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * M_PI / double(len) * (inverse ? 1.0 : -1.0);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = v[i + k];
        std::complex<double> t = v[i + k + len / 2] * w;
        v[i + k] = u + t;
        v[i + k + len / 2] = u - t;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& x : v) x /= double(n);
  }
}

std::vector<double> PowerSpectrum(const double* frame, int frame_len, int n_fft) {
  CADA_CHECK(frame_len <= n_fft, "frame longer than FFT size");
  std::vector<std::complex<double>> buf(size_t(n_fft), {0.0, 0.0});
  for (int i = 0; i < frame_len; ++i) buf[i] = frame[i];
  Fft(&buf);
  std::vector<double> p(size_t(n_fft / 2 + 1));
  for (int k = 0; k <= n_fft / 2; ++k) p[k] = std::norm(buf[k]);
  return p;
}

std::vector<double> HannWindow(int n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) w[size_t(i)] = 0.5 - 0.5 * std::cos(2.0 * M_PI * double(i) / double(n));
  return w;
}

double Rms(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s / double(x.size()));
}

Biquad Biquad::Peaking(double fs, double f0, double gain_db, double q) {
  CADA_CHECK(q > 0, "peaking filter requires Q > 0");
  CADA_CHECK(f0 > 0 && f0 < fs / 2, "peaking center frequency out of range");
  double a = std::pow(10.0, gain_db / 40.0);
  double w0 = 2.0 * M_PI * f0 / fs;
  double alpha = std::sin(w0) / (2.0 * q);
  double b0 = 1 + alpha * a, b1 = -2 * std::cos(w0), b2 = 1 - alpha * a;
  double a0 = 1 + alpha / a, a1 = -2 * std::cos(w0), a2 = 1 - alpha / a;
  Biquad f;
  f.b0 = b0 / a0;
  f.b1 = b1 / a0;
  f.b2 = b2 / a0;
  f.a1 = a1 / a0;
  f.a2 = a2 / a0;
  return f;
}

Biquad Biquad::Lowpass(double fs, double f0, double q) {
  CADA_CHECK(f0 > 0 && f0 < fs / 2, "lowpass cutoff out of range");
  double w0 = 2.0 * M_PI * f0 / fs;
  double alpha = std::sin(w0) / (2.0 * q);
  double c = std::cos(w0);
  double b0 = (1 - c) / 2, b1 = 1 - c, b2 = (1 - c) / 2;
  double a0 = 1 + alpha, a1 = -2 * c, a2 = 1 - alpha;
  Biquad f;
  f.b0 = b0 / a0;
  f.b1 = b1 / a0;
  f.b2 = b2 / a0;
  f.a1 = a1 / a0;
  f.a2 = a2 / a0;
  return f;
}

Biquad Biquad::Highpass(double fs, double f0, double q) {
  CADA_CHECK(f0 > 0 && f0 < fs / 2, "highpass cutoff out of range");
  double w0 = 2.0 * M_PI * f0 / fs;
  double alpha = std::sin(w0) / (2.0 * q);
  double c = std::cos(w0);
  double b0 = (1 + c) / 2, b1 = -(1 + c), b2 = (1 + c) / 2;
  double a0 = 1 + alpha, a1 = -2 * c, a2 = 1 - alpha;
  Biquad f;
  f.b0 = b0 / a0;
  f.b1 = b1 / a0;
  f.b2 = b2 / a0;
  f.a1 = a1 / a0;
  f.a2 = a2 / a0;
  return f;
}

void Biquad::Process(const double* in, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    double x = in[i];
    double y = b0 * x + s1_;
    s1_ = b1 * x - a1 * y + s2_;
    s2_ = b2 * x - a2 * y;
    out[i] = y;
  }
}

std::vector<double> Biquad::Apply(const std::vector<double>& x) {
  std::vector<double> y(x.size());
  Process(x.data(), y.data(), x.size());
  return y;
}

double Biquad::MagnitudeAt(double f, double fs) const {
  std::complex<double> z = std::polar(1.0, -2.0 * M_PI * f / fs);
  std::complex<double> num = b0 + b1 * z + b2 * z * z;
  std::complex<double> den = 1.0 + a1 * z + a2 * z * z;
  return std::abs(num / den);
}

}  // namespace cada
