// cada/dsp.h

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

#ifndef CADA_DSP_H_
#define CADA_DSP_H_

#include <complex>
#include <vector>

namespace cada {

// In-place iterative radix-2 FFT; size must be a power of two.
void Fft(std::vector<std::complex<double>>* a, bool inverse = false);

// Power spectrum |X_k|^2 for k = 0..n_fft/2 of a zero-padded real frame.
std::vector<double> PowerSpectrum(const double* frame, int frame_len, int n_fft);

// Periodic Hann window.
std::vector<double> HannWindow(int n);

double Rms(const std::vector<double>& x);

// Second-order IIR section, audio-EQ-cookbook designs, direct form II
// transposed. Coefficients are normalized by a0.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;

  static Biquad Peaking(double fs, double f0, double gain_db, double q);
  static Biquad Lowpass(double fs, double f0, double q = 0.7071067811865476);
  static Biquad Highpass(double fs, double f0, double q = 0.7071067811865476);

  void Process(const double* in, double* out, size_t n);
  std::vector<double> Apply(const std::vector<double>& x);

  // |H(e^{j 2 pi f / fs})|, for response checks.
  double MagnitudeAt(double f, double fs) const;

 private:
  double s1_ = 0, s2_ = 0;  // filter state
};

}  // namespace cada

#endif  // CADA_DSP_H_
