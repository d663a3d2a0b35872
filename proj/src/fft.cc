// src/fft.cc

// Copyright 2026 The zrkit authors
//
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

#include "zrkit/fft.h"

#include <cmath>
#include <utility>

#include "zrkit/error.h"

namespace zrkit {

Fft::Fft(int n) : n_(n) {
  if (n < 2 || (n & (n - 1)) != 0)
    throw DomainError("fft size must be a power of two >= 2, got " +
                      std::to_string(n));
  bitrev_.resize(n);
  bitrev_[0] = 0;
  for (int i = 1; i < n; ++i)
    bitrev_[i] = (bitrev_[i >> 1] >> 1) | ((i & 1) ? (n >> 1) : 0);
  twiddle_re_.resize(n / 2);
  twiddle_im_.resize(n / 2);
  const double step = -2.0 * M_PI / n;
  for (int k = 0; k < n / 2; ++k) {
    twiddle_re_[k] = std::cos(step * k);
    twiddle_im_[k] = std::sin(step * k);
  }
}

void Fft::Forward(double* re, double* im) const {
  for (int i = 0; i < n_; ++i) {
    const int j = bitrev_[i];
    if (j > i) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  for (int len = 2; len <= n_; len <<= 1) {
    const int half = len >> 1;
    const int stride = n_ / len;
    for (int base = 0; base < n_; base += len) {
      for (int j = 0; j < half; ++j) {
        const double wr = twiddle_re_[j * stride];
        const double wi = twiddle_im_[j * stride];
        const int a = base + j;
        const int b = a + half;
        const double tr = re[b] * wr - im[b] * wi;
        const double ti = re[b] * wi + im[b] * wr;
        re[b] = re[a] - tr;
        im[b] = im[a] - ti;
        re[a] += tr;
        im[a] += ti;
      }
    }
  }
}

void Fft::Inverse(double* re, double* im) const {
  // conj, forward, conj, scale.
  for (int i = 0; i < n_; ++i) im[i] = -im[i];
  Forward(re, im);
  const double scale = 1.0 / n_;
  for (int i = 0; i < n_; ++i) {
    re[i] *= scale;
    im[i] *= -scale;
  }
}

}  // namespace zrkit
