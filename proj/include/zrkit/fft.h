// include/zrkit/fft.h

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

#ifndef ZRKIT_FFT_H_
#define ZRKIT_FFT_H_

#include <vector>

namespace zrkit {

// Iterative radix-2 complex FFT with precomputed twiddles and bit-reversal
// table. Small (n = 512 here) and self-contained, which keeps the feature
// pipeline bit-reproducible with no planner state.
class Fft {
 public:
  // n must be a power of two >= 2; throws DomainError otherwise.
  explicit Fft(int n);

  int size() const { return n_; }

  // In-place forward transform of the complex signal (re, im), both of
  // length size().
  void Forward(double* re, double* im) const;

  // In-place inverse transform, including the 1/n scale.
  void Inverse(double* re, double* im) const;

 private:
  int n_;
  std::vector<int> bitrev_;
  std::vector<double> twiddle_re_;  // cos(-2*pi*k/n), k < n/2
  std::vector<double> twiddle_im_;  // sin(-2*pi*k/n), k < n/2
};

}  // namespace zrkit

#endif  // ZRKIT_FFT_H_
