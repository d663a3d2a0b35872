// include/zrkit/frontend.h

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

// MFCC extraction with optional piecewise-linear VTLN frequency warping,
// delta features, and per-speaker cepstral mean normalization.

#ifndef ZRKIT_FRONTEND_H_
#define ZRKIT_FRONTEND_H_

#include <cmath>
#include <string>
#include <vector>

#include "zrkit/types.h"

namespace zrkit {

struct FrontendConfig {
  int sample_rate = 16000;
  double frame_length = 0.025;  // seconds
  double frame_shift = 0.010;   // seconds
  double preemphasis = 0.97;
  int fft_size = 512;
  int num_mel_bins = 23;
  int num_ceps = 13;  // includes c0
  double low_freq = 20.0;
  double high_freq = 7800.0;
  // Knee of the piecewise-linear VTLN warp, as a fraction of high_freq.
  double warp_low_cutoff_fraction = 0.7;

  int FrameSize() const {
    return static_cast<int>(std::lround(frame_length * sample_rate));
  }
  int ShiftSize() const {
    return static_cast<int>(std::lround(frame_shift * sample_rate));
  }

  // Throws DomainError on inconsistent settings (frequency range, fft size
  // smaller than a frame, cepstral count above the bank size).
  void Validate() const;
};

struct MelFilterbank {
  double warp_factor = 1.0;
  Matrix filters;  // num_mel_bins x (fft_size/2 + 1), nonnegative
};

// mel(f) = 1127 ln(1 + f/700)
inline double MelScale(double freq) {
  return 1127.0 * std::log1p(freq / 700.0);
}

// Piecewise-linear vocal tract length warp. Below the knee f0 =
// warp_low_cutoff_fraction * high_freq the frequency axis is scaled by
// 1/alpha; above it the warp runs linearly from (f0, f0/alpha) to
// (high_freq, high_freq) so the filterbank support stays fixed. alpha = 1
// is the exact identity.
double WarpFrequency(double freq, double alpha, const FrontendConfig& config);

// Exact inverse of WarpFrequency on [0, high_freq]: the physical frequency
// that the warp maps onto freq. Synthetic corpora place spectral landmarks
// here so that analysis at the same alpha sees them at their nominal
// positions again.
double InverseWarpFrequency(double freq, double alpha,
                            const FrontendConfig& config);

// Slices samples into overlapping frames, applies per-frame preemphasis
// s[t] - preemphasis * s[t-1] (the first sample is preemphasized against
// itself), then a Hamming window. N = 1 + floor((len - frame_size) / shift).
// Throws DomainError if the input is shorter than one frame.
Matrix FrameAndWindow(const std::vector<float>& samples,
                      const FrontendConfig& config);

// Squared magnitude of the real FFT of each zero-padded row;
// N x (fft_size/2 + 1).
Matrix PowerSpectrum(const Matrix& frames, int fft_size);

// Triangular filters equally spaced on the mel scale between mel(low_freq)
// and mel(high_freq), with every physical bin frequency passed through the
// VTLN warp before mel conversion. alpha must lie in [0.5, 2.0].
MelFilterbank BuildFilterbank(const FrontendConfig& config, double warp_factor);

// log (floored at 1e-10) mel filter energies followed by an orthonormal
// DCT-II, keeping c0..c(num_ceps-1). utterance_id is left empty.
FeatureSequence Mfcc(const Matrix& power_spectra, const MelFilterbank& bank,
                     const FrontendConfig& config);

// Orthonormal DCT-II matrix (rows x cols), rows <= cols; M M^T = I for
// rows == cols.
Matrix DctMatrix(int rows, int cols);

// Appends Delta[t] = sum_k k (x[t+k] - x[t-k]) / (2 sum_k k^2), k = 1..window,
// with edge frames replicated, then the same applied again: [x; D; DD].
FeatureSequence AddDeltas(const FeatureSequence& features, int window = 2);

// Subtracts, per speaker, the mean over all of that speaker's frames.
// Accumulation runs in manifest order so the result is independent of the
// archive's utterance order and of any parallel upstream scheduling. Every
// archive utterance must appear in the manifest.
void CmnPerSpeaker(std::vector<FeatureSequence>* archive,
                   const UtteranceManifest& manifest);

// Full single-utterance chain: frame/window, power spectrum, warped mel
// bank, DCT. sample_rate must match the config. Deltas and CMN are applied
// separately on the corpus level.
FeatureSequence ComputeMfcc(const std::vector<float>& samples, int sample_rate,
                            const FrontendConfig& config, double warp_factor,
                            const std::string& utterance_id);

}  // namespace zrkit

#endif  // ZRKIT_FRONTEND_H_
