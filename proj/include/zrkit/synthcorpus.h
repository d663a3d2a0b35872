// include/zrkit/synthcorpus.h

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

// Seeded synthetic mini-corpus generator. Word classes are smooth random
// template trajectories; tokens are tempo-jittered renderings distorted by
// their speaker. Two modes:
//
//  * feature-space: tokens are emitted directly as feature matrices. The
//    speaker distortion is a fixed small rotation plus a constant offset,
//    so CMN-style normalization and pair-trained networks have something
//    real to remove.
//  * audio: tokens are harmonic tones shaped by Gaussian formant envelopes
//    and written as WAV files. Each speaker has a true warp factor alpha
//    drawn from a configured set; the word's canonical formant centers are
//    placed at the inverse-warped frequencies of the analysis frontend
//    (alpha * f below the knee), so feature extraction warped by the same
//    alpha sees the canonical spectrum and maximum-likelihood estimation
//    can recover alpha. Speakers also differ in fundamental frequency and
//    spectral tilt.
//
// Everything is derived from the seed through tagged forks, so generation
// is deterministic and single-threaded. With noise, jitter and speaker
// scales all zero (and a single identity warp), every token of a word is
// bit-identical and downstream same-different AP is exactly 1.

#ifndef ZRKIT_SYNTHCORPUS_H_
#define ZRKIT_SYNTHCORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "zrkit/types.h"
#include "zrkit/vtln.h"

namespace zrkit {

enum class SynthMode {
  kFeatureSpace,
  kAudio,
};

// "feature-space" or "audio".
const char* SynthModeName(SynthMode mode);
SynthMode ParseSynthMode(const std::string& name);

struct SynthConfig {
  int64_t n_words = 8;
  int64_t tokens_per_word = 12;
  int64_t n_speakers = 6;
  int64_t feature_dim = 13;        // feature-space mode only
  int64_t mean_token_frames = 60;  // on the 10 ms grid
  // Speaker distortion strengths. In feature-space mode: constant-offset and
  // rotation-angle magnitudes. In audio mode the same two knobs set the
  // spectral-tilt spread and the fundamental-frequency spread, so zero
  // scales mean indistinguishable voices in either mode.
  double speaker_offset_scale = 0.5;
  double speaker_rotation_angle_scale = 0.2;
  // Within-class variation: additive feature/sample noise plus (audio mode)
  // per-token formant, f0 and tilt jitter. Zero makes tokens exact repeats.
  double noise_scale = 0.05;
  // Fractional spread of token duration; 0 fixes every token's length.
  double tempo_jitter = 0.2;
  uint64_t seed = 0;
  SynthMode mode = SynthMode::kFeatureSpace;
  // Audio mode: per-speaker true warp factors, assigned round-robin.
  std::vector<double> warp_set = {0.9, 1.0, 1.1};
  int sample_rate = 16000;  // audio mode

  // Throws DomainError: counts must be >= 1, scales >= 0, tempo_jitter in
  // [0, 0.9], warps within [0.5, 2.0], and (audio mode) the shortest token
  // must still cover one analysis window.
  void Validate() const;
};

// One generated corpus. The manifest, alignments and true warps are always
// filled; `archive` is used in feature-space mode and `waveforms` (aligned
// one-to-one with the manifest) in audio mode. Manifest audio paths are
// relative to the corpus directory: "features.zrfa" in feature-space mode,
// "wav/<utterance_id>.wav" in audio mode.
struct SynthCorpus {
  UtteranceManifest manifest;
  std::vector<WordAlignmentEntry> alignments;
  WarpTable true_warps;
  std::vector<FeatureSequence> archive;
  std::vector<std::vector<float>> waveforms;
  int sample_rate = 0;
};

// Deterministic given config.seed. Utterance w02_t05_spk01 is token 5 of
// word "word02", spoken by speaker spk01 = 5 mod n_speakers; one word token
// per utterance, starting at time zero.
SynthCorpus GenerateSynthCorpus(const SynthConfig& config);

// Writes manifest.tsv, alignments.txt, true_warps.tsv and the features or
// WAV files under dir (created if needed), at the relative paths recorded
// in the manifest.
void WriteSynthCorpus(const std::string& dir, const SynthCorpus& corpus);

}  // namespace zrkit

#endif  // ZRKIT_SYNTHCORPUS_H_
