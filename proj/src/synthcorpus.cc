// src/synthcorpus.cc

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

#include "zrkit/synthcorpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "zrkit/error.h"
#include "zrkit/frontend.h"
#include "zrkit/io.h"
#include "zrkit/rng.h"

namespace zrkit {
namespace {

constexpr double kFrameShift = 0.010;
constexpr double kFrameLength = 0.025;

// Audio mode.
constexpr double kF0Base = 125.0;        // Hz, before the per-speaker spread
constexpr double kFormantSigma = 160.0;  // Gaussian envelope, FWHM ~ 380 Hz
constexpr int kMaxHarmonics = 256;
constexpr int kBreathPartials = 96;
constexpr double kBreathGain = 0.45;  // relative to the harmonic part
constexpr double kRampSeconds = 0.004;  // raised-cosine segment edges

std::string Tag(const char* stem, int64_t i) {
  return std::string(stem) + std::to_string(i);
}

std::string PaddedId(const char* format, int64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), format, static_cast<long long>(i));
  return buf;
}

// ---------------------------------------------------------------------------
// Feature-space mode.

// Smooth trajectory: per dimension a mean plus three random harmonics of
// the token-relative time u in [0, 1].
struct WordTemplate {
  Vector mean;
  Matrix amp;    // D x 3
  Matrix phase;  // D x 3

  Vector At(double u) const {
    const int64_t dim = mean.size();
    Vector x = mean;
    for (int64_t d = 0; d < dim; ++d)
      for (int h = 0; h < 3; ++h)
        x(d) += amp(d, h) * std::sin(2.0 * M_PI * (h + 1) * u + phase(d, h));
    return x;
  }
};

WordTemplate DrawWordTemplate(int64_t dim, Rng* rng) {
  WordTemplate word;
  word.mean.resize(dim);
  word.amp.resize(dim, 3);
  word.phase.resize(dim, 3);
  for (int64_t d = 0; d < dim; ++d) word.mean(d) = 0.5 * rng->Normal();
  for (int64_t d = 0; d < dim; ++d)
    for (int h = 0; h < 3; ++h) word.amp(d, h) = rng->Normal() / (h + 1);
  for (int64_t d = 0; d < dim; ++d)
    for (int h = 0; h < 3; ++h) word.phase(d, h) = rng->Uniform(0.0, 2.0 * M_PI);
  return word;
}

struct SpeakerTransform {
  Matrix rotation;  // D x D orthonormal
  Vector offset;
};

// Product of 2D random Givens rotations; angle scale 0 leaves the exact
// identity, so zero-scale speakers are bitwise no-ops.
SpeakerTransform DrawSpeakerTransform(int64_t dim, const SynthConfig& config,
                                      Rng* rng) {
  SpeakerTransform speaker;
  speaker.rotation = Matrix::Identity(dim, dim);
  for (int64_t g = 0; dim >= 2 && g < 2 * dim; ++g) {
    const int64_t i = rng->UniformInt(dim);
    int64_t j = rng->UniformInt(dim - 1);
    if (j >= i) ++j;
    const double theta =
        config.speaker_rotation_angle_scale * rng->Uniform(-1.0, 1.0);
    const double c = std::cos(theta), s = std::sin(theta);
    const Vector row_i = speaker.rotation.row(i);
    const Vector row_j = speaker.rotation.row(j);
    speaker.rotation.row(i) = c * row_i - s * row_j;
    speaker.rotation.row(j) = s * row_i + c * row_j;
  }
  speaker.offset.resize(dim);
  for (int64_t d = 0; d < dim; ++d)
    speaker.offset(d) = config.speaker_offset_scale * rng->Normal();
  return speaker;
}

FloatMatrix RenderFeatureToken(const WordTemplate& word,
                               const SpeakerTransform& speaker,
                               int64_t num_frames, const SynthConfig& config,
                               Rng* rng) {
  FloatMatrix frames(num_frames, config.feature_dim);
  for (int64_t t = 0; t < num_frames; ++t) {
    const double u = num_frames > 1 ? double(t) / double(num_frames - 1) : 0.0;
    Vector x = speaker.rotation * word.At(u) + speaker.offset;
    for (int64_t d = 0; d < config.feature_dim; ++d)
      x(d) += config.noise_scale * rng->Normal();
    frames.row(t) = x.cast<float>().transpose();
  }
  return frames;
}

// ---------------------------------------------------------------------------
// Audio mode.

struct VowelSpec {
  double formants[3];
  double share;  // relative duration weight
  std::vector<double> phases;
  // Aperiodic "breath" partials at word-fixed random frequencies. Their
  // amplitudes read the formant envelope between the harmonics, so the
  // envelope position survives coarse harmonic sampling (an F1 warp shift
  // is smaller than the harmonic spacing).
  std::vector<double> breath_freqs;
  std::vector<double> breath_phases;
};

struct AudioWord {
  std::vector<VowelSpec> vowels;
};

struct AudioSpeaker {
  double alpha = 1.0;
  double f0 = kF0Base;
  double tilt = 0.0;  // log-spectral slope exponent
};

AudioWord DrawAudioWord(Rng* rng) {
  AudioWord word;
  const int64_t n_vowels = 2 + rng->UniformInt(2);
  for (int64_t v = 0; v < n_vowels; ++v) {
    VowelSpec vowel;
    vowel.formants[0] = rng->Uniform(350.0, 800.0);
    vowel.formants[1] = rng->Uniform(1000.0, 2000.0);
    vowel.formants[2] = rng->Uniform(2300.0, 3000.0);
    vowel.share = rng->Uniform(0.8, 1.25);
    vowel.phases.resize(kMaxHarmonics);
    for (double& phase : vowel.phases) phase = rng->Uniform(0.0, 2.0 * M_PI);
    vowel.breath_freqs.resize(kBreathPartials);
    vowel.breath_phases.resize(kBreathPartials);
    // Evenly spaced with a small random offset per partial: uniform density
    // keeps the mel-filter energies smooth however the warp stretches the
    // filters, unlike clumpy fully random placement.
    const double step = (6200.0 - 250.0) / kBreathPartials;
    for (int b = 0; b < kBreathPartials; ++b)
      vowel.breath_freqs[b] =
          250.0 + (b + rng->Uniform(0.2, 0.8)) * step;
    for (double& phase : vowel.breath_phases)
      phase = rng->Uniform(0.0, 2.0 * M_PI);
    word.vowels.push_back(vowel);
  }
  return word;
}

AudioSpeaker DrawAudioSpeaker(double alpha, const SynthConfig& config,
                              Rng* rng) {
  AudioSpeaker speaker;
  speaker.alpha = alpha;
  speaker.f0 =
      kF0Base * (1.0 + config.speaker_rotation_angle_scale *
                           rng->Uniform(-1.0, 1.0));
  speaker.tilt = config.speaker_offset_scale * rng->Uniform(-0.8, 0.8);
  return speaker;
}

// Harmonics of f0 shaped by the warped Gaussian formant envelope and the
// spectral tilt, with raised-cosine edges against clicks. The analysis
// filterbank reads physical frequency f as w_alpha(f), so the canonical
// formant centers are placed at the inverse-warped frequencies and analysis
// at the speaker's alpha sees the canonical spectrum again.
void RenderVowel(const VowelSpec& vowel, const AudioSpeaker& speaker,
                 int64_t num_samples, const SynthConfig& config,
                 const FrontendConfig& frontend, Rng* rng,
                 std::vector<float>* out) {
  const double f0 = speaker.f0 * (1.0 + 2.0 * config.noise_scale *
                                            rng->Uniform(-1.0, 1.0));
  const double tilt =
      speaker.tilt + 2.0 * config.noise_scale * rng->Uniform(-1.0, 1.0);
  double centers[3];
  for (int m = 0; m < 3; ++m) {
    const double jittered =
        vowel.formants[m] *
        (1.0 + 0.8 * config.noise_scale * rng->Uniform(-1.0, 1.0));
    centers[m] = InverseWarpFrequency(jittered, speaker.alpha, frontend);
  }

  const auto envelope_at = [&centers](double freq) {
    double envelope = 0.0;
    for (const double center : centers)
      envelope += std::exp(-std::pow((freq - center) / kFormantSigma, 2));
    return envelope;
  };

  const double cap = std::min(7000.0, 0.45 * config.sample_rate);
  std::vector<double> wave(num_samples, 0.0);
  for (int k = 1; k <= kMaxHarmonics; ++k) {
    const double freq = k * f0;
    if (freq >= cap) break;
    const double envelope = envelope_at(freq);
    if (envelope < 1e-4) continue;
    const double amp = envelope * std::pow(freq / 1000.0, tilt);
    const double omega = 2.0 * M_PI * freq / config.sample_rate;
    const double phase = vowel.phases[k - 1];
    for (int64_t t = 0; t < num_samples; ++t)
      wave[t] += amp * std::sin(omega * t + phase);
  }
  for (int b = 0; b < kBreathPartials; ++b) {
    const double freq = vowel.breath_freqs[b];
    if (freq >= cap) continue;
    const double envelope = envelope_at(freq);
    if (envelope < 1e-4) continue;
    const double amp =
        kBreathGain * envelope * std::pow(freq / 1000.0, tilt);
    const double omega = 2.0 * M_PI * freq / config.sample_rate;
    const double phase = vowel.breath_phases[b];
    for (int64_t t = 0; t < num_samples; ++t)
      wave[t] += amp * std::sin(omega * t + phase);
  }

  double peak = 1e-9;
  for (const double v : wave) peak = std::max(peak, std::abs(v));
  const double gain =
      0.5 * (1.0 - 0.8 * config.noise_scale * rng->Uniform(0.0, 1.0)) / peak;
  const int64_t ramp = std::min<int64_t>(
      num_samples / 4, std::llround(kRampSeconds * config.sample_rate));
  for (int64_t t = 0; t < num_samples; ++t) {
    double window = 1.0;
    if (t < ramp) window = 0.5 - 0.5 * std::cos(M_PI * (t + 1) / (ramp + 1));
    const int64_t from_end = num_samples - 1 - t;
    if (from_end < ramp)
      window =
          std::min(window, 0.5 - 0.5 * std::cos(M_PI * (from_end + 1) /
                                                (ramp + 1)));
    const double noise = 0.06 * config.noise_scale * rng->Normal();
    out->push_back(static_cast<float>(gain * window * wave[t] + noise));
  }
}

std::vector<float> RenderAudioToken(const AudioWord& word,
                                    const AudioSpeaker& speaker,
                                    int64_t num_samples,
                                    const SynthConfig& config,
                                    const FrontendConfig& frontend, Rng* rng) {
  double total_share = 0.0;
  for (const VowelSpec& vowel : word.vowels) total_share += vowel.share;
  std::vector<float> samples;
  samples.reserve(num_samples);
  int64_t emitted = 0;
  for (size_t v = 0; v < word.vowels.size(); ++v) {
    const int64_t want =
        v + 1 == word.vowels.size()
            ? num_samples - emitted
            : std::llround(num_samples * word.vowels[v].share / total_share);
    RenderVowel(word.vowels[v], speaker, want, config, frontend, rng,
                &samples);
    emitted += want;
  }
  return samples;
}

}  // namespace

const char* SynthModeName(SynthMode mode) {
  switch (mode) {
    case SynthMode::kFeatureSpace:
      return "feature-space";
    case SynthMode::kAudio:
      return "audio";
  }
  throw DomainError("synth: unknown mode");
}

SynthMode ParseSynthMode(const std::string& name) {
  if (name == "feature-space") return SynthMode::kFeatureSpace;
  if (name == "audio") return SynthMode::kAudio;
  throw DomainError("synth: unknown mode '" + name +
                    "' (expected feature-space or audio)");
}

void SynthConfig::Validate() const {
  if (n_words < 1 || tokens_per_word < 1 || n_speakers < 1 ||
      feature_dim < 1 || mean_token_frames < 1)
    throw DomainError("synth: all counts must be >= 1");
  if (speaker_offset_scale < 0.0 || speaker_rotation_angle_scale < 0.0 ||
      noise_scale < 0.0)
    throw DomainError("synth: scales must be >= 0");
  if (!(tempo_jitter >= 0.0 && tempo_jitter <= 0.9))
    throw DomainError("synth: tempo_jitter must be in [0, 0.9]");
  if (mode == SynthMode::kAudio) {
    if (warp_set.empty()) throw DomainError("synth: warp_set must be nonempty");
    for (const double alpha : warp_set)
      if (!(alpha >= 0.5 && alpha <= 2.0))
        throw DomainError("synth: warp " + std::to_string(alpha) +
                          " outside [0.5, 2.0]");
    if (sample_rate < 8000)
      throw DomainError("synth: sample_rate must be >= 8000");
    if (mean_token_frames * (1.0 - tempo_jitter) < 3.0)
      throw DomainError(
          "synth: the shortest token must cover one analysis window; raise "
          "mean_token_frames or lower tempo_jitter");
  }
}

SynthCorpus GenerateSynthCorpus(const SynthConfig& config) {
  config.Validate();
  Rng root(config.seed);
  SynthCorpus corpus;

  FrontendConfig frontend;
  frontend.sample_rate = config.sample_rate;

  std::vector<WordTemplate> word_templates;
  std::vector<AudioWord> audio_words;
  for (int64_t w = 0; w < config.n_words; ++w) {
    Rng rng = root.Fork(Tag("word-", w));
    if (config.mode == SynthMode::kFeatureSpace)
      word_templates.push_back(DrawWordTemplate(config.feature_dim, &rng));
    else
      audio_words.push_back(DrawAudioWord(&rng));
  }

  std::vector<SpeakerTransform> speaker_transforms;
  std::vector<AudioSpeaker> audio_speakers;
  std::vector<std::string> speaker_ids;
  for (int64_t s = 0; s < config.n_speakers; ++s) {
    Rng rng = root.Fork(Tag("speaker-", s));
    speaker_ids.push_back(PaddedId("spk%02lld", s));
    double alpha = 1.0;
    if (config.mode == SynthMode::kFeatureSpace) {
      speaker_transforms.push_back(
          DrawSpeakerTransform(config.feature_dim, config, &rng));
    } else {
      alpha = config.warp_set[s % config.warp_set.size()];
      audio_speakers.push_back(DrawAudioSpeaker(alpha, config, &rng));
    }
    corpus.true_warps.warps[speaker_ids.back()] = alpha;
  }

  std::vector<ManifestEntry> entries;
  for (int64_t w = 0; w < config.n_words; ++w) {
    const std::string word_label = PaddedId("word%02lld", w);
    for (int64_t t = 0; t < config.tokens_per_word; ++t) {
      const int64_t s = t % config.n_speakers;
      Rng rng = root.Fork(Tag("word-", w) + Tag("-token-", t));
      const double tempo = 1.0 + config.tempo_jitter * rng.Uniform(-1.0, 1.0);

      ManifestEntry entry;
      entry.utterance_id = PaddedId("w%02lld", w) + PaddedId("_t%02lld", t) +
                           "_" + speaker_ids[s];
      entry.speaker_id = speaker_ids[s];

      double end_seconds = 0.0;
      if (config.mode == SynthMode::kFeatureSpace) {
        const int64_t num_frames = std::max<int64_t>(
            2, std::llround(config.mean_token_frames * tempo));
        FeatureSequence features;
        features.utterance_id = entry.utterance_id;
        features.frame_shift = kFrameShift;
        features.frame_length = kFrameLength;
        features.frames = RenderFeatureToken(
            word_templates[w], speaker_transforms[s], num_frames, config,
            &rng);
        corpus.archive.push_back(std::move(features));
        entry.audio_path = "features.zrfa";
        end_seconds = num_frames * kFrameShift;
      } else {
        const int64_t num_samples = std::llround(
            config.mean_token_frames * kFrameShift * tempo *
            config.sample_rate);
        if (num_samples < frontend.FrameSize())
          throw DomainError("synth: token of " + std::to_string(num_samples) +
                            " samples is shorter than one analysis frame");
        corpus.waveforms.push_back(RenderAudioToken(
            audio_words[w], audio_speakers[s], num_samples, config, frontend,
            &rng));
        entry.audio_path = "wav/" + entry.utterance_id + ".wav";
        // Only full analysis windows are claimed by the alignment, so the
        // frame spans stay valid against extracted features.
        const int64_t usable_frames =
            1 + (num_samples - frontend.FrameSize()) / frontend.ShiftSize();
        end_seconds = usable_frames * kFrameShift;
      }
      corpus.alignments.push_back(
          {entry.utterance_id, word_label, 0.0, end_seconds});
      entries.push_back(std::move(entry));
    }
  }
  corpus.manifest = UtteranceManifest(std::move(entries));
  if (config.mode == SynthMode::kAudio) corpus.sample_rate = config.sample_rate;
  return corpus;
}

void WriteSynthCorpus(const std::string& dir, const SynthCorpus& corpus) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  fs::create_directories(base);
  SaveManifest((base / "manifest.tsv").string(), corpus.manifest);
  SaveAlignments((base / "alignments.txt").string(), corpus.alignments);
  SaveWarpTable((base / "true_warps.tsv").string(), corpus.true_warps);
  if (!corpus.waveforms.empty()) {
    if (corpus.waveforms.size() != corpus.manifest.entries().size())
      throw DomainError("synth: waveforms do not match the manifest");
    fs::create_directories(base / "wav");
    for (size_t i = 0; i < corpus.waveforms.size(); ++i)
      WriteWav((base / corpus.manifest.entries()[i].audio_path).string(),
               corpus.waveforms[i], corpus.sample_rate);
  }
  if (!corpus.archive.empty())
    WriteFeatureArchive((base / "features.zrfa").string(), corpus.archive);
}

}  // namespace zrkit
