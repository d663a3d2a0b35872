// src/frontend.cc

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

#include "zrkit/frontend.h"

#include <algorithm>
#include <unordered_map>

#include "zrkit/error.h"
#include "zrkit/fft.h"

namespace zrkit {

void FrontendConfig::Validate() const {
  if (sample_rate <= 0)
    throw DomainError("frontend: sample_rate must be positive");
  if (frame_length <= 0.0 || frame_shift <= 0.0)
    throw DomainError("frontend: frame length and shift must be positive");
  if (!(low_freq > 0.0 && low_freq < high_freq &&
        high_freq <= sample_rate / 2.0))
    throw DomainError(
        "frontend: need 0 < low_freq < high_freq <= sample_rate/2");
  if (fft_size < FrameSize())
    throw DomainError("frontend: fft_size " + std::to_string(fft_size) +
                      " is smaller than a frame of " +
                      std::to_string(FrameSize()) + " samples");
  if (fft_size < 2 || (fft_size & (fft_size - 1)) != 0)
    throw DomainError("frontend: fft_size must be a power of two");
  if (num_ceps < 1 || num_ceps > num_mel_bins)
    throw DomainError("frontend: need 1 <= num_ceps <= num_mel_bins");
  if (num_mel_bins < 2) throw DomainError("frontend: need at least 2 mel bins");
  if (!(warp_low_cutoff_fraction > 0.0 && warp_low_cutoff_fraction < 1.0))
    throw DomainError("frontend: warp_low_cutoff_fraction must be in (0, 1)");
}

double WarpFrequency(double freq, double alpha, const FrontendConfig& config) {
  if (alpha == 1.0) return freq;
  const double f0 = config.warp_low_cutoff_fraction * config.high_freq;
  if (freq <= f0) return freq / alpha;
  // Line from (f0, f0/alpha) to (high_freq, high_freq), extended beyond
  // high_freq; the energy out there falls outside the bank either way.
  const double slope =
      (config.high_freq - f0 / alpha) / (config.high_freq - f0);
  return f0 / alpha + slope * (freq - f0);
}

double InverseWarpFrequency(double freq, double alpha,
                            const FrontendConfig& config) {
  if (alpha == 1.0) return freq;
  const double f0 = config.warp_low_cutoff_fraction * config.high_freq;
  if (freq <= f0 / alpha) return freq * alpha;
  const double slope =
      (config.high_freq - f0 / alpha) / (config.high_freq - f0);
  return f0 + (freq - f0 / alpha) / slope;
}

Matrix FrameAndWindow(const std::vector<float>& samples,
                      const FrontendConfig& config) {
  config.Validate();
  const int frame_size = config.FrameSize();
  const int shift = config.ShiftSize();
  const int64_t len = static_cast<int64_t>(samples.size());
  if (len < frame_size)
    throw DomainError("frame_and_window: " + std::to_string(len) +
                      " samples is shorter than one frame (" +
                      std::to_string(frame_size) + ")");
  const int64_t num_frames = 1 + (len - frame_size) / shift;

  Vector window(frame_size);
  for (int i = 0; i < frame_size; ++i)
    window(i) = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (frame_size - 1));

  Matrix frames(num_frames, frame_size);
  Vector frame(frame_size);
  for (int64_t t = 0; t < num_frames; ++t) {
    const int64_t offset = t * shift;
    for (int i = 0; i < frame_size; ++i)
      frame(i) = static_cast<double>(samples[offset + i]);
    for (int i = frame_size - 1; i > 0; --i)
      frame(i) -= config.preemphasis * frame(i - 1);
    frame(0) -= config.preemphasis * frame(0);
    frames.row(t) = (frame.array() * window.array()).transpose();
  }
  return frames;
}

Matrix PowerSpectrum(const Matrix& frames, int fft_size) {
  if (frames.cols() > fft_size)
    throw DomainError("power_spectrum: frame width " +
                      std::to_string(frames.cols()) + " exceeds fft size " +
                      std::to_string(fft_size));
  const Fft fft(fft_size);
  const int num_bins = fft_size / 2 + 1;
  Matrix spectra(frames.rows(), num_bins);
  std::vector<double> re(fft_size), im(fft_size);
  for (int64_t t = 0; t < frames.rows(); ++t) {
    std::fill(re.begin(), re.end(), 0.0);
    std::fill(im.begin(), im.end(), 0.0);
    for (int64_t i = 0; i < frames.cols(); ++i) re[i] = frames(t, i);
    fft.Forward(re.data(), im.data());
    for (int k = 0; k < num_bins; ++k)
      spectra(t, k) = re[k] * re[k] + im[k] * im[k];
  }
  return spectra;
}

MelFilterbank BuildFilterbank(const FrontendConfig& config,
                              double warp_factor) {
  config.Validate();
  if (!(warp_factor >= 0.5 && warp_factor <= 2.0))
    throw DomainError("build_filterbank: warp factor " +
                      std::to_string(warp_factor) +
                      " outside [0.5, 2.0]");
  const int num_bins = config.fft_size / 2 + 1;
  const double mel_lo = MelScale(config.low_freq);
  const double mel_hi = MelScale(config.high_freq);
  const double mel_step = (mel_hi - mel_lo) / (config.num_mel_bins + 1);

  MelFilterbank bank;
  bank.warp_factor = warp_factor;
  bank.filters = Matrix::Zero(config.num_mel_bins, num_bins);
  for (int k = 0; k < num_bins; ++k) {
    const double freq =
        static_cast<double>(k) * config.sample_rate / config.fft_size;
    const double mel = MelScale(WarpFrequency(freq, warp_factor, config));
    for (int m = 0; m < config.num_mel_bins; ++m) {
      const double left = mel_lo + m * mel_step;
      const double center = left + mel_step;
      const double right = center + mel_step;
      double weight = 0.0;
      if (mel > left && mel <= center) {
        weight = (mel - left) / mel_step;
      } else if (mel > center && mel < right) {
        weight = (right - mel) / mel_step;
      }
      bank.filters(m, k) = weight;
    }
  }
  return bank;
}

Matrix DctMatrix(int rows, int cols) {
  if (rows < 1 || cols < 1 || rows > cols)
    throw DomainError("dct: need 1 <= rows <= cols");
  Matrix dct(rows, cols);
  const double scale = std::sqrt(2.0 / cols);
  for (int k = 0; k < rows; ++k)
    for (int m = 0; m < cols; ++m)
      dct(k, m) = scale * std::cos(M_PI * k * (m + 0.5) / cols);
  dct.row(0) *= std::sqrt(0.5);
  return dct;
}

FeatureSequence Mfcc(const Matrix& power_spectra, const MelFilterbank& bank,
                     const FrontendConfig& config) {
  if (power_spectra.cols() != bank.filters.cols())
    throw DomainError("mfcc: spectrum has " +
                      std::to_string(power_spectra.cols()) +
                      " bins but the filterbank expects " +
                      std::to_string(bank.filters.cols()));
  constexpr double kEnergyFloor = 1e-10;
  Matrix energies = power_spectra * bank.filters.transpose();
  energies = energies.cwiseMax(kEnergyFloor).array().log().matrix();
  const Matrix dct = DctMatrix(config.num_ceps, config.num_mel_bins);
  FeatureSequence out;
  out.frames = (energies * dct.transpose()).cast<float>();
  out.frame_shift = config.frame_shift;
  out.frame_length = config.frame_length;
  return out;
}

FeatureSequence AddDeltas(const FeatureSequence& features, int window) {
  if (window < 1) throw DomainError("add_deltas: window must be >= 1");
  if (features.NumFrames() < 1)
    throw DomainError("add_deltas: empty feature sequence");
  const int64_t T = features.NumFrames();
  const int64_t D = features.Dim();

  double denom = 0.0;
  for (int k = 1; k <= window; ++k) denom += static_cast<double>(k) * k;
  denom *= 2.0;

  Matrix x = features.frames.cast<double>();
  auto delta = [&](const Matrix& in) {
    Matrix out(T, D);
    for (int64_t t = 0; t < T; ++t) {
      Vector acc = Vector::Zero(D);
      for (int k = 1; k <= window; ++k) {
        const int64_t fwd = std::min<int64_t>(t + k, T - 1);
        const int64_t bwd = std::max<int64_t>(t - k, 0);
        acc += k * (in.row(fwd) - in.row(bwd)).transpose();
      }
      out.row(t) = (acc / denom).transpose();
    }
    return out;
  };

  const Matrix d1 = delta(x);
  const Matrix d2 = delta(d1);
  FeatureSequence out;
  out.utterance_id = features.utterance_id;
  out.frame_shift = features.frame_shift;
  out.frame_length = features.frame_length;
  out.frames.resize(T, 3 * D);
  out.frames.leftCols(D) = features.frames;
  out.frames.middleCols(D, D) = d1.cast<float>();
  out.frames.rightCols(D) = d2.cast<float>();
  return out;
}

void CmnPerSpeaker(std::vector<FeatureSequence>* archive,
                   const UtteranceManifest& manifest) {
  if (archive->empty()) return;
  const int64_t dim = (*archive)[0].Dim();
  std::unordered_map<std::string, size_t> position;
  for (size_t i = 0; i < archive->size(); ++i) {
    const FeatureSequence& s = (*archive)[i];
    if (s.Dim() != dim)
      throw DomainError("cmn: utterance '" + s.utterance_id +
                        "' has dim " + std::to_string(s.Dim()) +
                        ", expected " + std::to_string(dim));
    manifest.Find(s.utterance_id);  // throws on unknown utterances
    position[s.utterance_id] = i;
  }

  // Accumulate in manifest order so the sums never depend on how the
  // archive happened to be assembled.
  std::unordered_map<std::string, std::pair<Vector, int64_t>> stats;
  for (const ManifestEntry& e : manifest.entries()) {
    auto it = position.find(e.utterance_id);
    if (it == position.end()) continue;
    const FeatureSequence& s = (*archive)[it->second];
    auto entry = stats.try_emplace(e.speaker_id, Vector::Zero(dim), 0).first;
    entry->second.first +=
        s.frames.cast<double>().colwise().sum().transpose();
    entry->second.second += s.NumFrames();
  }

  for (FeatureSequence& s : *archive) {
    const auto& [sum, count] = stats.at(manifest.Find(s.utterance_id).speaker_id);
    if (count == 0) continue;
    const Eigen::RowVectorXf mean =
        (sum / static_cast<double>(count)).transpose().cast<float>();
    s.frames.rowwise() -= mean;
  }
}

FeatureSequence ComputeMfcc(const std::vector<float>& samples, int sample_rate,
                            const FrontendConfig& config, double warp_factor,
                            const std::string& utterance_id) {
  if (sample_rate != config.sample_rate)
    throw DomainError("utterance '" + utterance_id + "' is sampled at " +
                      std::to_string(sample_rate) + " Hz, config expects " +
                      std::to_string(config.sample_rate));
  const Matrix frames = FrameAndWindow(samples, config);
  const Matrix spectra = PowerSpectrum(frames, config.fft_size);
  const MelFilterbank bank = BuildFilterbank(config, warp_factor);
  FeatureSequence features = Mfcc(spectra, bank, config);
  features.utterance_id = utterance_id;
  return features;
}

}  // namespace zrkit
