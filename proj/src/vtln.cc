// src/vtln.cc

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

#include "zrkit/vtln.h"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "zrkit/error.h"
#include "zrkit/io.h"
#include "zrkit/parallel.h"

namespace zrkit {

namespace {

// Shortest exact decimal form of a double (round-trips bit-exactly).
std::string FormatAlpha(double alpha) {
  char buffer[32];
  const auto res = std::to_chars(buffer, buffer + sizeof(buffer), alpha);
  return std::string(buffer, res.ptr);
}

// Stacks a speaker's normalized feature sequences into one double matrix
// for UBM scoring.
Matrix StackFrames(const std::vector<FeatureSequence>& seqs) {
  int64_t total = 0;
  for (const FeatureSequence& s : seqs) total += s.NumFrames();
  Matrix stacked(total, seqs.empty() ? 0 : seqs.front().Dim());
  int64_t row = 0;
  for (const FeatureSequence& s : seqs) {
    stacked.middleRows(row, s.NumFrames()) = s.frames.cast<double>();
    row += s.NumFrames();
  }
  return stacked;
}

}  // namespace

double WarpTable::Get(const std::string& speaker_id) const {
  const auto it = warps.find(speaker_id);
  if (it == warps.end())
    throw DomainError("warp table: no entry for speaker '" + speaker_id + "'");
  return it->second;
}

void SaveWarpTable(const std::string& path, const WarpTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create file '" + path + "'");
  for (const auto& [speaker, alpha] : table.warps)
    out << speaker << '\t' << FormatAlpha(alpha) << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

WarpTable LoadWarpTable(const std::string& path) {
  WarpTable table;
  for (const auto& [number, line] : ReadContentLines(path)) {
    const std::string context = path + ":" + std::to_string(number);
    const std::vector<std::string> fields = SplitWhitespace(line);
    if (fields.size() != 2)
      throw IoError(context + ": expected 2 fields (speaker_id alpha), got " +
                    std::to_string(fields.size()));
    const double alpha = ParseDouble(fields[1], context);
    if (!(alpha >= 0.5 && alpha <= 2.0))
      throw IoError(context + ": warp factor " + fields[1] +
                    " outside [0.5, 2.0]");
    if (!table.warps.emplace(fields[0], alpha).second)
      throw IoError(context + ": duplicate speaker '" + fields[0] + "'");
  }
  return table;
}

WarpTable IdentityWarpTable(const UtteranceManifest& manifest) {
  WarpTable table;
  for (const std::string& speaker : manifest.Speakers())
    table.warps[speaker] = 1.0;
  return table;
}

WarpTable EstimateWarps(const UtteranceManifest& manifest,
                        const DiagonalGmm& ubm, const FrontendConfig& config,
                        const VtlnConfig& vtln, int jobs) {
  config.Validate();
  vtln.Validate();
  ubm.Validate();
  if (ubm.Dim() != 3 * config.num_ceps)
    throw DomainError("vtln: UBM dimension " + std::to_string(ubm.Dim()) +
                      " does not match feature dimension " +
                      std::to_string(3 * config.num_ceps));
  if (manifest.entries().empty()) throw DomainError("vtln: empty manifest");

  // Filterbanks are the only alpha-dependent stage; build each once.
  std::vector<MelFilterbank> banks;
  banks.reserve(vtln.warp_grid.size());
  for (const double alpha : vtln.warp_grid)
    banks.push_back(BuildFilterbank(config, alpha));

  const std::vector<std::string> speakers = manifest.Speakers();
  std::vector<double> chosen(speakers.size(), 1.0);
  ParallelFor(static_cast<int64_t>(speakers.size()), jobs, [&](int64_t s) {
    const std::string& speaker = speakers[s];
    // Power spectra are warp-independent; cache them per utterance.
    std::vector<ManifestEntry> speaker_entries;
    std::vector<Matrix> spectra;
    int64_t total_frames = 0;
    for (const ManifestEntry& e : manifest.entries()) {
      if (e.speaker_id != speaker) continue;
      const WavData wav = ReadWav(e.audio_path);
      if (wav.sample_rate != config.sample_rate)
        throw DomainError("vtln: utterance '" + e.utterance_id + "' has " +
                          std::to_string(wav.sample_rate) +
                          " Hz audio, config expects " +
                          std::to_string(config.sample_rate));
      const Matrix frames = FrameAndWindow(wav.samples, config);
      speaker_entries.push_back(e);
      spectra.push_back(PowerSpectrum(frames, config.fft_size));
      total_frames += frames.rows();
    }
    if (total_frames == 0)
      throw DomainError("vtln: speaker '" + speaker + "' has no frames");
    const UtteranceManifest speaker_manifest(speaker_entries);

    double best_alpha = 0.0;
    double best_score = 0.0;
    bool have_best = false;
    for (size_t g = 0; g < vtln.warp_grid.size(); ++g) {
      const double alpha = vtln.warp_grid[g];
      std::vector<FeatureSequence> seqs;
      seqs.reserve(speaker_entries.size());
      for (size_t u = 0; u < speaker_entries.size(); ++u) {
        FeatureSequence mf = Mfcc(spectra[u], banks[g], config);
        mf.utterance_id = speaker_entries[u].utterance_id;
        seqs.push_back(AddDeltas(mf));
      }
      CmnPerSpeaker(&seqs, speaker_manifest);
      const double score = AverageLogLikelihood(ubm, StackFrames(seqs), 1);
      const bool better =
          !have_best || score > best_score ||
          (score == best_score &&
           (std::abs(alpha - 1.0) < std::abs(best_alpha - 1.0) ||
            (std::abs(alpha - 1.0) == std::abs(best_alpha - 1.0) &&
             alpha < best_alpha)));
      if (better) {
        best_alpha = alpha;
        best_score = score;
        have_best = true;
      }
    }
    chosen[s] = best_alpha;
  });

  WarpTable table;
  for (size_t s = 0; s < speakers.size(); ++s)
    table.warps[speakers[s]] = chosen[s];
  return table;
}

std::vector<FeatureSequence> ApplyVtln(const UtteranceManifest& manifest,
                                       const WarpTable& warps,
                                       const FrontendConfig& config,
                                       int jobs) {
  config.Validate();
  if (manifest.entries().empty()) throw DomainError("vtln: empty manifest");
  // Fail before any audio work if a speaker is missing from the table.
  for (const std::string& speaker : manifest.Speakers()) warps.Get(speaker);

  const int64_t n = static_cast<int64_t>(manifest.entries().size());
  std::vector<FeatureSequence> archive(n);
  ParallelFor(n, jobs, [&](int64_t i) {
    const ManifestEntry& e = manifest.entries()[i];
    const WavData wav = ReadWav(e.audio_path);
    archive[i] = AddDeltas(ComputeMfcc(wav.samples, wav.sample_rate, config,
                                       warps.Get(e.speaker_id),
                                       e.utterance_id));
  });
  CmnPerSpeaker(&archive, manifest);
  return archive;
}

}  // namespace zrkit
