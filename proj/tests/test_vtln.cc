// tests/test_vtln.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_support.h"
#include "zrkit/error.h"
#include "zrkit/io.h"
#include "zrkit/rng.h"
#include "zrkit/vtln.h"

namespace zrkit {
namespace {

// Crude vowel-like source: harmonics of f0 shaped by Gaussian formant
// envelopes. A stationary segment alone makes degenerate features, so
// utterances below are built from several jittered segments.
std::vector<double> SynthSegment(double f0, const std::vector<double>& formants,
                                 int n, int sample_rate, Rng* rng) {
  std::vector<double> wave(n, 0.0);
  for (double freq = f0; freq < 7000.0; freq += f0) {
    double amp = 0.0;
    for (const double formant : formants)
      amp += std::exp(-std::pow((freq - formant) / 250.0, 2));
    if (amp < 1e-4) continue;
    const double phase = rng->Uniform(0.0, 2.0 * M_PI);
    const double omega = 2.0 * M_PI * freq / sample_rate;
    for (int t = 0; t < n; ++t) wave[t] += amp * std::sin(omega * t + phase);
  }
  double peak = 1e-9;
  for (const double v : wave) peak = std::max(peak, std::abs(v));
  const double gain = 0.5 * rng->Uniform(0.6, 1.0) / peak;
  for (double& v : wave) v *= gain;
  return wave;
}

std::vector<float> SynthUtterance(
    double f0_base, const std::vector<std::vector<double>>& vowels,
    double seconds, int sample_rate, Rng* rng) {
  const size_t total = static_cast<size_t>(seconds * sample_rate);
  std::vector<float> out;
  out.reserve(total);
  while (out.size() < total) {
    const int n = static_cast<int>(std::min<size_t>(
        static_cast<size_t>(rng->Uniform(0.08, 0.15) * sample_rate),
        total - out.size()));
    if (n < 32) break;
    std::vector<double> formants =
        vowels[rng->UniformInt(vowels.size())];
    for (double& f : formants) f *= rng->Uniform(0.96, 1.04);
    const double f0 = f0_base * rng->Uniform(0.9, 1.1);
    for (const double v : SynthSegment(f0, formants, n, sample_rate, rng))
      out.push_back(static_cast<float>(v + 0.003 * rng->Normal()));
  }
  while (out.size() < total)
    out.push_back(static_cast<float>(0.003 * rng->Normal()));
  return out;
}

// Two speakers x three utterances of synthetic audio in a temp dir.
UtteranceManifest BuildCorpus(const testing::TempDir& dir,
                              const FrontendConfig& config) {
  Rng rng(2026);
  std::vector<ManifestEntry> entries;
  const std::vector<std::vector<std::vector<double>>> vowels = {
      {{500, 1500, 2500}, {300, 900, 2300}, {700, 1200, 2600}},
      {{650, 1800, 2900}, {400, 1100, 2700}, {850, 1400, 3100}}};
  const double f0s[2] = {120.0, 210.0};
  for (int s = 0; s < 2; ++s) {
    for (int u = 0; u < 3; ++u) {
      ManifestEntry e;
      e.speaker_id = "spk" + std::to_string(s);
      e.utterance_id = e.speaker_id + "_utt" + std::to_string(u);
      e.audio_path = dir.Path(e.utterance_id + ".wav");
      Rng voice = rng.Fork(e.utterance_id);
      WriteWav(e.audio_path,
               SynthUtterance(f0s[s], vowels[s], 0.6, config.sample_rate,
                              &voice),
               config.sample_rate);
      entries.push_back(e);
    }
  }
  return UtteranceManifest(entries);
}

Matrix StackArchive(const std::vector<FeatureSequence>& archive) {
  int64_t total = 0;
  for (const FeatureSequence& s : archive) total += s.NumFrames();
  Matrix stacked(total, archive.front().Dim());
  int64_t row = 0;
  for (const FeatureSequence& s : archive) {
    stacked.middleRows(row, s.NumFrames()) = s.frames.cast<double>();
    row += s.NumFrames();
  }
  return stacked;
}

DiagonalGmm TrainCorpusUbm(const UtteranceManifest& manifest,
                           const FrontendConfig& config) {
  const std::vector<FeatureSequence> archive =
      ApplyVtln(manifest, IdentityWarpTable(manifest), config);
  VtlnConfig vtln;
  vtln.num_components = 8;
  vtln.em_iterations = 8;
  return TrainUbm(StackArchive(archive), vtln, 17).gmm;
}

bool BitEqualArchive(const std::vector<FeatureSequence>& a,
                     const std::vector<FeatureSequence>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].utterance_id != b[i].utterance_id ||
        a[i].frames.rows() != b[i].frames.rows() ||
        a[i].frames.cols() != b[i].frames.cols())
      return false;
    if (std::memcmp(a[i].frames.data(), b[i].frames.data(),
                    sizeof(float) * a[i].frames.size()) != 0)
      return false;
  }
  return true;
}

TEST_CASE("warp table lookup and errors") {
  WarpTable table;
  table.warps["alice"] = 1.04;
  table.warps["bob"] = 0.92;
  CHECK(table.Get("alice") == 1.04);
  CHECK(table.Get("bob") == 0.92);
  CHECK_THROWS_WITH_AS(table.Get("carol"), doctest::Contains("carol"),
                       DomainError);
}

TEST_CASE("warp table round trips exactly through text") {
  WarpTable table;
  table.warps["spk_b"] = 0.94;
  table.warps["spk_a"] = 1.0;
  table.warps["spk_c"] = 1.0 + 1.0 / 3.0;  // needs all 17 digits
  testing::TempDir dir;
  const std::string path = dir.Path("warps.tsv");
  SaveWarpTable(path, table);
  const WarpTable loaded = LoadWarpTable(path);
  REQUIRE(loaded.warps.size() == 3);
  CHECK(loaded.warps.at("spk_a") == 1.0);
  CHECK(loaded.warps.at("spk_b") == 0.94);
  CHECK(loaded.warps.at("spk_c") == 1.0 + 1.0 / 3.0);

  // Sorted speaker ids, tab separated, shortest exact decimals.
  const std::vector<uint8_t> bytes = testing::ReadBytes(path);
  const std::string text(reinterpret_cast<const char*>(bytes.data()),
                         bytes.size());
  CHECK(text == "spk_a\t1\nspk_b\t0.94\nspk_c\t1.3333333333333333\n");
}

TEST_CASE("warp table rejects malformed files") {
  testing::TempDir dir;
  const std::string path = dir.Path("warps.tsv");

  testing::WriteText(path, "spk_a\n");
  CHECK_THROWS_WITH_AS(LoadWarpTable(path), doctest::Contains("2 fields"),
                       IoError);
  testing::WriteText(path, "spk_a\t1.0\textra\n");
  CHECK_THROWS_AS(LoadWarpTable(path), IoError);
  testing::WriteText(path, "spk_a\tfast\n");
  CHECK_THROWS_AS(LoadWarpTable(path), IoError);
  testing::WriteText(path, "spk_a\t0.3\n");
  CHECK_THROWS_WITH_AS(LoadWarpTable(path), doctest::Contains("[0.5, 2.0]"),
                       IoError);
  testing::WriteText(path, "spk_a\t1.0\nspk_a\t1.1\n");
  CHECK_THROWS_WITH_AS(LoadWarpTable(path), doctest::Contains("duplicate"),
                       IoError);
  CHECK_THROWS_AS(LoadWarpTable(dir.Path("absent.tsv")), IoError);
}

TEST_CASE("identity warp table covers every speaker") {
  std::vector<ManifestEntry> entries(3);
  entries[0] = {"u1", "spkB", "a.wav"};
  entries[1] = {"u2", "spkA", "b.wav"};
  entries[2] = {"u3", "spkB", "c.wav"};
  const WarpTable table = IdentityWarpTable(UtteranceManifest(entries));
  REQUIRE(table.warps.size() == 2);
  CHECK(table.Get("spkA") == 1.0);
  CHECK(table.Get("spkB") == 1.0);
}

TEST_CASE("vtln pipeline on a synthetic corpus") {
  const FrontendConfig config;
  testing::TempDir dir;
  const UtteranceManifest manifest = BuildCorpus(dir, config);
  const DiagonalGmm ubm = TrainCorpusUbm(manifest, config);

  SUBCASE("identity apply matches the plain frontend bit for bit") {
    const std::vector<FeatureSequence> warped =
        ApplyVtln(manifest, IdentityWarpTable(manifest), config);
    std::vector<FeatureSequence> plain;
    for (const ManifestEntry& e : manifest.entries()) {
      const WavData wav = ReadWav(e.audio_path);
      plain.push_back(AddDeltas(ComputeMfcc(wav.samples, wav.sample_rate,
                                            config, 1.0, e.utterance_id)));
    }
    CmnPerSpeaker(&plain, manifest);
    CHECK(BitEqualArchive(warped, plain));
  }

  SUBCASE("archive is aligned with the manifest") {
    const std::vector<FeatureSequence> warped =
        ApplyVtln(manifest, IdentityWarpTable(manifest), config, 2);
    REQUIRE(warped.size() == manifest.entries().size());
    for (size_t i = 0; i < warped.size(); ++i) {
      CHECK(warped[i].utterance_id == manifest.entries()[i].utterance_id);
      CHECK(warped[i].Dim() == 39);
      CHECK(warped[i].NumFrames() > 0);
    }
  }

  SUBCASE("non-identity warps change every utterance") {
    WarpTable table;
    table.warps["spk0"] = 0.9;
    table.warps["spk1"] = 1.1;
    const std::vector<FeatureSequence> warped =
        ApplyVtln(manifest, table, config);
    const std::vector<FeatureSequence> plain =
        ApplyVtln(manifest, IdentityWarpTable(manifest), config);
    for (size_t i = 0; i < warped.size(); ++i) {
      const double diff =
          (warped[i].frames - plain[i].frames).cwiseAbs().maxCoeff();
      CHECK(diff > 1e-4);
    }
  }

  SUBCASE("apply is independent of jobs") {
    WarpTable table;
    table.warps["spk0"] = 0.94;
    table.warps["spk1"] = 1.06;
    CHECK(BitEqualArchive(ApplyVtln(manifest, table, config, 1),
                          ApplyVtln(manifest, table, config, 3)));
  }

  SUBCASE("apply requires a warp for every speaker") {
    WarpTable table;
    table.warps["spk0"] = 1.0;
    CHECK_THROWS_WITH_AS(ApplyVtln(manifest, table, config),
                         doctest::Contains("spk1"), DomainError);
  }

  SUBCASE("speakers matching the ubm training data pick the identity warp") {
    VtlnConfig vtln;
    vtln.warp_grid = {0.9, 1.0, 1.1};
    const WarpTable table = EstimateWarps(manifest, ubm, config, vtln);
    REQUIRE(table.warps.size() == 2);
    CHECK(table.Get("spk0") == 1.0);
    CHECK(table.Get("spk1") == 1.0);
  }

  SUBCASE("singleton grid maps every speaker to 1.0") {
    VtlnConfig vtln;
    vtln.warp_grid = {1.0};
    const WarpTable table = EstimateWarps(manifest, ubm, config, vtln);
    for (const std::string& speaker : manifest.Speakers())
      CHECK(table.Get(speaker) == 1.0);
  }

  SUBCASE("estimate is invariant to speaker order and jobs") {
    VtlnConfig vtln;
    vtln.warp_grid = {0.9, 1.0, 1.1};
    const WarpTable a = EstimateWarps(manifest, ubm, config, vtln, 1);

    // Same utterance order within each speaker, speakers swapped.
    std::vector<ManifestEntry> swapped;
    for (const ManifestEntry& e : manifest.entries())
      if (e.speaker_id == "spk1") swapped.push_back(e);
    for (const ManifestEntry& e : manifest.entries())
      if (e.speaker_id == "spk0") swapped.push_back(e);
    const WarpTable b =
        EstimateWarps(UtteranceManifest(swapped), ubm, config, vtln, 1);
    CHECK(a.warps == b.warps);

    const WarpTable c = EstimateWarps(manifest, ubm, config, vtln, 2);
    CHECK(a.warps == c.warps);

    // Every selected warp is a grid member.
    for (const auto& [speaker, alpha] : a.warps) {
      (void)speaker;
      CHECK((alpha == 0.9 || alpha == 1.0 || alpha == 1.1));
    }
  }

  SUBCASE("estimate validates its inputs") {
    VtlnConfig vtln;
    vtln.warp_grid = {0.9, 1.0, 1.1};
    DiagonalGmm narrow;
    narrow.weights = Vector::Ones(1);
    narrow.means = Matrix::Zero(1, 5);
    narrow.variances = Matrix::Ones(1, 5);
    CHECK_THROWS_WITH_AS(EstimateWarps(manifest, narrow, config, vtln),
                         doctest::Contains("dimension"), DomainError);
    CHECK_THROWS_AS(
        EstimateWarps(UtteranceManifest(std::vector<ManifestEntry>()), ubm,
                      config, vtln),
        DomainError);
  }

  SUBCASE("sample rate mismatches are rejected") {
    std::vector<ManifestEntry> entries = manifest.entries();
    ManifestEntry slow;
    slow.utterance_id = "slow_utt";
    slow.speaker_id = "spk0";
    slow.audio_path = dir.Path("slow.wav");
    Rng rng(7);
    WriteWav(slow.audio_path,
             SynthUtterance(120.0, {{500.0, 1500.0}}, 0.2, 8000, &rng), 8000);
    entries.push_back(slow);
    const UtteranceManifest bad(entries);
    VtlnConfig vtln;
    vtln.warp_grid = {1.0};
    CHECK_THROWS_WITH_AS(EstimateWarps(bad, ubm, config, vtln),
                         doctest::Contains("8000"), DomainError);
    CHECK_THROWS_AS(ApplyVtln(bad, IdentityWarpTable(bad), config),
                    DomainError);
  }
}

}  // namespace
}  // namespace zrkit
