// include/zrkit/types.h

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

#ifndef ZRKIT_TYPES_H_
#define ZRKIT_TYPES_H_

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace zrkit {

// Frames are rows; row-major so a frame is contiguous and the layout matches
// the on-disk archive. Storage is float32 at module boundaries, double inside
// numeric kernels.
using FloatMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Per-utterance T x D feature matrix with frame timing metadata. The
// universal currency between modules.
struct FeatureSequence {
  std::string utterance_id;
  FloatMatrix frames;  // T x D
  double frame_shift = 0.010;
  double frame_length = 0.025;

  int64_t NumFrames() const { return frames.rows(); }
  int64_t Dim() const { return frames.cols(); }
};

struct ManifestEntry {
  std::string utterance_id;
  std::string speaker_id;
  std::string audio_path;
};

class UtteranceManifest {
 public:
  UtteranceManifest() = default;
  explicit UtteranceManifest(std::vector<ManifestEntry> entries);

  const std::vector<ManifestEntry>& entries() const { return entries_; }
  bool Contains(const std::string& utterance_id) const;
  // Throws DomainError if the utterance is unknown.
  const ManifestEntry& Find(const std::string& utterance_id) const;
  // Speakers in first-appearance (manifest) order, deduplicated.
  std::vector<std::string> Speakers() const;

 private:
  std::vector<ManifestEntry> entries_;
  std::unordered_map<std::string, size_t> index_;
};

// One word token from a forced alignment. Times are seconds; words are
// stored case-folded.
struct WordAlignmentEntry {
  std::string utterance_id;
  std::string word;
  double start = 0.0;
  double end = 0.0;
};

// One discovered fragment pair from a UTD system. Times are seconds.
struct UtdPairEntry {
  std::string utt_a;
  std::string utt_b;
  double start_a = 0.0, end_a = 0.0;
  double start_b = 0.0, end_b = 0.0;
  double score = 0.0;
};

enum class PairCategory {
  kSameWordSameSpeaker,
  kSameWordDifferentSpeaker,
  kDifferentWord,
  kUtd,  // word identity unknown (UTD-discovered pair)
};

const char* PairCategoryName(PairCategory c);
PairCategory ParsePairCategory(const std::string& name);

// A word token resolved to a frame span.
struct SegmentRecord {
  std::string utterance_id;
  std::string speaker_id;
  std::string word;
  int64_t start_frame = 0;
  int64_t end_frame = 0;  // exclusive

  int64_t NumFrames() const { return end_frame - start_frame; }
};

struct SegmentPair {
  SegmentRecord a;
  SegmentRecord b;
  PairCategory category = PairCategory::kDifferentWord;
};

// Maps seconds to a frame index on the analysis grid. Uses the mathematical
// floor/ceil of the real quotient; the epsilon absorbs IEEE parsing noise
// (1.10 / 0.01 evaluates to 110.00000000000001, which must stay frame 110).
int64_t StartFrameIndex(double seconds, double frame_shift);
int64_t EndFrameIndex(double seconds, double frame_shift);

}  // namespace zrkit

#endif  // ZRKIT_TYPES_H_
