// include/zrkit/pairs.h

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

// Segment inventories from word alignments, same-word / same-different pair
// construction, and DTW-aligned frame pairs for correspondence training.

#ifndef ZRKIT_PAIRS_H_
#define ZRKIT_PAIRS_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "zrkit/types.h"

namespace zrkit {

// Random access into a feature archive for slicing segments out of it.
// Holds a pointer to the archive, which must outlive the index. Rejects
// duplicate utterance ids and dimension disagreements up front.
class ArchiveIndex {
 public:
  explicit ArchiveIndex(const std::vector<FeatureSequence>& archive);

  // The dimension shared by every record; 0 for an empty archive.
  int64_t Dim() const { return dim_; }
  const FeatureSequence& Find(const std::string& utterance_id) const;
  // Rows [start_frame, end_frame) of the segment's utterance.
  FloatMatrix Slice(const SegmentRecord& segment) const;

 private:
  const std::vector<FeatureSequence>* archive_;
  std::unordered_map<std::string, size_t> index_;
  int64_t dim_ = 0;
};

struct PairConstraints {
  int min_chars = 5;          // Unicode scalar values of the folded word
  double min_duration = 0.5;  // seconds

  void Validate() const;  // both must be > 0
};

// Word tokens passing both constraints, in alignment order, with the
// speaker attached from the manifest and times mapped onto the frame grid
// (floor for starts, ceil for ends). A 1e-9 s slack keeps durations that
// are exactly at the threshold from being dropped by parsing noise.
std::vector<SegmentRecord> SelectSegments(
    const std::vector<WordAlignmentEntry>& alignments,
    const UtteranceManifest& manifest, const PairConstraints& constraints,
    double frame_shift = 0.010);

// All unordered pairs of distinct segments sharing a word (the gold
// training pairs), categorized SW-SP or SW-DP. Each pair is stored in
// canonical order: lexicographic by (utterance_id, start_frame, end_frame).
std::vector<SegmentPair> MakeGoldPairs(
    const std::vector<SegmentRecord>& segments);

struct EvalPairCounts {
  int64_t same_word = 0;  // = same_word_same_speaker + same_word_diff_speaker
  int64_t same_word_same_speaker = 0;
  int64_t same_word_diff_speaker = 0;
  int64_t different_word = 0;
};

// All C(n,2) unordered pairs with categories, for same-different
// evaluation. Needs >= 2 segments; refuses sets beyond 10^7 pairs (such
// sets are evaluated by streaming counts instead of materializing).
std::vector<SegmentPair> MakeEvalPairs(
    const std::vector<SegmentRecord>& segments,
    EvalPairCounts* counts = nullptr);

// Discovered fragment pairs as segment pairs with unknown word (category
// UTD). Fragments shorter than 2 frames drop the whole pair; the number of
// dropped pairs is reported through dropped (may be null).
std::vector<SegmentPair> UtdPairsToSegmentPairs(
    const std::vector<UtdPairEntry>& entries,
    const UtteranceManifest& manifest, double frame_shift = 0.010,
    int64_t* dropped = nullptr);

// DTW-aligned frame pairs: inputs.row(k) is presented to the network with
// targets.row(k) as its reconstruction target.
struct FramePairSet {
  uint64_t seed = 0;   // shuffle seed, recorded for reproducibility
  FloatMatrix inputs;  // N x D
  FloatMatrix targets;  // N x D

  int64_t NumPairs() const { return inputs.rows(); }
  int64_t Dim() const { return inputs.cols(); }
};

// For each segment pair, aligns the two feature slices with DTW and emits
// (a_i, b_j) and (b_j, a_i) for every path step; pair outputs are
// concatenated in input order and shuffled with the given seed, so the
// result is independent of jobs. Frame-pair count = 2 * total path length.
FramePairSet ExtractFramePairs(const std::vector<SegmentPair>& pairs,
                               const std::vector<FeatureSequence>& archive,
                               uint64_t seed, int jobs = 1);

// Frame pairs persisted in the feature-archive container as two reserved
// records __inputs__ and __targets__; the shuffle seed rides in the
// __inputs__ timing fields (two exact 32-bit halves).
void SaveFramePairs(const std::string& path, const FramePairSet& set);
FramePairSet LoadFramePairs(const std::string& path);

// Tab-separated text, one record per line:
//   utterance_id speaker_id word start_frame end_frame
void SaveSegments(const std::string& path,
                  const std::vector<SegmentRecord>& segments);
std::vector<SegmentRecord> LoadSegments(const std::string& path);

// Tab-separated text, one pair per line:
//   category then both segments' five fields. UTD pairs have empty words.
void SaveSegmentPairs(const std::string& path,
                      const std::vector<SegmentPair>& pairs);
std::vector<SegmentPair> LoadSegmentPairs(const std::string& path);

}  // namespace zrkit

#endif  // ZRKIT_PAIRS_H_
