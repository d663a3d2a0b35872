// src/pairs.cc

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

#include "zrkit/pairs.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "zrkit/dtw.h"
#include "zrkit/error.h"
#include "zrkit/io.h"
#include "zrkit/parallel.h"
#include "zrkit/rng.h"
#include "zrkit/text.h"

namespace zrkit {

namespace {

constexpr int64_t kMaxMaterializedPairs = 10'000'000;
// Slack for durations that sit exactly on the threshold after text parsing.
constexpr double kDurationEpsilon = 1e-9;

bool SegmentLess(const SegmentRecord& x, const SegmentRecord& y) {
  if (x.utterance_id != y.utterance_id)
    return x.utterance_id < y.utterance_id;
  if (x.start_frame != y.start_frame) return x.start_frame < y.start_frame;
  return x.end_frame < y.end_frame;
}

SegmentPair CanonicalPair(const SegmentRecord& a, const SegmentRecord& b,
                          PairCategory category) {
  SegmentPair pair;
  pair.category = category;
  if (SegmentLess(b, a)) {
    pair.a = b;
    pair.b = a;
  } else {
    pair.a = a;
    pair.b = b;
  }
  return pair;
}

PairCategory Categorize(const SegmentRecord& a, const SegmentRecord& b) {
  if (a.word != b.word) return PairCategory::kDifferentWord;
  return a.speaker_id == b.speaker_id
             ? PairCategory::kSameWordSameSpeaker
             : PairCategory::kSameWordDifferentSpeaker;
}

// Strict tab split keeping empty fields (UTD pairs carry empty words).
std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t begin = 0;
  while (true) {
    const size_t tab = line.find('\t', begin);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(begin));
      return fields;
    }
    fields.push_back(line.substr(begin, tab - begin));
    begin = tab + 1;
  }
}

SegmentRecord ParseSegmentFields(const std::string* fields,
                                 const std::string& context) {
  SegmentRecord s;
  s.utterance_id = fields[0];
  s.speaker_id = fields[1];
  s.word = fields[2];
  s.start_frame = ParseInt(fields[3], context);
  s.end_frame = ParseInt(fields[4], context);
  if (s.utterance_id.empty() || s.speaker_id.empty())
    throw IoError(context + ": empty utterance or speaker id");
  if (s.start_frame < 0 || s.end_frame <= s.start_frame)
    throw IoError(context + ": invalid frame span [" + fields[3] + ", " +
                  fields[4] + ")");
  return s;
}

void WriteSegmentFields(std::ofstream& out, const SegmentRecord& s) {
  out << s.utterance_id << '\t' << s.speaker_id << '\t' << s.word << '\t'
      << s.start_frame << '\t' << s.end_frame;
}

}  // namespace

ArchiveIndex::ArchiveIndex(const std::vector<FeatureSequence>& archive)
    : archive_(&archive) {
  dim_ = archive.empty() ? 0 : archive.front().Dim();
  for (size_t i = 0; i < archive.size(); ++i) {
    if (archive[i].Dim() != dim_)
      throw DomainError("archive dimensions disagree: '" +
                        archive[i].utterance_id + "' has " +
                        std::to_string(archive[i].Dim()) + " dims, expected " +
                        std::to_string(dim_));
    if (!index_.emplace(archive[i].utterance_id, i).second)
      throw DomainError("duplicate utterance '" + archive[i].utterance_id +
                        "' in the archive");
  }
}

const FeatureSequence& ArchiveIndex::Find(
    const std::string& utterance_id) const {
  const auto it = index_.find(utterance_id);
  if (it == index_.end())
    throw DomainError("utterance '" + utterance_id +
                      "' missing from the archive");
  return (*archive_)[it->second];
}

FloatMatrix ArchiveIndex::Slice(const SegmentRecord& segment) const {
  const FeatureSequence& f = Find(segment.utterance_id);
  if (segment.start_frame < 0 || segment.end_frame > f.NumFrames() ||
      segment.end_frame <= segment.start_frame)
    throw DomainError("segment [" + std::to_string(segment.start_frame) +
                      ", " + std::to_string(segment.end_frame) +
                      ") out of range for '" + segment.utterance_id +
                      "' with " + std::to_string(f.NumFrames()) + " frames");
  return f.frames.middleRows(segment.start_frame, segment.NumFrames());
}

void PairConstraints::Validate() const {
  if (min_chars <= 0) throw DomainError("pair constraints: min_chars <= 0");
  if (min_duration <= 0.0)
    throw DomainError("pair constraints: min_duration <= 0");
}

std::vector<SegmentRecord> SelectSegments(
    const std::vector<WordAlignmentEntry>& alignments,
    const UtteranceManifest& manifest, const PairConstraints& constraints,
    double frame_shift) {
  constraints.Validate();
  if (frame_shift <= 0.0) throw DomainError("select segments: frame_shift <= 0");
  std::vector<SegmentRecord> segments;
  for (const WordAlignmentEntry& e : alignments) {
    const std::string word = CaseFold(e.word);
    if (Utf8Length(word) < constraints.min_chars) continue;
    if (e.end - e.start < constraints.min_duration - kDurationEpsilon)
      continue;
    SegmentRecord s;
    s.utterance_id = e.utterance_id;
    s.speaker_id = manifest.Find(e.utterance_id).speaker_id;
    s.word = word;
    s.start_frame = StartFrameIndex(e.start, frame_shift);
    s.end_frame = EndFrameIndex(e.end, frame_shift);
    segments.push_back(std::move(s));
  }
  return segments;
}

std::vector<SegmentPair> MakeGoldPairs(
    const std::vector<SegmentRecord>& segments) {
  std::unordered_map<std::string, std::vector<size_t>> groups;
  std::vector<std::string> word_order;
  for (size_t i = 0; i < segments.size(); ++i) {
    std::vector<size_t>& group = groups[segments[i].word];
    if (group.empty()) word_order.push_back(segments[i].word);
    group.push_back(i);
  }
  std::vector<SegmentPair> pairs;
  for (const std::string& word : word_order) {
    const std::vector<size_t>& group = groups[word];
    for (size_t i = 0; i < group.size(); ++i)
      for (size_t j = i + 1; j < group.size(); ++j)
        pairs.push_back(CanonicalPair(
            segments[group[i]], segments[group[j]],
            Categorize(segments[group[i]], segments[group[j]])));
  }
  return pairs;
}

std::vector<SegmentPair> MakeEvalPairs(
    const std::vector<SegmentRecord>& segments, EvalPairCounts* counts) {
  const int64_t n = static_cast<int64_t>(segments.size());
  if (n < 2)
    throw DomainError("eval pairs: need at least 2 segments, got " +
                      std::to_string(n));
  const int64_t total = n * (n - 1) / 2;
  if (total > kMaxMaterializedPairs)
    throw DomainError("eval pairs: " + std::to_string(total) +
                      " pairs exceed the materialization cap; stream "
                      "category counts instead");
  std::vector<SegmentPair> pairs;
  pairs.reserve(total);
  EvalPairCounts local;
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = i + 1; j < n; ++j) {
      const PairCategory category = Categorize(segments[i], segments[j]);
      pairs.push_back(CanonicalPair(segments[i], segments[j], category));
      switch (category) {
        case PairCategory::kSameWordSameSpeaker:
          ++local.same_word_same_speaker;
          break;
        case PairCategory::kSameWordDifferentSpeaker:
          ++local.same_word_diff_speaker;
          break;
        default:
          ++local.different_word;
          break;
      }
    }
  }
  local.same_word = local.same_word_same_speaker + local.same_word_diff_speaker;
  if (counts != nullptr) *counts = local;
  return pairs;
}

std::vector<SegmentPair> UtdPairsToSegmentPairs(
    const std::vector<UtdPairEntry>& entries,
    const UtteranceManifest& manifest, double frame_shift, int64_t* dropped) {
  if (frame_shift <= 0.0) throw DomainError("utd pairs: frame_shift <= 0");
  std::vector<SegmentPair> pairs;
  int64_t skipped = 0;
  for (const UtdPairEntry& e : entries) {
    SegmentRecord a;
    a.utterance_id = e.utt_a;
    a.speaker_id = manifest.Find(e.utt_a).speaker_id;
    a.start_frame = StartFrameIndex(e.start_a, frame_shift);
    a.end_frame = EndFrameIndex(e.end_a, frame_shift);
    SegmentRecord b;
    b.utterance_id = e.utt_b;
    b.speaker_id = manifest.Find(e.utt_b).speaker_id;
    b.start_frame = StartFrameIndex(e.start_b, frame_shift);
    b.end_frame = EndFrameIndex(e.end_b, frame_shift);
    if (a.NumFrames() < 2 || b.NumFrames() < 2) {
      ++skipped;
      continue;
    }
    pairs.push_back(CanonicalPair(a, b, PairCategory::kUtd));
  }
  if (dropped != nullptr) *dropped = skipped;
  return pairs;
}

FramePairSet ExtractFramePairs(const std::vector<SegmentPair>& pairs,
                               const std::vector<FeatureSequence>& archive,
                               uint64_t seed, int jobs) {
  const ArchiveIndex index(archive);
  const int64_t dim = index.Dim();

  // Each pair fills its own buffer; concatenation stays in input order.
  std::vector<FloatMatrix> in_parts(pairs.size());
  std::vector<FloatMatrix> tgt_parts(pairs.size());
  ParallelFor(static_cast<int64_t>(pairs.size()), jobs, [&](int64_t p) {
    const FloatMatrix a = index.Slice(pairs[p].a);
    const FloatMatrix b = index.Slice(pairs[p].b);
    const DtwResult result =
        Dtw(NormalizeRows(a), NormalizeRows(b), /*with_path=*/true);
    const std::vector<std::pair<int, int>>& steps = result.path->steps;
    FloatMatrix in(2 * steps.size(), dim);
    FloatMatrix tgt(2 * steps.size(), dim);
    for (size_t k = 0; k < steps.size(); ++k) {
      const auto [i, j] = steps[k];
      in.row(2 * k) = a.row(i);
      tgt.row(2 * k) = b.row(j);
      in.row(2 * k + 1) = b.row(j);
      tgt.row(2 * k + 1) = a.row(i);
    }
    in_parts[p] = std::move(in);
    tgt_parts[p] = std::move(tgt);
  });

  int64_t total = 0;
  for (const FloatMatrix& part : in_parts) total += part.rows();
  FramePairSet set;
  set.seed = seed;
  set.inputs = FloatMatrix(total, dim);
  set.targets = FloatMatrix(total, dim);
  int64_t row = 0;
  for (size_t p = 0; p < in_parts.size(); ++p) {
    set.inputs.middleRows(row, in_parts[p].rows()) = in_parts[p];
    set.targets.middleRows(row, in_parts[p].rows()) = tgt_parts[p];
    row += in_parts[p].rows();
  }

  std::vector<int64_t> perm(total);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.Shuffle(&perm);
  FramePairSet shuffled;
  shuffled.seed = seed;
  shuffled.inputs = FloatMatrix(total, dim);
  shuffled.targets = FloatMatrix(total, dim);
  for (int64_t r = 0; r < total; ++r) {
    shuffled.inputs.row(r) = set.inputs.row(perm[r]);
    shuffled.targets.row(r) = set.targets.row(perm[r]);
  }
  if (!shuffled.inputs.allFinite() || !shuffled.targets.allFinite())
    throw DomainError("frame pairs: non-finite feature values");
  return shuffled;
}

void SaveFramePairs(const std::string& path, const FramePairSet& set) {
  std::vector<FeatureSequence> records(2);
  records[0].utterance_id = "__inputs__";
  records[0].frames = set.inputs;
  // The seed rides in the timing fields as two exact 32-bit halves.
  records[0].frame_shift = static_cast<double>(set.seed >> 32);
  records[0].frame_length = static_cast<double>(set.seed & 0xffffffffull);
  records[1].utterance_id = "__targets__";
  records[1].frames = set.targets;
  records[1].frame_shift = records[1].frame_length = 0.0;
  WriteFeatureArchive(path, records);
}

FramePairSet LoadFramePairs(const std::string& path) {
  const std::vector<FeatureSequence> records = ReadFeatureArchive(path);
  const FeatureSequence* inputs = nullptr;
  const FeatureSequence* targets = nullptr;
  for (const FeatureSequence& s : records) {
    if (s.utterance_id == "__inputs__") inputs = &s;
    if (s.utterance_id == "__targets__") targets = &s;
  }
  if (inputs == nullptr || targets == nullptr)
    throw IoError("frame pairs archive " + path +
                  ": missing __inputs__ or __targets__");
  if (inputs->frames.rows() != targets->frames.rows() ||
      inputs->frames.cols() != targets->frames.cols())
    throw IoError("frame pairs archive " + path + ": shape mismatch");
  const double hi = inputs->frame_shift;
  const double lo = inputs->frame_length;
  if (hi < 0.0 || hi >= 4294967296.0 || hi != std::floor(hi) || lo < 0.0 ||
      lo >= 4294967296.0 || lo != std::floor(lo))
    throw IoError("frame pairs archive " + path + ": corrupt seed fields");
  FramePairSet set;
  set.seed = (static_cast<uint64_t>(hi) << 32) | static_cast<uint64_t>(lo);
  set.inputs = inputs->frames;
  set.targets = targets->frames;
  return set;
}

void SaveSegments(const std::string& path,
                  const std::vector<SegmentRecord>& segments) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create file '" + path + "'");
  for (const SegmentRecord& s : segments) {
    WriteSegmentFields(out, s);
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<SegmentRecord> LoadSegments(const std::string& path) {
  std::vector<SegmentRecord> segments;
  for (const auto& [number, line] : ReadContentLines(path)) {
    const std::string context = path + ":" + std::to_string(number);
    const std::vector<std::string> fields = SplitTabs(line);
    if (fields.size() != 5)
      throw IoError(context + ": expected 5 tab-separated fields "
                    "(utterance_id speaker_id word start end), got " +
                    std::to_string(fields.size()));
    SegmentRecord s = ParseSegmentFields(fields.data(), context);
    if (s.word.empty()) throw IoError(context + ": empty word");
    segments.push_back(std::move(s));
  }
  return segments;
}

void SaveSegmentPairs(const std::string& path,
                      const std::vector<SegmentPair>& pairs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create file '" + path + "'");
  for (const SegmentPair& p : pairs) {
    out << PairCategoryName(p.category) << '\t';
    WriteSegmentFields(out, p.a);
    out << '\t';
    WriteSegmentFields(out, p.b);
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<SegmentPair> LoadSegmentPairs(const std::string& path) {
  std::vector<SegmentPair> pairs;
  for (const auto& [number, line] : ReadContentLines(path)) {
    const std::string context = path + ":" + std::to_string(number);
    const std::vector<std::string> fields = SplitTabs(line);
    if (fields.size() != 11)
      throw IoError(context + ": expected 11 tab-separated fields "
                    "(category + two segments), got " +
                    std::to_string(fields.size()));
    const PairCategory category = ParsePairCategory(fields[0]);
    const SegmentRecord a = ParseSegmentFields(fields.data() + 1, context);
    const SegmentRecord b = ParseSegmentFields(fields.data() + 6, context);
    if (category == PairCategory::kUtd) {
      if (!a.word.empty() || !b.word.empty())
        throw IoError(context + ": UTD pairs must not carry words");
    } else {
      if (a.word.empty() || b.word.empty())
        throw IoError(context + ": empty word in a non-UTD pair");
      if (Categorize(a, b) != category)
        throw IoError(context + ": category " + fields[0] +
                      " contradicts the segment words/speakers");
    }
    pairs.push_back(CanonicalPair(a, b, category));
  }
  return pairs;
}

}  // namespace zrkit
