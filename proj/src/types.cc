// src/types.cc

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

#include "zrkit/types.h"

#include <cmath>

#include "zrkit/error.h"

namespace zrkit {

UtteranceManifest::UtteranceManifest(std::vector<ManifestEntry> entries)
    : entries_(std::move(entries)) {
  index_.reserve(entries_.size());
  for (size_t i = 0; i < entries_.size(); ++i) {
    const ManifestEntry& e = entries_[i];
    if (e.utterance_id.empty())
      throw DomainError("manifest: empty utterance id at entry " +
                        std::to_string(i + 1));
    if (e.speaker_id.empty())
      throw DomainError("manifest: empty speaker id for utterance '" +
                        e.utterance_id + "'");
    if (!index_.emplace(e.utterance_id, i).second)
      throw DomainError("manifest: duplicate utterance id '" +
                        e.utterance_id + "'");
  }
}

bool UtteranceManifest::Contains(const std::string& utterance_id) const {
  return index_.count(utterance_id) != 0;
}

const ManifestEntry& UtteranceManifest::Find(
    const std::string& utterance_id) const {
  auto it = index_.find(utterance_id);
  if (it == index_.end())
    throw DomainError("unknown utterance id '" + utterance_id + "'");
  return entries_[it->second];
}

std::vector<std::string> UtteranceManifest::Speakers() const {
  std::vector<std::string> speakers;
  std::unordered_map<std::string, bool> seen;
  for (const ManifestEntry& e : entries_) {
    if (!seen.emplace(e.speaker_id, true).second) continue;
    speakers.push_back(e.speaker_id);
  }
  return speakers;
}

const char* PairCategoryName(PairCategory c) {
  switch (c) {
    case PairCategory::kSameWordSameSpeaker: return "SW-SP";
    case PairCategory::kSameWordDifferentSpeaker: return "SW-DP";
    case PairCategory::kDifferentWord: return "DW";
    case PairCategory::kUtd: return "UTD";
  }
  return "?";
}

PairCategory ParsePairCategory(const std::string& name) {
  if (name == "SW-SP") return PairCategory::kSameWordSameSpeaker;
  if (name == "SW-DP") return PairCategory::kSameWordDifferentSpeaker;
  if (name == "DW") return PairCategory::kDifferentWord;
  if (name == "UTD") return PairCategory::kUtd;
  throw IoError("unknown pair category '" + name + "'");
}

namespace {
constexpr double kGridEpsilon = 1e-8;
}

int64_t StartFrameIndex(double seconds, double frame_shift) {
  return static_cast<int64_t>(std::floor(seconds / frame_shift + kGridEpsilon));
}

int64_t EndFrameIndex(double seconds, double frame_shift) {
  return static_cast<int64_t>(std::ceil(seconds / frame_shift - kGridEpsilon));
}

}  // namespace zrkit
