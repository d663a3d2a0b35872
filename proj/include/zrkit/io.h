// include/zrkit/io.h

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
//
// Dataset manifests, PCM16 WAV audio, the ZRFA feature archive, alignment
// and UTD pair-list ingestion, and text-matrix import of externally computed
// representations. All text formats are UTF-8 with '#'-prefixed comment
// lines. Loaders reject malformed input rather than repairing it.

#ifndef ZRKIT_IO_H_
#define ZRKIT_IO_H_

#include <string>
#include <utility>
#include <vector>

#include "zrkit/types.h"

namespace zrkit {

struct WavData {
  std::vector<float> samples;  // in [-1, 1], raw 16-bit values / 32768
  int sample_rate = 0;
};

// Reads a RIFF/WAVE file. Only linear PCM, 16-bit, mono is accepted; any
// other encoding raises IoError naming the offending property.
WavData ReadWav(const std::string& path);

// Writes linear PCM 16-bit mono. Samples are clamped to [-1, 1] and rounded
// to the nearest 16-bit value, so a write/read round trip is within 2^-15.
void WriteWav(const std::string& path, const std::vector<float>& samples,
              int sample_rate);

// ZRFA feature archive, bit-exact layout:
//   magic "ZRFA", version u32 LE = 1, record count u64 LE;
//   per record: id byte-length u32 LE, UTF-8 id bytes, T u32 LE, D u32 LE,
//   frame_shift f64 LE, frame_length f64 LE, T*D float32 LE row-major.
void WriteFeatureArchive(const std::string& path,
                         const std::vector<FeatureSequence>& sequences);
std::vector<FeatureSequence> ReadFeatureArchive(const std::string& path);

// Manifest text format: one utterance per line,
//   utterance_id <TAB> speaker_id <TAB> audio_path
UtteranceManifest LoadManifest(const std::string& path);
void SaveManifest(const std::string& path, const UtteranceManifest& manifest);

// Copy of the manifest with every relative audio path joined onto base_dir;
// absolute paths pass through. Callers use this to interpret a manifest's
// paths relative to its own directory.
UtteranceManifest ResolveAudioPaths(const UtteranceManifest& manifest,
                                    const std::string& base_dir);

// Alignment text format: one word token per line,
//   utterance_id word start_seconds end_seconds
// Words are case-folded on load; order is preserved.
std::vector<WordAlignmentEntry> LoadAlignments(const std::string& path);
void SaveAlignments(const std::string& path,
                    const std::vector<WordAlignmentEntry>& alignments);

// UTD pair-list format: one pair per line,
//   utt_a start_a end_a utt_b start_b end_b [score]
// Every utterance must be present in the manifest.
std::vector<UtdPairEntry> LoadUtdPairs(const std::string& path,
                                       const UtteranceManifest& manifest);

// Text-matrix interchange for externally computed representations. Per
// utterance: a header line
//   utterance_id num_frames dim [frame_shift [frame_length]]
// followed by num_frames lines of dim whitespace-separated values. Values
// are written with enough digits that float32 round-trips exactly.
std::vector<FeatureSequence> ReadTextFeatures(const std::string& path);
void WriteTextFeatures(const std::string& path,
                       const std::vector<FeatureSequence>& sequences);

// Shared text-parsing helpers.
//
// Reads all content lines of a UTF-8 text file, skipping blank lines and
// '#' comments; returns (1-based line number, line) pairs.
std::vector<std::pair<int, std::string>> ReadContentLines(
    const std::string& path);
std::vector<std::string> SplitWhitespace(const std::string& line);
double ParseDouble(const std::string& token, const std::string& context);
int64_t ParseInt(const std::string& token, const std::string& context);

}  // namespace zrkit

#endif  // ZRKIT_IO_H_
