// src/io.cc

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

#include "zrkit/io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "zrkit/error.h"
#include "zrkit/text.h"

namespace zrkit {

namespace {

constexpr char kArchiveMagic[4] = {'Z', 'R', 'F', 'A'};
constexpr uint32_t kArchiveVersion = 1;

std::ifstream OpenBinaryIn(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file '" + path + "'");
  return in;
}

std::ofstream OpenBinaryOut(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create file '" + path + "'");
  return out;
}

// All on-disk integers and floats are little-endian; this code assumes a
// little-endian host (checked once at archive open).
bool HostIsLittleEndian() {
  const uint16_t probe = 1;
  return *reinterpret_cast<const uint8_t*>(&probe) == 1;
}

template <typename T>
void WriteRaw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadRaw(std::istream& in, const std::string& context) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("truncated " + context);
  return value;
}

}  // namespace

// --- WAV -------------------------------------------------------------------

WavData ReadWav(const std::string& path) {
  std::ifstream in = OpenBinaryIn(path);

  char riff[4], wave[4];
  in.read(riff, 4);
  if (!in || std::memcmp(riff, "RIFF", 4) != 0)
    throw IoError("'" + path + "': not a RIFF file");
  ReadRaw<uint32_t>(in, "RIFF header in '" + path + "'");
  in.read(wave, 4);
  if (!in || std::memcmp(wave, "WAVE", 4) != 0)
    throw IoError("'" + path + "': RIFF form type is not WAVE");

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  WavData wav;

  // Chunk walk; tolerates extra chunks (LIST etc.) before and after data.
  for (;;) {
    char id[4];
    in.read(id, 4);
    if (!in) break;
    uint32_t size = ReadRaw<uint32_t>(in, "chunk header in '" + path + "'");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw IoError("'" + path + "': fmt chunk too small");
      format = ReadRaw<uint16_t>(in, "fmt chunk");
      channels = ReadRaw<uint16_t>(in, "fmt chunk");
      sample_rate = ReadRaw<uint32_t>(in, "fmt chunk");
      ReadRaw<uint32_t>(in, "fmt chunk");  // byte rate
      ReadRaw<uint16_t>(in, "fmt chunk");  // block align
      bits = ReadRaw<uint16_t>(in, "fmt chunk");
      in.ignore(size - 16);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt)
        throw IoError("'" + path + "': data chunk before fmt chunk");
      if (format != 1)
        throw IoError("'" + path + "': audio format " +
                      std::to_string(format) + " is not linear PCM");
      if (channels != 1)
        throw IoError("'" + path + "': " + std::to_string(channels) +
                      " channels, expected mono");
      if (bits != 16)
        throw IoError("'" + path + "': " + std::to_string(bits) +
                      " bits per sample, expected 16");
      const uint32_t n = size / 2;
      wav.samples.resize(n);
      std::vector<int16_t> raw(n);
      in.read(reinterpret_cast<char*>(raw.data()), int64_t{n} * 2);
      if (!in) throw IoError("'" + path + "': truncated data chunk");
      for (uint32_t i = 0; i < n; ++i)
        wav.samples[i] = static_cast<float>(raw[i]) / 32768.0f;
      wav.sample_rate = static_cast<int>(sample_rate);
      return wav;
    } else {
      in.ignore(size + (size & 1));  // chunks are word-aligned
    }
  }
  throw IoError("'" + path + "': no data chunk found");
}

void WriteWav(const std::string& path, const std::vector<float>& samples,
              int sample_rate) {
  std::ofstream out = OpenBinaryOut(path);
  const uint32_t data_size = static_cast<uint32_t>(samples.size() * 2);
  out.write("RIFF", 4);
  WriteRaw<uint32_t>(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  WriteRaw<uint32_t>(out, 16);
  WriteRaw<uint16_t>(out, 1);  // PCM
  WriteRaw<uint16_t>(out, 1);  // mono
  WriteRaw<uint32_t>(out, static_cast<uint32_t>(sample_rate));
  WriteRaw<uint32_t>(out, static_cast<uint32_t>(sample_rate * 2));
  WriteRaw<uint16_t>(out, 2);
  WriteRaw<uint16_t>(out, 16);
  out.write("data", 4);
  WriteRaw<uint32_t>(out, data_size);
  std::vector<int16_t> raw(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    const double scaled = std::lround(static_cast<double>(samples[i]) * 32768.0);
    raw[i] = static_cast<int16_t>(
        std::clamp(scaled, -32768.0, 32767.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<int64_t>(raw.size()) * 2);
  if (!out) throw IoError("failed writing '" + path + "'");
}

// --- ZRFA archive -----------------------------------------------------------

void WriteFeatureArchive(const std::string& path,
                         const std::vector<FeatureSequence>& sequences) {
  std::unordered_set<std::string> ids;
  for (const FeatureSequence& s : sequences)
    if (!ids.insert(s.utterance_id).second)
      throw DomainError("archive write: duplicate utterance id '" +
                        s.utterance_id + "'");

  std::ofstream out = OpenBinaryOut(path);
  out.write(kArchiveMagic, 4);
  WriteRaw<uint32_t>(out, kArchiveVersion);
  WriteRaw<uint64_t>(out, static_cast<uint64_t>(sequences.size()));
  for (const FeatureSequence& s : sequences) {
    WriteRaw<uint32_t>(out, static_cast<uint32_t>(s.utterance_id.size()));
    out.write(s.utterance_id.data(),
              static_cast<int64_t>(s.utterance_id.size()));
    WriteRaw<uint32_t>(out, static_cast<uint32_t>(s.frames.rows()));
    WriteRaw<uint32_t>(out, static_cast<uint32_t>(s.frames.cols()));
    WriteRaw<double>(out, s.frame_shift);
    WriteRaw<double>(out, s.frame_length);
    out.write(reinterpret_cast<const char*>(s.frames.data()),
              static_cast<int64_t>(s.frames.size()) * 4);
  }
  if (!out) throw IoError("failed writing archive '" + path + "'");
}

std::vector<FeatureSequence> ReadFeatureArchive(const std::string& path) {
  if (!HostIsLittleEndian())
    throw IoError("ZRFA archives require a little-endian host");
  std::ifstream in = OpenBinaryIn(path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kArchiveMagic, 4) != 0)
    throw IoError("'" + path + "': bad archive magic");
  const uint32_t version = ReadRaw<uint32_t>(in, "archive header");
  if (version != kArchiveVersion)
    throw IoError("'" + path + "': unsupported archive version " +
                  std::to_string(version));
  const uint64_t count = ReadRaw<uint64_t>(in, "archive header");

  std::vector<FeatureSequence> sequences;
  sequences.reserve(count);
  for (uint64_t r = 0; r < count; ++r) {
    const std::string context =
        "record " + std::to_string(r) + " of '" + path + "'";
    const uint32_t id_len = ReadRaw<uint32_t>(in, context);
    FeatureSequence s;
    s.utterance_id.resize(id_len);
    in.read(s.utterance_id.data(), id_len);
    if (!in) throw IoError("truncated " + context);
    const uint32_t rows = ReadRaw<uint32_t>(in, context);
    const uint32_t cols = ReadRaw<uint32_t>(in, context);
    s.frame_shift = ReadRaw<double>(in, context);
    s.frame_length = ReadRaw<double>(in, context);
    const uint64_t cells = uint64_t{rows} * uint64_t{cols};
    if (cells > (uint64_t{1} << 33))
      throw IoError(context + ": matrix size overflow (" +
                    std::to_string(rows) + "x" + std::to_string(cols) + ")");
    s.frames.resize(rows, cols);
    in.read(reinterpret_cast<char*>(s.frames.data()),
            static_cast<int64_t>(cells) * 4);
    if (!in) throw IoError("truncated " + context);
    sequences.push_back(std::move(s));
  }
  return sequences;
}

// --- Text helpers -----------------------------------------------------------

std::vector<std::pair<int, std::string>> ReadContentLines(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file '" + path + "'");
  std::vector<std::pair<int, std::string>> lines;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    lines.emplace_back(number, line);
  }
  return lines;
}

std::vector<std::string> SplitWhitespace(const std::string& line) {
  std::vector<std::string> fields;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

double ParseDouble(const std::string& token, const std::string& context) {
  double value;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw IoError(context + ": not a number: '" + token + "'");
  return value;
}

int64_t ParseInt(const std::string& token, const std::string& context) {
  int64_t value;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw IoError(context + ": not an integer: '" + token + "'");
  return value;
}

// --- Manifest ----------------------------------------------------------------

UtteranceManifest LoadManifest(const std::string& path) {
  std::vector<ManifestEntry> entries;
  for (const auto& [number, line] : ReadContentLines(path)) {
    const std::string context = path + ":" + std::to_string(number);
    std::vector<std::string> fields = SplitWhitespace(line);
    if (fields.size() != 3)
      throw IoError(context + ": expected 3 fields "
                    "(utterance_id speaker_id audio_path), got " +
                    std::to_string(fields.size()));
    entries.push_back({fields[0], fields[1], fields[2]});
  }
  try {
    return UtteranceManifest(std::move(entries));
  } catch (const DomainError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void SaveManifest(const std::string& path, const UtteranceManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create file '" + path + "'");
  for (const ManifestEntry& e : manifest.entries())
    out << e.utterance_id << '\t' << e.speaker_id << '\t' << e.audio_path
        << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

UtteranceManifest ResolveAudioPaths(const UtteranceManifest& manifest,
                                    const std::string& base_dir) {
  std::vector<ManifestEntry> entries = manifest.entries();
  for (ManifestEntry& e : entries) {
    const std::filesystem::path p(e.audio_path);
    if (p.is_relative())
      e.audio_path = (std::filesystem::path(base_dir) / p).string();
  }
  return UtteranceManifest(std::move(entries));
}

// --- Alignments ---------------------------------------------------------------

std::vector<WordAlignmentEntry> LoadAlignments(const std::string& path) {
  std::vector<WordAlignmentEntry> alignments;
  for (const auto& [number, line] : ReadContentLines(path)) {
    const std::string context = path + ":" + std::to_string(number);
    std::vector<std::string> fields = SplitWhitespace(line);
    if (fields.size() != 4)
      throw IoError(context + ": expected 4 fields "
                    "(utterance_id word start end), got " +
                    std::to_string(fields.size()));
    WordAlignmentEntry e;
    e.utterance_id = fields[0];
    e.word = CaseFold(fields[1]);
    e.start = ParseDouble(fields[2], context);
    e.end = ParseDouble(fields[3], context);
    if (e.word.empty()) throw IoError(context + ": empty word");
    if (e.start < 0.0 || e.start >= e.end)
      throw IoError(context + ": invalid times (need 0 <= start < end), got " +
                    fields[2] + " .. " + fields[3]);
    alignments.push_back(std::move(e));
  }
  return alignments;
}

void SaveAlignments(const std::string& path,
                    const std::vector<WordAlignmentEntry>& alignments) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create file '" + path + "'");
  char buffer[64];
  for (const WordAlignmentEntry& e : alignments) {
    std::snprintf(buffer, sizeof(buffer), " %.6f %.6f", e.start, e.end);
    out << e.utterance_id << ' ' << e.word << buffer << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

// --- UTD pairs ----------------------------------------------------------------

std::vector<UtdPairEntry> LoadUtdPairs(const std::string& path,
                                       const UtteranceManifest& manifest) {
  std::vector<UtdPairEntry> pairs;
  for (const auto& [number, line] : ReadContentLines(path)) {
    const std::string context = path + ":" + std::to_string(number);
    std::vector<std::string> fields = SplitWhitespace(line);
    if (fields.size() != 6 && fields.size() != 7)
      throw IoError(context + ": expected 6 or 7 fields "
                    "(utt_a start_a end_a utt_b start_b end_b [score]), got " +
                    std::to_string(fields.size()));
    UtdPairEntry e;
    e.utt_a = fields[0];
    e.start_a = ParseDouble(fields[1], context);
    e.end_a = ParseDouble(fields[2], context);
    e.utt_b = fields[3];
    e.start_b = ParseDouble(fields[4], context);
    e.end_b = ParseDouble(fields[5], context);
    if (fields.size() == 7) e.score = ParseDouble(fields[6], context);
    if (e.start_a >= e.end_a || e.start_b >= e.end_b)
      throw IoError(context + ": fragment start must be before end");
    if (!manifest.Contains(e.utt_a))
      throw IoError(context + ": unknown utterance id '" + e.utt_a + "'");
    if (!manifest.Contains(e.utt_b))
      throw IoError(context + ": unknown utterance id '" + e.utt_b + "'");
    pairs.push_back(std::move(e));
  }
  return pairs;
}

// --- Text-matrix features -------------------------------------------------------

std::vector<FeatureSequence> ReadTextFeatures(const std::string& path) {
  const auto lines = ReadContentLines(path);
  std::vector<FeatureSequence> sequences;
  std::unordered_set<std::string> seen;
  size_t i = 0;
  while (i < lines.size()) {
    const auto& [number, header] = lines[i];
    const std::string context = path + ":" + std::to_string(number);
    std::vector<std::string> fields = SplitWhitespace(header);
    if (fields.size() < 3 || fields.size() > 5)
      throw IoError(context + ": expected header "
                    "'utterance_id num_frames dim [frame_shift [frame_length]]'");
    FeatureSequence s;
    s.utterance_id = fields[0];
    if (!seen.insert(s.utterance_id).second)
      throw IoError(context + ": duplicate utterance id '" + s.utterance_id +
                    "'");
    const int64_t rows = ParseInt(fields[1], context);
    const int64_t cols = ParseInt(fields[2], context);
    if (rows < 1 || cols < 1)
      throw IoError(context + ": num_frames and dim must be >= 1");
    if (fields.size() >= 4) s.frame_shift = ParseDouble(fields[3], context);
    if (fields.size() >= 5) s.frame_length = ParseDouble(fields[4], context);
    if (s.frame_shift <= 0.0)
      throw IoError(context + ": frame_shift must be > 0");
    s.frames.resize(rows, cols);
    ++i;
    for (int64_t r = 0; r < rows; ++r, ++i) {
      if (i >= lines.size())
        throw IoError(context + ": utterance '" + s.utterance_id +
                      "' truncated after " + std::to_string(r) + " rows");
      const auto& [row_number, row_line] = lines[i];
      const std::string row_context = path + ":" + std::to_string(row_number);
      std::vector<std::string> values = SplitWhitespace(row_line);
      if (static_cast<int64_t>(values.size()) != cols)
        throw IoError(row_context + ": expected " + std::to_string(cols) +
                      " values, got " + std::to_string(values.size()));
      for (int64_t c = 0; c < cols; ++c)
        s.frames(r, c) = static_cast<float>(ParseDouble(values[c], row_context));
      if (!s.frames.row(r).allFinite())
        throw IoError(row_context + ": non-finite value");
    }
    sequences.push_back(std::move(s));
  }
  return sequences;
}

void WriteTextFeatures(const std::string& path,
                       const std::vector<FeatureSequence>& sequences) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create file '" + path + "'");
  char buffer[64];
  for (const FeatureSequence& s : sequences) {
    std::snprintf(buffer, sizeof(buffer), " %d %d %.17g %.17g",
                  static_cast<int>(s.frames.rows()),
                  static_cast<int>(s.frames.cols()), s.frame_shift,
                  s.frame_length);
    out << s.utterance_id << buffer << '\n';
    for (int64_t r = 0; r < s.frames.rows(); ++r) {
      for (int64_t c = 0; c < s.frames.cols(); ++c) {
        // 9 significant digits: lossless for float32.
        std::snprintf(buffer, sizeof(buffer), "%s%.9g", c ? " " : "",
                      static_cast<double>(s.frames(r, c)));
        out << buffer;
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace zrkit
