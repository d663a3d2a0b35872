// src/text.cc

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

#include "zrkit/text.h"

#include <vector>

namespace zrkit {

namespace {

// Decodes one UTF-8 code point starting at i; advances i. Invalid bytes are
// passed through as-is (latin-1 style) so folding never throws.
uint32_t DecodeUtf8(const std::string& s, size_t* i) {
  const auto byte = [&](size_t k) -> uint32_t {
    return static_cast<unsigned char>(s[k]);
  };
  const uint32_t b0 = byte(*i);
  if (b0 < 0x80) {
    *i += 1;
    return b0;
  }
  auto cont = [&](size_t k) {
    return k < s.size() && (byte(k) & 0xc0) == 0x80;
  };
  if ((b0 & 0xe0) == 0xc0 && cont(*i + 1)) {
    const uint32_t cp = ((b0 & 0x1f) << 6) | (byte(*i + 1) & 0x3f);
    *i += 2;
    return cp;
  }
  if ((b0 & 0xf0) == 0xe0 && cont(*i + 1) && cont(*i + 2)) {
    const uint32_t cp = ((b0 & 0x0f) << 12) | ((byte(*i + 1) & 0x3f) << 6) |
                        (byte(*i + 2) & 0x3f);
    *i += 3;
    return cp;
  }
  if ((b0 & 0xf8) == 0xf0 && cont(*i + 1) && cont(*i + 2) && cont(*i + 3)) {
    const uint32_t cp = ((b0 & 0x07) << 18) | ((byte(*i + 1) & 0x3f) << 12) |
                        ((byte(*i + 2) & 0x3f) << 6) | (byte(*i + 3) & 0x3f);
    *i += 4;
    return cp;
  }
  *i += 1;
  return b0;
}

void EncodeUtf8(uint32_t cp, std::string* out) {
  if (cp < 0x80) {
    out->push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out->push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out->push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out->push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

uint32_t FoldCodepoint(uint32_t cp) {
  // ASCII
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  // Latin-1 supplement: À-Þ except ×
  if (cp >= 0x00c0 && cp <= 0x00de && cp != 0x00d7) return cp + 32;
  // Latin Extended-A: alternating upper/lower
  if (cp == 0x0130) return 0x0069;  // İ -> i (simple fold convention)
  if (cp >= 0x0100 && cp <= 0x0137) return cp | 1;
  if (cp >= 0x0139 && cp <= 0x0148) return ((cp + 1) | 1) - 1;
  if (cp >= 0x014a && cp <= 0x0177) return cp | 1;
  if (cp == 0x0178) return 0x00ff;  // Ÿ -> ÿ
  if (cp >= 0x0179 && cp <= 0x017e) return ((cp + 1) | 1) - 1;
  if (cp == 0x017f) return 0x0073;  // long s -> s
  // Latin Extended Additional (Vietnamese etc.): alternating pairs.
  // 0x1e96-0x1e9f is irregular (caseless letters plus capital sharp s).
  if (cp >= 0x1e00 && cp <= 0x1e95 && (cp & 1) == 0) return cp + 1;
  if (cp == 0x1e9e) return 0x00df;  // capital sharp s -> ss-eszett
  if (cp >= 0x1ea0 && cp <= 0x1eff && (cp & 1) == 0) return cp + 1;
  // Greek
  if (cp >= 0x0391 && cp <= 0x03a1) return cp + 32;
  if (cp >= 0x03a3 && cp <= 0x03ab) return cp + 32;
  if (cp == 0x03c2) return 0x03c3;  // final sigma -> sigma
  if (cp == 0x0386) return 0x03ac;
  if (cp >= 0x0388 && cp <= 0x038a) return cp + 37;
  if (cp == 0x038c) return 0x03cc;
  if (cp == 0x038e || cp == 0x038f) return cp + 63;
  // Cyrillic
  if (cp >= 0x0410 && cp <= 0x042f) return cp + 32;
  if (cp >= 0x0400 && cp <= 0x040f) return cp + 80;
  if (cp >= 0x0460 && cp <= 0x0481 && (cp & 1) == 0) return cp + 1;
  if (cp >= 0x048a && cp <= 0x04bf && (cp & 1) == 0) return cp + 1;
  if (cp >= 0x04c1 && cp <= 0x04cd && (cp & 1) == 1) return cp + 1;
  if (cp >= 0x04d0 && cp <= 0x04ff && (cp & 1) == 0) return cp + 1;
  return cp;
}

}  // namespace

std::string CaseFold(const std::string& utf8) {
  std::string out;
  out.reserve(utf8.size());
  size_t i = 0;
  while (i < utf8.size()) EncodeUtf8(FoldCodepoint(DecodeUtf8(utf8, &i)), &out);
  return out;
}

int64_t Utf8Length(const std::string& utf8) {
  int64_t n = 0;
  size_t i = 0;
  while (i < utf8.size()) {
    DecodeUtf8(utf8, &i);
    ++n;
  }
  return n;
}

}  // namespace zrkit
