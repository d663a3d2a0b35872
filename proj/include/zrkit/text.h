// include/zrkit/text.h

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

#ifndef ZRKIT_TEXT_H_
#define ZRKIT_TEXT_H_

#include <cstdint>
#include <string>

namespace zrkit {

// Unicode simple case folding (one code point to one code point) over UTF-8.
// Covers ASCII, Latin-1, Latin Extended-A/Additional, Greek and Cyrillic;
// code points outside those ranges pass through unchanged. No stemming, no
// normalization beyond the fold.
std::string CaseFold(const std::string& utf8);

// Number of Unicode scalar values in a UTF-8 string. Word length for the
// minimum-character rule counts scalar values, not bytes.
int64_t Utf8Length(const std::string& utf8);

}  // namespace zrkit

#endif  // ZRKIT_TEXT_H_
