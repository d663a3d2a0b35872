// include/zrkit/error.h

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

#ifndef ZRKIT_ERROR_H_
#define ZRKIT_ERROR_H_

#include <stdexcept>
#include <string>

namespace zrkit {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or unreadable files, unparsable or malformed input, bad config
// keys. The CLI maps these to exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

// Semantic failures on well-formed input: degenerate EM statistics, empty
// pair sets, unknown speakers, dimension mismatches. Exit code 1.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace zrkit

#endif  // ZRKIT_ERROR_H_
