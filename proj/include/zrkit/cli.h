// include/zrkit/cli.h

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

// Subcommand-driven pipeline runner. Subcommands: mfcc, vtln-train,
// vtln-estimate, vtln-apply, pairs-gold, pairs-utd, pairs-frames,
// cae-pretrain, cae-train, cae-encode, import-features, eval, synth,
// pipeline, help.
//
// Configuration is a strict JSON file (sections "frontend", "vtln", "cae",
// "pairs", "dtw", "synth", "paths", "stages", top-level "seed"); unknown keys
// are rejected. Any key can be overridden on the command line as
// --<section>.<key> VALUE (lists comma-separated), and precedence is
// flags > file > defaults. The top-level seed fills cae.seed and synth.seed
// unless those were set explicitly, and seeds the UBM initialization and the
// frame-pair shuffle. Every run writes the fully resolved configuration as
// <subcommand>.config.json next to its outputs.
//
// Exit codes: 0 success; 1 domain errors (semantically invalid values or
// inputs); 2 usage and IO errors (unknown subcommand/flag/key, missing or
// malformed files). Stages communicate only through files, so any stage
// boundary accepts externally produced artifacts in the same format.

#ifndef ZRKIT_CLI_H_
#define ZRKIT_CLI_H_

#include <string>
#include <utility>
#include <vector>

#include "zrkit/cae.h"
#include "zrkit/frontend.h"
#include "zrkit/gmm.h"
#include "zrkit/pairs.h"
#include "zrkit/synthcorpus.h"

namespace zrkit {

// The union of every module's settings plus pipeline plumbing. Defaults are
// the module defaults; Validate() runs each section's own validation.
struct PipelineConfig {
  FrontendConfig frontend;
  VtlnConfig vtln;
  CaeConfig cae;
  PairConstraints pairs;
  SynthConfig synth;
  // Sakoe-Chiba band fraction for evaluation DTW; 1 = exact full DTW.
  double band_fraction = 1.0;
  struct Paths {
    std::string manifest;
    std::string alignments;
    std::string work_dir;
    std::string text_features;  // import-features stage input
    std::string utd_pairs;      // pairs-utd stage input
  } paths;
  std::vector<std::string> stages;
  uint64_t seed = 0;

  void Validate() const;
};

// file_path may be empty (defaults only). overrides are ("section.key",
// "raw value") pairs in order; top-level keys use the bare key name.
// Throws IoError for unknown keys, unparsable values, or malformed JSON.
PipelineConfig ResolveConfig(
    const std::string& file_path,
    const std::vector<std::pair<std::string, std::string>>& overrides);

// The fully explicit resolved configuration as pretty-printed JSON, loadable
// back through ResolveConfig. Key order is fixed, so equal configs produce
// byte-identical echoes.
std::string ConfigToJson(const PipelineConfig& config);

// Runs one subcommand; args excludes the program name. Never throws: errors
// are printed to stderr and mapped to the exit code contract above.
int RunCli(const std::vector<std::string>& args);

}  // namespace zrkit

#endif  // ZRKIT_CLI_H_
