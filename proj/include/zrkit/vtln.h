// include/zrkit/vtln.h

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

// Unsupervised per-speaker VTLN: each speaker's warp factor is the grid
// point whose re-warped features score highest under a UBM trained on
// unwarped features.

#ifndef ZRKIT_VTLN_H_
#define ZRKIT_VTLN_H_

#include <map>
#include <string>
#include <vector>

#include "zrkit/frontend.h"
#include "zrkit/gmm.h"
#include "zrkit/types.h"

namespace zrkit {

struct WarpTable {
  std::map<std::string, double> warps;  // speaker id -> alpha

  // Throws DomainError if the speaker has no warp entry.
  double Get(const std::string& speaker_id) const;
};

// Text table, one "speaker_id<TAB>alpha" line per speaker, sorted by
// speaker id. Alphas must lie in [0.5, 2.0].
void SaveWarpTable(const std::string& path, const WarpTable& table);
WarpTable LoadWarpTable(const std::string& path);

// alpha = 1.0 for every speaker in the manifest.
WarpTable IdentityWarpTable(const UtteranceManifest& manifest);

// Per-speaker maximum-likelihood grid search. For each speaker and each
// grid alpha, that speaker's utterances are re-extracted as MFCC+deltas
// with the warped filterbank, mean-normalized over the speaker's frames,
// and scored against the UBM; power spectra are computed once per utterance
// and shared across the grid. Ties prefer the alpha closest to 1.0, then
// the smaller alpha. The result does not depend on speaker order or jobs.
WarpTable EstimateWarps(const UtteranceManifest& manifest,
                        const DiagonalGmm& ubm, const FrontendConfig& config,
                        const VtlnConfig& vtln, int jobs = 1);

// MFCC+deltas extracted with each speaker's warp factor, then per-speaker
// CMN. The archive is aligned one-to-one with the manifest. With an
// all-identity table this is exactly the unwarped pipeline output.
std::vector<FeatureSequence> ApplyVtln(const UtteranceManifest& manifest,
                                       const WarpTable& warps,
                                       const FrontendConfig& config,
                                       int jobs = 1);

}  // namespace zrkit

#endif  // ZRKIT_VTLN_H_
