// include/zrkit/evaluation.h

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

// The same-different task. Every evaluation pair is scored with the
// normalized DTW cost; a pair counts as a match at threshold tau iff its
// cost <= tau. Sweeping tau over the distinct observed costs gives
//   P(tau) = M_SW(tau) / M_all(tau),
//   R(tau) = M_SWDP(tau) / |S_SWDP|,
// with recall restricted to same-word different-speaker pairs, and average
// precision is the right-step integral sum_k (R_k - R_{k-1}) P_k.

#ifndef ZRKIT_EVALUATION_H_
#define ZRKIT_EVALUATION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "zrkit/pairs.h"
#include "zrkit/types.h"

namespace zrkit {

struct PairCost {
  int64_t pair_index = 0;  // position in the scored pair list
  PairCategory category = PairCategory::kDifferentWord;
  double cost = 0.0;  // finite, >= 0
};

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  int64_t m_all = 0;   // matches at this threshold
  int64_t m_sw = 0;    // same-word matches
  int64_t m_swdp = 0;  // same-word different-speaker matches
};

struct EvalReport {
  std::string feature_label;
  double average_precision = 0.0;
  int64_t num_pairs = 0;
  EvalPairCounts counts;
  std::vector<PrPoint> curve;
  double scoring_seconds = 0.0;
  double total_seconds = 0.0;
};

// DTW cost per pair, indexed identically to the input for any worker count.
// band_fraction configures the Sakoe-Chiba band (1 = exact full DTW). Pairs
// must be labeled SW-SP, SW-DP, or DW; UTD pairs have no place here.
std::vector<PairCost> ScorePairs(const std::vector<SegmentPair>& pairs,
                                 const std::vector<FeatureSequence>& archive,
                                 double band_fraction = 1.0, int jobs = 1);

// One PrPoint per distinct observed cost, ascending. Needs at least one
// SW-DP pair, otherwise recall is undefined.
std::vector<PrPoint> PrCurve(const std::vector<PairCost>& costs);

// Right-step integration with R_0 = 0 over a curve in threshold order.
double AveragePrecision(const std::vector<PrPoint>& curve);

// score_pairs -> pr_curve -> average_precision, with counts and timings.
EvalReport Evaluate(const std::vector<SegmentPair>& pairs,
                    const std::vector<FeatureSequence>& archive,
                    const std::string& feature_label,
                    double band_fraction = 1.0, int jobs = 1);

// JSON report with the average precision under the key "ap"; include_curve =
// false drops the per-threshold curve array. config_echo, when nonempty, must
// be a serialized JSON value and is embedded verbatim under "config" so a
// report carries the settings that produced it.
void SaveEvalReport(const std::string& path, const EvalReport& report,
                    bool include_curve = true,
                    const std::string& config_echo = "");

// CSV `threshold,precision,recall,m_all,m_sw,m_swdp` with a header line.
void SavePrCurveCsv(const std::string& path,
                    const std::vector<PrPoint>& curve);

}  // namespace zrkit

#endif  // ZRKIT_EVALUATION_H_
