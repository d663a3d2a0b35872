// include/zrkit/dtw.h

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
// Dynamic time warping with a cosine local distance, path-length
// normalization and steps {(1,0),(0,1),(1,1)}. Cost-only mode keeps two DP
// rows; path mode stores a packed 2-bit backpointer grid.

#ifndef ZRKIT_DTW_H_
#define ZRKIT_DTW_H_

#include <optional>
#include <utility>
#include <vector>

#include "zrkit/types.h"

namespace zrkit {

struct AlignmentPath {
  // (i, j) index pairs from (0,0) to (T_a-1, T_b-1), monotone, unit steps.
  std::vector<std::pair<int, int>> steps;
};

struct DtwResult {
  double normalized_cost = 0.0;  // path cost sum / number of path steps
  std::optional<AlignmentPath> path;
};

// Cosine distance 1 - x.y/(|x||y|) in [0, 2], computed as |u - v|^2 / 2 on
// unit vectors so that identical inputs give exactly 0. If exactly one
// vector is all-zero the distance is 1; if both are zero it is 0.
double FrameDistance(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y);

// A feature sequence with rows pre-normalized to unit length (doubles),
// ready for repeated DTW calls. Zero frames are kept as zero rows and
// flagged.
struct NormalizedSequence {
  RowMajorMatrix unit_rows;  // T x D
  std::vector<char> zero;    // per-row all-zero flag

  int64_t NumFrames() const { return unit_rows.rows(); }
  int64_t Dim() const { return unit_rows.cols(); }
};

NormalizedSequence NormalizeRows(const FloatMatrix& frames);
NormalizedSequence NormalizeRows(const Matrix& frames);

DtwResult Dtw(const NormalizedSequence& a, const NormalizedSequence& b,
              bool with_path = false);
DtwResult Dtw(const FeatureSequence& a, const FeatureSequence& b,
              bool with_path = false);

// Same recurrence restricted to a Sakoe-Chiba band of half-width
// max(ceil(band_fraction * max(T_a,T_b)), |T_a - T_b|). band_fraction = 1
// equals Dtw exactly. Returns +infinity if no path fits in the band.
double DtwCostBanded(const NormalizedSequence& a, const NormalizedSequence& b,
                     double band_fraction);

}  // namespace zrkit

#endif  // ZRKIT_DTW_H_
