// include/zrkit/gmm.h

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

// Diagonal-covariance GMM trained with seeded k-means and EM. The universal
// background model behind the VTLN warp search.

#ifndef ZRKIT_GMM_H_
#define ZRKIT_GMM_H_

#include <cstdint>
#include <string>
#include <vector>

#include "zrkit/types.h"

namespace zrkit {

struct DiagonalGmm {
  Vector weights;   // K, strictly positive, sums to 1
  Matrix means;     // K x D
  Matrix variances;  // K x D, strictly positive

  int64_t NumComponents() const { return weights.size(); }
  int64_t Dim() const { return means.cols(); }

  // Checks the simplex (sum within 1e-9 of 1, all weights > 0), shape
  // consistency, and positive variances. Throws DomainError.
  void Validate() const;
};

struct VtlnConfig {
  int num_components = 64;  // desk-scale default; 1024 mirrors larger setups
  int em_iterations = 10;
  int kmeans_iterations = 5;  // Lloyd refinements after k-means++ seeding
  // Per-dimension variance floor as a fraction of the global variance
  // (never below 1e-10 so the floor stays positive on degenerate data).
  double variance_floor_fraction = 1e-3;
  std::vector<double> warp_grid = DefaultWarpGrid();

  static std::vector<double> DefaultWarpGrid();  // 0.80, 0.82, ..., 1.20

  // Grid must be sorted ascending, within [0.5, 2.0], and contain 1.0.
  void Validate() const;
};

struct UbmTrainResult {
  DiagonalGmm gmm;
  // Total data log-likelihood under the parameters entering each EM
  // iteration; non-decreasing up to numerical noise.
  std::vector<double> log_likelihoods;
};

// Trains the UBM on pooled frames: k-means++ seeding, kmeans_iterations of
// Lloyd refinement, then em_iterations of EM with variance flooring. Needs
// at least 10 frames per component. Deterministic for a fixed seed and any
// jobs count (sufficient statistics are reduced in fixed block order).
UbmTrainResult TrainUbm(const Matrix& frames, const VtlnConfig& config,
                        uint64_t seed, int jobs = 1);

// Mean over frames of log sum_k w_k N(x; mu_k, diag sigma2_k), evaluated in
// log space.
double AverageLogLikelihood(const DiagonalGmm& gmm, const Matrix& frames,
                            int jobs = 1);

// GMM persisted in the feature-archive container as three reserved records:
// __weights__ (1 x K), __means__ (K x D), __vars__ (K x D). Weights are
// renormalized on load to restore the simplex after float32 rounding.
void SaveGmm(const std::string& path, const DiagonalGmm& gmm);
DiagonalGmm LoadGmm(const std::string& path);

}  // namespace zrkit

#endif  // ZRKIT_GMM_H_
