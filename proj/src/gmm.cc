// src/gmm.cc

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

#include "zrkit/gmm.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "zrkit/error.h"
#include "zrkit/io.h"
#include "zrkit/parallel.h"
#include "zrkit/rng.h"

namespace zrkit {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
// Frames per reduction block. Statistics are accumulated per block and
// reduced in block order, so results do not depend on the jobs count.
constexpr int64_t kBlockSize = 2048;

int64_t NumBlocks(int64_t num_frames) {
  return (num_frames + kBlockSize - 1) / kBlockSize;
}

// Affine form of the per-component log-density:
//   log w_k N(x; mu_k, sigma2_k) = c[k] + a.row(k).dot(x) + b.row(k).dot(x^2)
struct ScoreContext {
  Matrix a;  // K x D: mu / sigma2
  Matrix b;  // K x D: -1 / (2 sigma2)
  Vector c;  // K: log w - (D log 2pi + sum log sigma2 + sum mu^2/sigma2) / 2
};

ScoreContext MakeScoreContext(const DiagonalGmm& gmm) {
  const double d = static_cast<double>(gmm.Dim());
  ScoreContext ctx;
  ctx.a = gmm.means.cwiseQuotient(gmm.variances);
  ctx.b = (-0.5) * gmm.variances.cwiseInverse();
  ctx.c = gmm.weights.array().log().matrix() -
          0.5 * (d * kLog2Pi + gmm.variances.array().log().rowwise().sum() +
                 gmm.means.cwiseProduct(ctx.a).rowwise().sum().array())
                    .matrix();
  return ctx;
}

// Per-frame component log-densities for a block of frames.
Matrix BlockLogDensities(const ScoreContext& ctx,
                         const Eigen::Block<const Matrix>& x) {
  Matrix loglik = x * ctx.a.transpose() +
                  x.cwiseProduct(x) * ctx.b.transpose();
  loglik.rowwise() += ctx.c.transpose();
  return loglik;
}

// Log-sum-exp over each row, written into ll; optionally normalizes loglik
// in place into posteriors.
void LogSumExpRows(Matrix* loglik, Vector* ll, bool make_posteriors) {
  for (int64_t t = 0; t < loglik->rows(); ++t) {
    const double max = loglik->row(t).maxCoeff();
    const double sum = (loglik->row(t).array() - max).exp().sum();
    (*ll)(t) = max + std::log(sum);
    if (make_posteriors)
      loglik->row(t) = (loglik->row(t).array() - (*ll)(t)).exp();
  }
}

struct BlockStats {
  double ll_sum = 0.0;
  Vector occupancy;  // K
  Matrix mean_sum;   // K x D
  Matrix var_sum;    // K x D
};

// One E-step (or scoring-only) pass. Returns the total log-likelihood; when
// stats is non-null also accumulates zeroth/first/second-order statistics.
double AccumulateStats(const DiagonalGmm& gmm, const Matrix& frames, int jobs,
                       BlockStats* stats) {
  const ScoreContext ctx = MakeScoreContext(gmm);
  const int64_t n = frames.rows();
  const int64_t num_blocks = NumBlocks(n);
  std::vector<BlockStats> partial(num_blocks);
  ParallelFor(num_blocks, jobs, [&](int64_t blk) {
    const int64_t begin = blk * kBlockSize;
    const int64_t rows = std::min(kBlockSize, n - begin);
    const auto x = frames.block(begin, 0, rows, frames.cols());
    Matrix loglik = BlockLogDensities(ctx, x);
    Vector ll(rows);
    LogSumExpRows(&loglik, &ll, stats != nullptr);
    BlockStats& out = partial[blk];
    out.ll_sum = ll.sum();
    if (stats != nullptr) {
      out.occupancy = loglik.colwise().sum().transpose();
      out.mean_sum = loglik.transpose() * x;
      out.var_sum = loglik.transpose() * x.cwiseProduct(x);
    }
  });
  double total_ll = 0.0;
  if (stats != nullptr) {
    stats->ll_sum = 0.0;
    stats->occupancy = Vector::Zero(gmm.NumComponents());
    stats->mean_sum = Matrix::Zero(gmm.NumComponents(), gmm.Dim());
    stats->var_sum = Matrix::Zero(gmm.NumComponents(), gmm.Dim());
  }
  for (int64_t blk = 0; blk < num_blocks; ++blk) {
    total_ll += partial[blk].ll_sum;
    if (stats != nullptr) {
      stats->occupancy += partial[blk].occupancy;
      stats->mean_sum += partial[blk].mean_sum;
      stats->var_sum += partial[blk].var_sum;
    }
  }
  if (stats != nullptr) stats->ll_sum = total_ll;
  return total_ll;
}

// Nearest-center assignment for a block of frames; fills the cluster index
// and squared distance per frame.
void AssignBlock(const Matrix& frames, const Matrix& centers, int64_t begin,
                 int64_t rows, std::vector<int>* assignment, Vector* dist2) {
  const auto x = frames.block(begin, 0, rows, frames.cols());
  // ||x - c||^2 = ||x||^2 - 2 x.c + ||c||^2; the ||x||^2 term is added back
  // only for the reported distance.
  Matrix score = (-2.0) * (x * centers.transpose());
  score.rowwise() += centers.rowwise().squaredNorm().transpose();
  for (int64_t t = 0; t < rows; ++t) {
    int best = 0;
    score.row(t).minCoeff(&best);
    (*assignment)[begin + t] = best;
    (*dist2)(begin + t) =
        std::max(0.0, score(t, best) + x.row(t).squaredNorm());
  }
}

// k-means++ seeding followed by Lloyd refinement. Deterministic for a fixed
// rng state and any jobs count.
Matrix RunKmeans(const Matrix& frames, int num_components, int iterations,
                 int jobs, Rng* rng, std::vector<int>* assignment) {
  const int64_t n = frames.rows();
  const int64_t d = frames.cols();
  Matrix centers(num_components, d);

  // Seeding: each new center is drawn with probability proportional to the
  // squared distance from the nearest existing center.
  Vector dist2(n);
  centers.row(0) = frames.row(static_cast<int64_t>(rng->UniformInt(n)));
  for (int64_t t = 0; t < n; ++t)
    dist2(t) = (frames.row(t) - centers.row(0)).squaredNorm();
  for (int k = 1; k < num_components; ++k) {
    const double total = dist2.sum();
    int64_t pick;
    if (total <= 0.0) {
      pick = static_cast<int64_t>(rng->UniformInt(n));  // all points coincide
    } else {
      const double r = rng->Uniform() * total;
      double cum = 0.0;
      pick = n - 1;
      for (int64_t t = 0; t < n; ++t) {
        cum += dist2(t);
        if (cum >= r) {
          pick = t;
          break;
        }
      }
    }
    centers.row(k) = frames.row(pick);
    for (int64_t t = 0; t < n; ++t)
      dist2(t) = std::min(dist2(t),
                          (frames.row(t) - centers.row(k)).squaredNorm());
  }

  assignment->assign(n, 0);
  const int64_t num_blocks = NumBlocks(n);
  for (int iter = 0; iter <= iterations; ++iter) {
    ParallelFor(num_blocks, jobs, [&](int64_t blk) {
      const int64_t begin = blk * kBlockSize;
      AssignBlock(frames, centers, begin, std::min(kBlockSize, n - begin),
                  assignment, &dist2);
    });
    if (iter == iterations) break;  // final pass only refreshes assignments
    Matrix sums = Matrix::Zero(num_components, d);
    Vector counts = Vector::Zero(num_components);
    for (int64_t t = 0; t < n; ++t) {
      sums.row((*assignment)[t]) += frames.row(t);
      counts((*assignment)[t]) += 1.0;
    }
    for (int k = 0; k < num_components; ++k) {
      if (counts(k) > 0.0) {
        centers.row(k) = sums.row(k) / counts(k);
      } else {
        // Re-seed an empty cluster at the frame farthest from its center.
        int64_t farthest = 0;
        dist2.maxCoeff(&farthest);
        centers.row(k) = frames.row(farthest);
        dist2(farthest) = 0.0;
      }
    }
  }
  return centers;
}

DiagonalGmm InitFromClusters(const Matrix& frames,
                             const std::vector<int>& assignment,
                             const Matrix& centers, const Vector& floor) {
  const int64_t n = frames.rows();
  const int64_t k = centers.rows();
  const int64_t d = frames.cols();
  Vector counts = Vector::Zero(k);
  Matrix sums = Matrix::Zero(k, d);
  Matrix sq_sums = Matrix::Zero(k, d);
  for (int64_t t = 0; t < n; ++t) {
    const int c = assignment[t];
    counts(c) += 1.0;
    sums.row(c) += frames.row(t);
    sq_sums.row(c) += frames.row(t).cwiseProduct(frames.row(t));
  }
  DiagonalGmm gmm;
  // Add-one smoothing keeps every initial weight positive even when Lloyd
  // leaves a cluster empty on degenerate data.
  gmm.weights = (counts.array() + 1.0) / static_cast<double>(n + k);
  gmm.means = centers;
  gmm.variances = Matrix::Zero(k, d);
  for (int64_t c = 0; c < k; ++c) {
    if (counts(c) > 0.0) {
      gmm.means.row(c) = sums.row(c) / counts(c);
      gmm.variances.row(c) =
          sq_sums.row(c) / counts(c) -
          gmm.means.row(c).cwiseProduct(gmm.means.row(c));
    }
    gmm.variances.row(c) = gmm.variances.row(c).cwiseMax(floor.transpose());
  }
  return gmm;
}

FloatMatrix ToFloat(const Matrix& m) { return m.cast<float>(); }

const FeatureSequence& FindRecord(const std::vector<FeatureSequence>& records,
                                  const std::string& id,
                                  const std::string& path) {
  for (const FeatureSequence& s : records)
    if (s.utterance_id == id) return s;
  throw IoError("gmm archive " + path + ": missing record '" + id + "'");
}

}  // namespace

void DiagonalGmm::Validate() const {
  const int64_t k = weights.size();
  if (k == 0) throw DomainError("gmm: no components");
  if (means.rows() != k || variances.rows() != k ||
      means.cols() != variances.cols() || means.cols() < 1)
    throw DomainError("gmm: inconsistent parameter shapes");
  if ((weights.array() <= 0.0).any())
    throw DomainError("gmm: weights must be strictly positive");
  if (std::abs(weights.sum() - 1.0) > 1e-9)
    throw DomainError("gmm: weights must sum to 1");
  if (!(variances.array() > 0.0).all())
    throw DomainError("gmm: variances must be strictly positive");
}

std::vector<double> VtlnConfig::DefaultWarpGrid() {
  std::vector<double> grid;
  for (int i = 0; i <= 40; i += 2) grid.push_back(0.80 + 0.01 * i);
  return grid;
}

void VtlnConfig::Validate() const {
  if (num_components < 1) throw DomainError("vtln config: num_components < 1");
  if (em_iterations < 1) throw DomainError("vtln config: em_iterations < 1");
  if (kmeans_iterations < 0)
    throw DomainError("vtln config: kmeans_iterations < 0");
  if (variance_floor_fraction <= 0.0)
    throw DomainError("vtln config: variance_floor_fraction must be > 0");
  if (warp_grid.empty()) throw DomainError("vtln config: empty warp grid");
  bool has_identity = false;
  for (size_t i = 0; i < warp_grid.size(); ++i) {
    if (warp_grid[i] < 0.5 || warp_grid[i] > 2.0)
      throw DomainError("vtln config: warp factor outside [0.5, 2.0]");
    if (i > 0 && warp_grid[i] <= warp_grid[i - 1])
      throw DomainError("vtln config: warp grid must be strictly increasing");
    if (warp_grid[i] == 1.0) has_identity = true;
  }
  if (!has_identity)
    throw DomainError("vtln config: warp grid must contain 1.0");
}

UbmTrainResult TrainUbm(const Matrix& frames, const VtlnConfig& config,
                        uint64_t seed, int jobs) {
  config.Validate();
  const int64_t n = frames.rows();
  const int64_t k = config.num_components;
  if (frames.cols() < 1) throw DomainError("ubm: empty feature dimension");
  if (n < 10 * k)
    throw DomainError("ubm: need at least 10 frames per component, got " +
                      std::to_string(n) + " frames for " + std::to_string(k) +
                      " components");

  // Per-dimension variance floor from the global data variance.
  const Vector global_mean = frames.colwise().mean().transpose();
  Vector global_var =
      (frames.rowwise() - global_mean.transpose()).array().square().matrix()
          .colwise().mean().transpose();
  const Vector floor =
      (config.variance_floor_fraction * global_var.array()).max(1e-10).matrix();

  Rng rng(seed);
  Rng kmeans_rng = rng.Fork("kmeans++");
  std::vector<int> assignment;
  const Matrix centers = RunKmeans(frames, config.num_components,
                                   config.kmeans_iterations, jobs,
                                   &kmeans_rng, &assignment);
  UbmTrainResult result;
  result.gmm = InitFromClusters(frames, assignment, centers, floor);

  for (int iter = 0; iter < config.em_iterations; ++iter) {
    BlockStats stats;
    result.log_likelihoods.push_back(
        AccumulateStats(result.gmm, frames, jobs, &stats));
    for (int64_t c = 0; c < k; ++c) {
      if (!(stats.occupancy(c) > 0.0))
        throw DomainError(
            "ubm: component " + std::to_string(c) +
            " received zero posterior mass at EM iteration " +
            std::to_string(iter) + "; training collapsed");
    }
    result.gmm.weights = stats.occupancy / stats.occupancy.sum();
    for (int64_t c = 0; c < k; ++c) {
      result.gmm.means.row(c) = stats.mean_sum.row(c) / stats.occupancy(c);
      result.gmm.variances.row(c) =
          (stats.var_sum.row(c) / stats.occupancy(c) -
           result.gmm.means.row(c).cwiseProduct(result.gmm.means.row(c)))
              .cwiseMax(floor.transpose());
    }
  }
  result.gmm.Validate();
  return result;
}

double AverageLogLikelihood(const DiagonalGmm& gmm, const Matrix& frames,
                            int jobs) {
  gmm.Validate();
  if (frames.rows() < 1) throw DomainError("gmm scoring: no frames");
  if (frames.cols() != gmm.Dim())
    throw DomainError("gmm scoring: dimension mismatch");
  return AccumulateStats(gmm, frames, jobs, nullptr) /
         static_cast<double>(frames.rows());
}

void SaveGmm(const std::string& path, const DiagonalGmm& gmm) {
  gmm.Validate();
  std::vector<FeatureSequence> records(3);
  records[0].utterance_id = "__weights__";
  records[0].frames = ToFloat(gmm.weights.transpose());
  records[1].utterance_id = "__means__";
  records[1].frames = ToFloat(gmm.means);
  records[2].utterance_id = "__vars__";
  records[2].frames = ToFloat(gmm.variances);
  for (FeatureSequence& s : records) s.frame_shift = s.frame_length = 0.0;
  WriteFeatureArchive(path, records);
}

DiagonalGmm LoadGmm(const std::string& path) {
  const std::vector<FeatureSequence> records = ReadFeatureArchive(path);
  const FeatureSequence& w = FindRecord(records, "__weights__", path);
  const FeatureSequence& m = FindRecord(records, "__means__", path);
  const FeatureSequence& v = FindRecord(records, "__vars__", path);
  if (w.frames.rows() != 1)
    throw IoError("gmm archive " + path + ": __weights__ must be 1 x K");
  DiagonalGmm gmm;
  gmm.weights = w.frames.row(0).cast<double>().transpose();
  gmm.means = m.frames.cast<double>();
  gmm.variances = v.frames.cast<double>();
  if (gmm.means.rows() != gmm.NumComponents() ||
      gmm.variances.rows() != gmm.NumComponents() ||
      gmm.means.cols() != gmm.variances.cols())
    throw IoError("gmm archive " + path + ": inconsistent record shapes");
  // float32 rounding perturbs the simplex; restore it exactly.
  const double sum = gmm.weights.sum();
  if (!(sum > 0.0))
    throw IoError("gmm archive " + path + ": non-positive weight sum");
  gmm.weights /= sum;
  gmm.Validate();
  return gmm;
}

}  // namespace zrkit
