// src/dtw.cc

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

#include "zrkit/dtw.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zrkit/error.h"

namespace zrkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Backpointer codes, in tie-break preference order.
enum Step : uint8_t { kDiag = 0, kVert = 1, kHorz = 2, kNone = 3 };

// Packed 2-bit grid, 4 codes per byte.
class StepGrid {
 public:
  StepGrid(int64_t rows, int64_t cols)
      : cols_(cols), bytes_((rows * cols + 3) / 4, 0xff) {}

  void Set(int64_t i, int64_t j, Step s) {
    const int64_t k = i * cols_ + j;
    const int shift = static_cast<int>((k & 3) * 2);
    uint8_t& b = bytes_[static_cast<size_t>(k >> 2)];
    b = static_cast<uint8_t>((b & ~(3u << shift)) | (uint32_t{s} << shift));
  }

  Step Get(int64_t i, int64_t j) const {
    const int64_t k = i * cols_ + j;
    return static_cast<Step>((bytes_[static_cast<size_t>(k >> 2)] >>
                              ((k & 3) * 2)) & 3u);
  }

 private:
  int64_t cols_;
  std::vector<uint8_t> bytes_;
};

inline double UnitDistance(const RowMajorMatrix& a, int64_t i,
                           const RowMajorMatrix& b, int64_t j, bool za,
                           bool zb) {
  if (za | zb) return (za & zb) ? 0.0 : 1.0;
  return 0.5 * (a.row(i) - b.row(j)).squaredNorm();
}

struct Cell {
  double cost;
  int64_t steps;
};

// Picks the predecessor with minimal cost; ties prefer diagonal, then the
// (i-1, j) predecessor.
inline Step PickPredecessor(const Cell& diag, const Cell& vert,
                            const Cell& horz, Cell* out) {
  Step best = kDiag;
  *out = diag;
  if (vert.cost < out->cost) {
    best = kVert;
    *out = vert;
  }
  if (horz.cost < out->cost) {
    best = kHorz;
    *out = horz;
  }
  return best;
}

}  // namespace

double FrameDistance(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size())
    throw DomainError("frame_distance: dimension mismatch (" +
                      std::to_string(x.size()) + " vs " +
                      std::to_string(y.size()) + ")");
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) return (nx == 0.0 && ny == 0.0) ? 0.0 : 1.0;
  return 0.5 * (x / nx - y / ny).squaredNorm();
}

namespace {

template <typename Mat>
NormalizedSequence NormalizeRowsImpl(const Mat& frames) {
  NormalizedSequence out;
  out.unit_rows.resize(frames.rows(), frames.cols());
  out.zero.assign(static_cast<size_t>(frames.rows()), 0);
  for (int64_t i = 0; i < frames.rows(); ++i) {
    Eigen::VectorXd row = frames.row(i).template cast<double>();
    const double norm = row.norm();
    if (norm == 0.0) {
      out.unit_rows.row(i).setZero();
      out.zero[static_cast<size_t>(i)] = 1;
    } else {
      out.unit_rows.row(i) = (row / norm).transpose();
    }
  }
  return out;
}

}  // namespace

NormalizedSequence NormalizeRows(const FloatMatrix& frames) {
  return NormalizeRowsImpl(frames);
}

NormalizedSequence NormalizeRows(const Matrix& frames) {
  return NormalizeRowsImpl(frames);
}

DtwResult Dtw(const NormalizedSequence& a, const NormalizedSequence& b,
              bool with_path) {
  const int64_t ta = a.NumFrames();
  const int64_t tb = b.NumFrames();
  if (a.Dim() != b.Dim())
    throw DomainError("dtw: dimension mismatch (" + std::to_string(a.Dim()) +
                      " vs " + std::to_string(b.Dim()) + ")");
  if (ta < 1 || tb < 1) throw DomainError("dtw: empty sequence");

  std::vector<Cell> prev(static_cast<size_t>(tb));
  std::vector<Cell> curr(static_cast<size_t>(tb));
  StepGrid grid(with_path ? ta : 0, tb);

  for (int64_t i = 0; i < ta; ++i) {
    const bool za = a.zero[static_cast<size_t>(i)] != 0;
    for (int64_t j = 0; j < tb; ++j) {
      const double d =
          UnitDistance(a.unit_rows, i, b.unit_rows, j,
                       za, b.zero[static_cast<size_t>(j)] != 0);
      Cell cell;
      Step step = kNone;
      if (i == 0 && j == 0) {
        cell = {0.0, 0};
      } else {
        const Cell diag = (i > 0 && j > 0) ? prev[j - 1] : Cell{kInf, 0};
        const Cell vert = (i > 0) ? prev[j] : Cell{kInf, 0};
        const Cell horz = (j > 0) ? curr[j - 1] : Cell{kInf, 0};
        step = PickPredecessor(diag, vert, horz, &cell);
      }
      curr[static_cast<size_t>(j)] = {cell.cost + d, cell.steps + 1};
      if (with_path) grid.Set(i, j, step);
    }
    std::swap(prev, curr);
  }

  const Cell& last = prev[static_cast<size_t>(tb - 1)];
  DtwResult result;
  result.normalized_cost = last.cost / static_cast<double>(last.steps);

  if (with_path) {
    AlignmentPath path;
    path.steps.reserve(static_cast<size_t>(last.steps));
    int64_t i = ta - 1, j = tb - 1;
    for (;;) {
      path.steps.emplace_back(static_cast<int>(i), static_cast<int>(j));
      if (i == 0 && j == 0) break;
      switch (grid.Get(i, j)) {
        case kDiag: --i; --j; break;
        case kVert: --i; break;
        case kHorz: --j; break;
        case kNone: throw DomainError("dtw: corrupt backpointer grid");
      }
    }
    std::reverse(path.steps.begin(), path.steps.end());
    result.path = std::move(path);
  }
  return result;
}

DtwResult Dtw(const FeatureSequence& a, const FeatureSequence& b,
              bool with_path) {
  return Dtw(NormalizeRows(a.frames), NormalizeRows(b.frames), with_path);
}

double DtwCostBanded(const NormalizedSequence& a, const NormalizedSequence& b,
                     double band_fraction) {
  if (!(band_fraction > 0.0 && band_fraction <= 1.0))
    throw DomainError("dtw: band_fraction must be in (0, 1]");
  const int64_t ta = a.NumFrames();
  const int64_t tb = b.NumFrames();
  if (a.Dim() != b.Dim()) throw DomainError("dtw: dimension mismatch");
  if (ta < 1 || tb < 1) throw DomainError("dtw: empty sequence");

  const int64_t half_width = std::max<int64_t>(
      static_cast<int64_t>(
          std::ceil(band_fraction * static_cast<double>(std::max(ta, tb)))),
      std::abs(ta - tb));

  std::vector<Cell> prev(static_cast<size_t>(tb), Cell{kInf, 0});
  std::vector<Cell> curr(static_cast<size_t>(tb), Cell{kInf, 0});

  for (int64_t i = 0; i < ta; ++i) {
    const int64_t j_lo = std::max<int64_t>(0, i - half_width);
    const int64_t j_hi = std::min<int64_t>(tb - 1, i + half_width);
    std::fill(curr.begin(), curr.end(), Cell{kInf, 0});
    const bool za = a.zero[static_cast<size_t>(i)] != 0;
    for (int64_t j = j_lo; j <= j_hi; ++j) {
      const double d =
          UnitDistance(a.unit_rows, i, b.unit_rows, j,
                       za, b.zero[static_cast<size_t>(j)] != 0);
      Cell cell;
      if (i == 0 && j == 0) {
        cell = {0.0, 0};
      } else {
        const Cell diag = (i > 0 && j > 0) ? prev[j - 1] : Cell{kInf, 0};
        const Cell vert = (i > 0) ? prev[j] : Cell{kInf, 0};
        const Cell horz = (j > 0) ? curr[j - 1] : Cell{kInf, 0};
        PickPredecessor(diag, vert, horz, &cell);
        if (cell.cost == kInf) continue;
      }
      curr[static_cast<size_t>(j)] = {cell.cost + d, cell.steps + 1};
    }
    std::swap(prev, curr);
  }

  const Cell& last = prev[static_cast<size_t>(tb - 1)];
  if (last.cost == kInf) return kInf;
  return last.cost / static_cast<double>(last.steps);
}

}  // namespace zrkit
