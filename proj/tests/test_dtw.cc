// tests/test_dtw.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.h"
#include "zrkit/dtw.h"
#include "zrkit/error.h"
#include "zrkit/rng.h"

namespace zrkit {
namespace {

Matrix RandomMatrix(int64_t rows, int64_t cols, Rng* rng) {
  Matrix m(rows, cols);
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t j = 0; j < cols; ++j) m(i, j) = rng->Normal();
  return m;
}

Vector Vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

TEST_CASE("frame distance matches hand-computed values") {
  CHECK(FrameDistance(Vec2(1, 0), Vec2(0, 1)) == 1.0);   // orthogonal
  CHECK(FrameDistance(Vec2(1, 0), Vec2(-1, 0)) == 2.0);  // antipodal
  CHECK(FrameDistance(Vec2(2, 0), Vec2(5, 0)) == 0.0);   // same direction
  CHECK(FrameDistance(Vec2(0, 0), Vec2(0, 0)) == 0.0);   // both zero
  CHECK(FrameDistance(Vec2(0, 0), Vec2(3, 4)) == 1.0);   // one zero
  // 45 degrees: 1 - cos(pi/4).
  CHECK(FrameDistance(Vec2(1, 0), Vec2(1, 1)) ==
        doctest::Approx(1.0 - std::sqrt(0.5)).epsilon(1e-15));
  CHECK_THROWS_AS(FrameDistance(Vec2(1, 0), Vector::Ones(3)), DomainError);
}

TEST_CASE("frame distance is insensitive to positive scaling") {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    Vector x = RandomMatrix(4, 1, &rng).col(0);
    Vector y = RandomMatrix(4, 1, &rng).col(0);
    const double d = FrameDistance(x, y);
    CHECK(d >= 0.0);
    CHECK(d <= 2.0);
    CHECK(FrameDistance(3.0 * x, y) == doctest::Approx(d).epsilon(1e-14));
    CHECK(FrameDistance(x, 0.25 * y) == doctest::Approx(d).epsilon(1e-14));
  }
}

TEST_CASE("row normalization produces unit rows and flags zeros") {
  Matrix m(3, 2);
  m << 3, 4, 0, 0, -1, 0;
  NormalizedSequence n = NormalizeRows(m);
  CHECK(n.unit_rows.row(0).norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(n.unit_rows(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(n.zero == std::vector<char>{0, 1, 0});
  CHECK(n.unit_rows.row(1).norm() == 0.0);
  CHECK(n.unit_rows(2, 0) == -1.0);
}

TEST_CASE("dtw of a sequence with itself is exactly zero") {
  Rng rng(11);
  for (int t = 0; t < 10; ++t) {
    Matrix a = RandomMatrix(2 + static_cast<int64_t>(rng.UniformInt(20)), 5,
                            &rng);
    NormalizedSequence na = NormalizeRows(a);
    CHECK(Dtw(na, na).normalized_cost == 0.0);
    // Power-of-two per-frame rescaling commutes with normalization even in
    // floating point, so the cost stays exactly zero.
    Matrix b = a;
    for (int64_t i = 0; i < b.rows(); ++i)
      b.row(i) *= std::ldexp(1.0, static_cast<int>(i % 5) - 2);
    CHECK(Dtw(na, NormalizeRows(b)).normalized_cost == 0.0);
    // Arbitrary positive rescaling is only direction-preserving up to
    // rounding; the cost must still be vanishingly small.
    Matrix c = a;
    for (int64_t i = 0; i < c.rows(); ++i) c.row(i) *= (1.0 + 0.1 * i);
    CHECK(Dtw(na, NormalizeRows(c)).normalized_cost <= 1e-30);
  }
}

TEST_CASE("dtw matches a hand-worked two-by-one case") {
  Matrix a(2, 2), b(1, 2);
  a << 1, 0, 0, 1;
  b << 1, 0;
  // Single path through (0,0) and (1,0): cost 0 + 1 over two steps.
  DtwResult r = Dtw(NormalizeRows(a), NormalizeRows(b), true);
  CHECK(r.normalized_cost == 0.5);
  REQUIRE(r.path.has_value());
  CHECK(r.path->steps ==
        std::vector<std::pair<int, int>>{{0, 0}, {1, 0}});
}

TEST_CASE("dtw prefers the diagonal on exact ties") {
  Matrix a(2, 2);
  a << 1, 0, 1, 0;
  DtwResult r = Dtw(NormalizeRows(a), NormalizeRows(a), true);
  CHECK(r.normalized_cost == 0.0);
  REQUIRE(r.path.has_value());
  CHECK(r.path->steps ==
        std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
}

TEST_CASE("dtw path is monotone with unit steps and reproduces the cost") {
  Rng rng(23);
  for (int t = 0; t < 30; ++t) {
    const int64_t ta = 1 + static_cast<int64_t>(rng.UniformInt(12));
    const int64_t tb = 1 + static_cast<int64_t>(rng.UniformInt(12));
    NormalizedSequence na = NormalizeRows(RandomMatrix(ta, 4, &rng));
    NormalizedSequence nb = NormalizeRows(RandomMatrix(tb, 4, &rng));
    DtwResult r = Dtw(na, nb, true);
    REQUIRE(r.path.has_value());
    const auto& steps = r.path->steps;
    REQUIRE(!steps.empty());
    CHECK(steps.front() == std::pair<int, int>{0, 0});
    CHECK(steps.back() ==
          std::pair<int, int>{static_cast<int>(ta - 1),
                              static_cast<int>(tb - 1)});
    double sum = 0.0;
    for (size_t k = 0; k < steps.size(); ++k) {
      if (k > 0) {
        const int di = steps[k].first - steps[k - 1].first;
        const int dj = steps[k].second - steps[k - 1].second;
        CHECK(di >= 0);
        CHECK(dj >= 0);
        CHECK(di <= 1);
        CHECK(dj <= 1);
        CHECK(di + dj >= 1);
      }
      sum += FrameDistance(na.unit_rows.row(steps[k].first).transpose(),
                           nb.unit_rows.row(steps[k].second).transpose());
    }
    CHECK(r.normalized_cost ==
          doctest::Approx(sum / static_cast<double>(steps.size()))
              .epsilon(1e-14));
    // Cost must not depend on whether the path is requested.
    CHECK(Dtw(na, nb).normalized_cost == r.normalized_cost);
  }
}

TEST_CASE("dtw agrees with exhaustive path enumeration") {
  Rng rng(42);
  for (int t = 0; t < 60; ++t) {
    const int64_t ta = 1 + static_cast<int64_t>(rng.UniformInt(5));
    const int64_t tb = 1 + static_cast<int64_t>(rng.UniformInt(5));
    Matrix a = RandomMatrix(ta, 3, &rng);
    Matrix b = RandomMatrix(tb, 3, &rng);
    const double fast = Dtw(NormalizeRows(a), NormalizeRows(b)).normalized_cost;
    const double slow = testing::BruteForceDtwCost(a, b);
    CHECK(std::abs(fast - slow) <= 1e-12);
  }
}

TEST_CASE("dtw is symmetric") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    NormalizedSequence na = NormalizeRows(RandomMatrix(
        1 + static_cast<int64_t>(rng.UniformInt(10)), 3, &rng));
    NormalizedSequence nb = NormalizeRows(RandomMatrix(
        1 + static_cast<int64_t>(rng.UniformInt(10)), 3, &rng));
    CHECK(std::abs(Dtw(na, nb).normalized_cost - Dtw(nb, na).normalized_cost) <=
          1e-12);
  }
}

TEST_CASE("dtw rejects empty and mismatched inputs") {
  NormalizedSequence ok = NormalizeRows(Matrix(Matrix::Ones(2, 3)));
  NormalizedSequence empty = NormalizeRows(Matrix(Matrix::Ones(0, 3)));
  NormalizedSequence other_dim = NormalizeRows(Matrix(Matrix::Ones(2, 4)));
  CHECK_THROWS_AS(Dtw(ok, empty), DomainError);
  CHECK_THROWS_AS(Dtw(empty, ok), DomainError);
  CHECK_THROWS_AS(Dtw(ok, other_dim), DomainError);
}

TEST_CASE("banded dtw with full band equals the unbanded cost exactly") {
  Rng rng(99);
  for (int t = 0; t < 20; ++t) {
    NormalizedSequence na = NormalizeRows(RandomMatrix(
        1 + static_cast<int64_t>(rng.UniformInt(15)), 3, &rng));
    NormalizedSequence nb = NormalizeRows(RandomMatrix(
        1 + static_cast<int64_t>(rng.UniformInt(15)), 3, &rng));
    CHECK(DtwCostBanded(na, nb, 1.0) == Dtw(na, nb).normalized_cost);
  }
}

TEST_CASE("banded dtw stays feasible for very different lengths") {
  Rng rng(3);
  NormalizedSequence na = NormalizeRows(RandomMatrix(3, 3, &rng));
  NormalizedSequence nb = NormalizeRows(RandomMatrix(40, 3, &rng));
  const double c = DtwCostBanded(na, nb, 0.1);
  CHECK(std::isfinite(c));
  CHECK(c >= 0.0);
  CHECK(c <= 2.0);
}

TEST_CASE("banded dtw rejects a band fraction outside (0, 1]") {
  NormalizedSequence n = NormalizeRows(Matrix(Matrix::Ones(2, 3)));
  CHECK_THROWS_AS(DtwCostBanded(n, n, 0.0), DomainError);
  CHECK_THROWS_AS(DtwCostBanded(n, n, 1.5), DomainError);
}

TEST_CASE("dtw cost is within the cosine distance range") {
  Rng rng(1234);
  for (int t = 0; t < 20; ++t) {
    NormalizedSequence na = NormalizeRows(RandomMatrix(
        1 + static_cast<int64_t>(rng.UniformInt(8)), 2, &rng));
    NormalizedSequence nb = NormalizeRows(RandomMatrix(
        1 + static_cast<int64_t>(rng.UniformInt(8)), 2, &rng));
    const double c = Dtw(na, nb).normalized_cost;
    CHECK(c >= 0.0);
    CHECK(c <= 2.0);
  }
}

}  // namespace
}  // namespace zrkit
