// src/evaluation.cc

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

#include "zrkit/evaluation.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "zrkit/dtw.h"
#include "zrkit/error.h"
#include "zrkit/parallel.h"

namespace zrkit {

namespace {

std::string FormatDouble(double value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

std::string JsonEscape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

void CheckCost(const PairCost& c) {
  if (c.category == PairCategory::kUtd)
    throw DomainError("evaluation: pair " + std::to_string(c.pair_index) +
                      " is UTD; same-different needs SW/DW labels");
  if (!std::isfinite(c.cost) || c.cost < 0.0)
    throw DomainError("evaluation: pair " + std::to_string(c.pair_index) +
                      " has invalid cost " + std::to_string(c.cost));
}

}  // namespace

std::vector<PairCost> ScorePairs(const std::vector<SegmentPair>& pairs,
                                 const std::vector<FeatureSequence>& archive,
                                 double band_fraction, int jobs) {
  if (!(band_fraction > 0.0) || band_fraction > 1.0)
    throw DomainError("evaluation: band_fraction must be in (0, 1]");
  for (size_t i = 0; i < pairs.size(); ++i)
    if (pairs[i].category == PairCategory::kUtd)
      throw DomainError("evaluation: pair " + std::to_string(i) +
                        " is UTD; same-different needs SW/DW labels");
  const ArchiveIndex index(archive);
  std::vector<PairCost> costs(pairs.size());
  ParallelFor(static_cast<int64_t>(pairs.size()), jobs, [&](int64_t i) {
    const NormalizedSequence a = NormalizeRows(index.Slice(pairs[i].a));
    const NormalizedSequence b = NormalizeRows(index.Slice(pairs[i].b));
    PairCost& out = costs[i];
    out.pair_index = i;
    out.category = pairs[i].category;
    out.cost = DtwCostBanded(a, b, band_fraction);
    if (!std::isfinite(out.cost))
      throw DomainError("evaluation: no alignment within the band for pair " +
                        std::to_string(i));
  });
  return costs;
}

std::vector<PrPoint> PrCurve(const std::vector<PairCost>& costs) {
  if (costs.empty()) throw DomainError("pr curve: no scored pairs");
  int64_t total_swdp = 0;
  for (const PairCost& c : costs) {
    CheckCost(c);
    if (c.category == PairCategory::kSameWordDifferentSpeaker) ++total_swdp;
  }
  if (total_swdp == 0)
    throw DomainError(
        "pr curve: no SW-DP pairs; the paper's recall is undefined");

  std::vector<const PairCost*> order(costs.size());
  for (size_t i = 0; i < costs.size(); ++i) order[i] = &costs[i];
  std::sort(order.begin(), order.end(),
            [](const PairCost* x, const PairCost* y) {
              return x->cost < y->cost;
            });

  std::vector<PrPoint> curve;
  int64_t m_all = 0, m_sw = 0, m_swdp = 0;
  for (size_t i = 0; i < order.size(); ++i) {
    ++m_all;
    switch (order[i]->category) {
      case PairCategory::kSameWordSameSpeaker:
        ++m_sw;
        break;
      case PairCategory::kSameWordDifferentSpeaker:
        ++m_sw;
        ++m_swdp;
        break;
      default:
        break;
    }
    // Emit one point per tie group, at the group's last member.
    if (i + 1 < order.size() && order[i + 1]->cost == order[i]->cost) continue;
    PrPoint p;
    p.threshold = order[i]->cost;
    p.m_all = m_all;
    p.m_sw = m_sw;
    p.m_swdp = m_swdp;
    p.precision = static_cast<double>(m_sw) / static_cast<double>(m_all);
    p.recall = static_cast<double>(m_swdp) / static_cast<double>(total_swdp);
    curve.push_back(p);
  }
  return curve;
}

double AveragePrecision(const std::vector<PrPoint>& curve) {
  if (curve.empty()) throw DomainError("average precision: empty curve");
  double ap = 0.0;
  double prev_recall = 0.0;
  for (const PrPoint& p : curve) {
    if (p.recall < prev_recall)
      throw DomainError("average precision: recall must be non-decreasing");
    if (p.precision < 0.0 || p.precision > 1.0 || p.recall > 1.0)
      throw DomainError("average precision: malformed curve point");
    ap += (p.recall - prev_recall) * p.precision;
    prev_recall = p.recall;
  }
  return ap;
}

EvalReport Evaluate(const std::vector<SegmentPair>& pairs,
                    const std::vector<FeatureSequence>& archive,
                    const std::string& feature_label, double band_fraction,
                    int jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  EvalReport report;
  report.feature_label = feature_label;
  report.num_pairs = static_cast<int64_t>(pairs.size());
  for (const SegmentPair& p : pairs) {
    switch (p.category) {
      case PairCategory::kSameWordSameSpeaker:
        ++report.counts.same_word_same_speaker;
        break;
      case PairCategory::kSameWordDifferentSpeaker:
        ++report.counts.same_word_diff_speaker;
        break;
      case PairCategory::kDifferentWord:
        ++report.counts.different_word;
        break;
      default:
        break;  // ScorePairs rejects UTD below
    }
  }
  report.counts.same_word = report.counts.same_word_same_speaker +
                            report.counts.same_word_diff_speaker;

  const std::vector<PairCost> costs =
      ScorePairs(pairs, archive, band_fraction, jobs);
  const auto t1 = std::chrono::steady_clock::now();
  report.curve = PrCurve(costs);
  report.average_precision = AveragePrecision(report.curve);
  const auto t2 = std::chrono::steady_clock::now();
  report.scoring_seconds = std::chrono::duration<double>(t1 - t0).count();
  report.total_seconds = std::chrono::duration<double>(t2 - t0).count();
  return report;
}

void SaveEvalReport(const std::string& path, const EvalReport& report,
                    bool include_curve, const std::string& config_echo) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create file '" + path + "'");
  out << "{\n";
  out << "  \"feature_label\": \"" << JsonEscape(report.feature_label)
      << "\",\n";
  out << "  \"ap\": " << FormatDouble(report.average_precision) << ",\n";
  out << "  \"num_pairs\": " << report.num_pairs << ",\n";
  out << "  \"counts\": {\n";
  out << "    \"same_word\": " << report.counts.same_word << ",\n";
  out << "    \"same_word_same_speaker\": "
      << report.counts.same_word_same_speaker << ",\n";
  out << "    \"same_word_diff_speaker\": "
      << report.counts.same_word_diff_speaker << ",\n";
  out << "    \"different_word\": " << report.counts.different_word << "\n";
  out << "  },\n";
  if (!config_echo.empty()) out << "  \"config\": " << config_echo << ",\n";
  out << "  \"scoring_seconds\": " << FormatDouble(report.scoring_seconds)
      << ",\n";
  out << "  \"total_seconds\": " << FormatDouble(report.total_seconds);
  if (include_curve) {
    out << ",\n  \"curve\": [\n";
    for (size_t i = 0; i < report.curve.size(); ++i) {
      const PrPoint& p = report.curve[i];
      out << "    {\"threshold\": " << FormatDouble(p.threshold)
          << ", \"precision\": " << FormatDouble(p.precision)
          << ", \"recall\": " << FormatDouble(p.recall)
          << ", \"m_all\": " << p.m_all << ", \"m_sw\": " << p.m_sw
          << ", \"m_swdp\": " << p.m_swdp << "}"
          << (i + 1 < report.curve.size() ? "," : "") << "\n";
    }
    out << "  ]";
  }
  out << "\n}\n";
  if (!out) throw IoError("failed writing '" + path + "'");
}

void SavePrCurveCsv(const std::string& path,
                    const std::vector<PrPoint>& curve) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create file '" + path + "'");
  out << "threshold,precision,recall,m_all,m_sw,m_swdp\n";
  for (const PrPoint& p : curve) {
    out << FormatDouble(p.threshold) << ',' << FormatDouble(p.precision)
        << ',' << FormatDouble(p.recall) << ',' << p.m_all << ',' << p.m_sw
        << ',' << p.m_swdp << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace zrkit
