// tests/test_cae.cc

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
#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_support.h"
#include "zrkit/cae.h"
#include "zrkit/error.h"
#include "zrkit/io.h"
#include "zrkit/rng.h"

namespace zrkit {
namespace {

Matrix RandomMatrix(int64_t rows, int64_t cols, Rng* rng, double lo = -1.0,
                    double hi = 1.0) {
  Matrix m(rows, cols);
  for (int64_t i = 0; i < rows; ++i)
    for (int64_t j = 0; j < cols; ++j) m(i, j) = rng->Uniform(lo, hi);
  return m;
}

bool BitEqualModels(const MlpModel& a, const MlpModel& b) {
  if (a.layer_dims != b.layer_dims) return false;
  for (int64_t k = 0; k < a.NumWeightLayers(); ++k) {
    if (!(a.weights[k].array() == b.weights[k].array()).all()) return false;
    if (!(a.biases[k].array() == b.biases[k].array()).all()) return false;
  }
  return true;
}

bool SameLog(const TrainLog& a, const TrainLog& b) {
  if (a.entries.size() != b.entries.size()) return false;
  for (size_t i = 0; i < a.entries.size(); ++i) {
    if (a.entries[i].epoch != b.entries[i].epoch) return false;
    if (a.entries[i].mean_loss != b.entries[i].mean_loss) return false;
    if (a.entries[i].checksum != b.entries[i].checksum) return false;
  }
  return true;
}

FramePairSet PairsFromMatrices(const Matrix& inputs, const Matrix& targets,
                               uint64_t seed) {
  FramePairSet set;
  set.seed = seed;
  set.inputs = inputs.cast<float>();
  set.targets = targets.cast<float>();
  return set;
}

TEST_CASE("initialization draws bounded weights and zero biases") {
  const MlpModel model = InitMlp({39, 100}, 7);
  REQUIRE(model.NumWeightLayers() == 1);
  CHECK(model.weights[0].rows() == 100);
  CHECK(model.weights[0].cols() == 39);
  CHECK(model.biases[0].size() == 100);
  const double bound = std::sqrt(6.0 / 139.0);
  CHECK(model.weights[0].cwiseAbs().maxCoeff() < bound);
  CHECK(model.biases[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK_NOTHROW(model.Validate());

  CHECK(BitEqualModels(InitMlp({5, 8, 3}, 42), InitMlp({5, 8, 3}, 42)));
  CHECK_FALSE(BitEqualModels(InitMlp({5, 8, 3}, 42), InitMlp({5, 8, 3}, 43)));
  CHECK(MlpChecksum(InitMlp({5, 8, 3}, 42)) !=
        MlpChecksum(InitMlp({5, 8, 3}, 43)));

  CHECK_THROWS_AS(InitMlp({39}, 0), DomainError);
  CHECK_THROWS_AS(InitMlp({39, 0, 39}, 0), DomainError);
}

TEST_CASE("forward pass matches closed forms") {
  // All-zero parameters map anything to zero.
  MlpModel zero = InitMlp({3, 4, 2}, 1);
  for (auto& w : zero.weights) w.setZero();
  Rng rng(5);
  const Matrix x = RandomMatrix(6, 3, &rng);
  CHECK(MlpForward(zero, x).back().cwiseAbs().maxCoeff() == 0.0);

  // A single affine layer with identity weights is the identity map.
  MlpModel ident = InitMlp({3, 3}, 1);
  ident.weights[0] = Matrix::Identity(3, 3);
  ident.biases[0].setZero();
  CHECK((MlpForward(ident, x).back().array() == x.array()).all());

  // Hidden layers saturate inside (-1, 1).
  const MlpModel model = InitMlp({3, 16, 8, 3}, 9);
  const std::vector<Matrix> acts = MlpForward(model, x);
  REQUIRE(acts.size() == 4);
  CHECK(acts[1].cwiseAbs().maxCoeff() < 1.0);
  CHECK(acts[2].cwiseAbs().maxCoeff() < 1.0);

  CHECK_THROWS_WITH_AS(MlpForward(model, RandomMatrix(2, 5, &rng)),
                       doctest::Contains("dims"), DomainError);
}

TEST_CASE("batch forward equals stacked per-row forwards") {
  Rng rng(20);
  const MlpModel model = InitMlp({5, 9, 4}, 77);
  const Matrix x = RandomMatrix(12, 5, &rng, -2.0, 2.0);
  const Matrix batch = MlpForward(model, x).back();
  for (int64_t r = 0; r < x.rows(); ++r) {
    const Matrix single = MlpForward(model, x.row(r)).back();
    CHECK((batch.row(r) - single.row(0)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("loss and gradients match hand computations") {
  // Perfect reconstruction: zero loss, zero gradients.
  Rng rng(3);
  const MlpModel model = InitMlp({4, 6, 4}, 2);
  const Matrix x = RandomMatrix(3, 4, &rng);
  const Matrix target = MlpForward(model, x).back();
  MlpGradients grads;
  CHECK(MlpLossAndGradients(model, x, target, &grads) == 0.0);
  for (int64_t k = 0; k < model.NumWeightLayers(); ++k) {
    CHECK(grads.weights[k].cwiseAbs().maxCoeff() == 0.0);
    CHECK(grads.biases[k].cwiseAbs().maxCoeff() == 0.0);
  }

  // Scalar affine network: x = 1, x' = 0, W = 1, b = 0.
  MlpModel scalar = InitMlp({1, 1}, 0);
  scalar.weights[0](0, 0) = 1.0;
  scalar.biases[0](0) = 0.0;
  Matrix one(1, 1), zero_t(1, 1);
  one(0, 0) = 1.0;
  zero_t(0, 0) = 0.0;
  CHECK(MlpLossAndGradients(scalar, one, zero_t, &grads) == 0.5);
  CHECK(grads.weights[0](0, 0) == 1.0);
  CHECK(grads.biases[0](0) == 1.0);

  CHECK_THROWS_AS(MlpLossAndGradients(model, x, RandomMatrix(3, 2, &rng),
                                      &grads),
                  DomainError);
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(404);
  const MlpModel model = InitMlp({39, 100, 39}, 21);
  const Matrix x = RandomMatrix(2, 39, &rng);
  const Matrix target = RandomMatrix(2, 39, &rng);
  MlpGradients grads;
  MlpLossAndGradients(model, x, target, &grads);

  const double h = 1e-5;
  const auto probe = [&](int64_t k, int64_t i, int64_t j, bool bias) {
    MlpModel plus = model;
    MlpModel minus = model;
    double analytic;
    if (bias) {
      plus.biases[k](i) += h;
      minus.biases[k](i) -= h;
      analytic = grads.biases[k](i);
    } else {
      plus.weights[k](i, j) += h;
      minus.weights[k](i, j) -= h;
      analytic = grads.weights[k](i, j);
    }
    const double numeric =
        (MlpLossAndGradients(plus, x, target, nullptr) -
         MlpLossAndGradients(minus, x, target, nullptr)) /
        (2.0 * h);
    const double scale = std::max({std::abs(analytic), std::abs(numeric),
                                   1e-8});
    CHECK(std::abs(analytic - numeric) / scale <= 1e-4);
  };
  for (int trial = 0; trial < 20; ++trial) {
    const int64_t k = static_cast<int64_t>(rng.UniformInt(2));
    const int64_t rows = model.weights[k].rows();
    const int64_t cols = model.weights[k].cols();
    probe(k, static_cast<int64_t>(rng.UniformInt(rows)),
          static_cast<int64_t>(rng.UniformInt(cols)), false);
  }
  for (int trial = 0; trial < 5; ++trial) {
    const int64_t k = static_cast<int64_t>(rng.UniformInt(2));
    probe(k, static_cast<int64_t>(rng.UniformInt(model.biases[k].size())), 0,
          true);
  }
}

TEST_CASE("a small SGD step decreases the example's loss") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    MlpModel model = InitMlp({4, 6, 3}, 100 + trial);
    const Matrix x = RandomMatrix(1, 4, &rng);
    const Matrix target = RandomMatrix(1, 3, &rng, 1.5, 2.5);  // unreachable
    MlpGradients grads;
    const double before = MlpLossAndGradients(model, x, target, &grads);
    REQUIRE(before > 0.0);
    const double eps = 1e-6;
    for (int64_t k = 0; k < model.NumWeightLayers(); ++k) {
      model.weights[k] -= eps * grads.weights[k];
      model.biases[k] -= eps * grads.biases[k];
    }
    CHECK(MlpLossAndGradients(model, x, target, nullptr) < before);
  }
}

TEST_CASE("config defaults carry the published training recipe") {
  const CaeConfig config;
  REQUIRE(config.hidden_dims.size() == 9);
  for (size_t l = 0; l + 1 < config.hidden_dims.size(); ++l)
    CHECK(config.hidden_dims[l] == 100);
  CHECK(config.hidden_dims.back() == 39);
  CHECK(config.pretrain_epochs == 5);
  CHECK(config.pretrain_lr == 2.5e-4);
  CHECK(config.finetune_epochs == 60);
  CHECK(config.finetune_lr == 2.5e-5);
  CHECK(config.batch_size == 256);
  CHECK_NOTHROW(config.Validate());

  CaeConfig bad = config;
  bad.hidden_dims.clear();
  CHECK_THROWS_AS(bad.Validate(), DomainError);
  bad = config;
  bad.pretrain_lr = 0.0;
  CHECK_THROWS_AS(bad.Validate(), DomainError);
  bad = config;
  bad.finetune_epochs = 0;
  CHECK_THROWS_AS(bad.Validate(), DomainError);
  bad = config;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.Validate(), DomainError);
}

CaeConfig SmallConfig() {
  CaeConfig config;
  config.hidden_dims = {4, 2};
  config.pretrain_epochs = 6;
  config.pretrain_lr = 0.01;
  config.finetune_epochs = 12;
  config.finetune_lr = 0.01;
  config.batch_size = 8;
  config.seed = 3;
  return config;
}

TEST_CASE("layerwise pretraining reconstructs a repeated frame") {
  Matrix frames(16, 3);
  for (int64_t i = 0; i < frames.rows(); ++i)
    frames.row(i) << 0.3, -0.2, 0.7;
  const CaeConfig config = SmallConfig();
  const PretrainResult result = PretrainLayerwise(frames, config);

  const std::vector<int64_t> want_dims = {3, 4, 2, 3};
  CHECK(result.model.layer_dims == want_dims);
  REQUIRE(result.layer_logs.size() == 2);
  for (const TrainLog& log : result.layer_logs) {
    REQUIRE(static_cast<int64_t>(log.entries.size()) ==
            config.pretrain_epochs);
    for (size_t e = 0; e < log.entries.size(); ++e)
      CHECK(log.entries[e].epoch == static_cast<int64_t>(e + 1));
    CHECK(log.entries.back().mean_loss <= log.entries.front().mean_loss);
  }

  CHECK_THROWS_WITH_AS(PretrainLayerwise(Matrix(0, 3), config),
                       doctest::Contains("empty"), DomainError);
}

TEST_CASE("pretraining is reproducible from the seed") {
  Rng rng(88);
  const Matrix frames = RandomMatrix(40, 3, &rng);
  CaeConfig config = SmallConfig();
  const PretrainResult a = PretrainLayerwise(frames, config);
  const PretrainResult b = PretrainLayerwise(frames, config);
  CHECK(BitEqualModels(a.model, b.model));
  REQUIRE(a.layer_logs.size() == b.layer_logs.size());
  for (size_t l = 0; l < a.layer_logs.size(); ++l)
    CHECK(SameLog(a.layer_logs[l], b.layer_logs[l]));

  config.seed = 4;
  const PretrainResult c = PretrainLayerwise(frames, config);
  CHECK_FALSE(BitEqualModels(a.model, c.model));
}

TEST_CASE("correspondence fine-tuning lowers the training loss") {
  Rng rng(12);
  const Matrix frames = RandomMatrix(40, 3, &rng);
  const CaeConfig config = SmallConfig();
  const PretrainResult pre = PretrainLayerwise(frames, config);

  // Autoencoding pairs: each frame is its own correspondence partner.
  const FramePairSet pairs = PairsFromMatrices(frames, frames, 9);
  const FinetuneResult fine = FinetuneCorrespondence(pre.model, pairs, config);
  REQUIRE(static_cast<int64_t>(fine.log.entries.size()) ==
          config.finetune_epochs);
  CHECK(fine.log.entries.back().mean_loss <
        fine.log.entries.front().mean_loss);
  // The checksum column witnesses that parameters actually moved.
  CHECK(fine.log.entries.back().checksum != MlpChecksum(pre.model));

  CHECK_THROWS_WITH_AS(
      FinetuneCorrespondence(pre.model, PairsFromMatrices(Matrix(0, 3),
                                                          Matrix(0, 3), 0),
                             config),
      doctest::Contains("empty"), DomainError);
  CHECK_THROWS_WITH_AS(
      FinetuneCorrespondence(pre.model,
                             PairsFromMatrices(RandomMatrix(4, 5, &rng),
                                               RandomMatrix(4, 5, &rng), 0),
                             config),
      doctest::Contains("dim"), DomainError);
}

TEST_CASE("training is bit-identical for any worker count") {
  Rng rng(55);
  const MlpModel model = InitMlp({4, 6, 4, 4}, 1);
  const FramePairSet pairs = PairsFromMatrices(RandomMatrix(200, 4, &rng),
                                               RandomMatrix(200, 4, &rng), 0);
  CaeConfig config;
  config.hidden_dims = {6, 4};
  config.finetune_epochs = 3;
  config.finetune_lr = 1e-3;
  config.batch_size = 112;  // splits into 64 + 48 row blocks
  config.seed = 2;
  const FinetuneResult serial = FinetuneCorrespondence(model, pairs, config, 1);
  const FinetuneResult parallel =
      FinetuneCorrespondence(model, pairs, config, 3);
  CHECK(SameLog(serial.log, parallel.log));
  CHECK(BitEqualModels(serial.model, parallel.model));
}

TEST_CASE("encode reads the final hidden layer framewise") {
  const MlpModel model = InitMlp({3, 6, 4, 3}, 11);
  Rng rng(61);
  FeatureSequence seq;
  seq.utterance_id = "utt1";
  seq.frames = RandomMatrix(5, 3, &rng).cast<float>();

  const FeatureSequence enc = Encode(model, seq);
  CHECK(enc.utterance_id == "utt1");
  CHECK(enc.NumFrames() == 5);
  CHECK(enc.Dim() == 4);  // last hidden layer
  CHECK(enc.frame_shift == seq.frame_shift);
  CHECK(enc.frames.cwiseAbs().maxCoeff() < 1.0f);  // tanh range

  // Layer override picks an earlier hidden layer.
  CHECK(Encode(model, seq, 1).Dim() == 6);
  CHECK_THROWS_WITH_AS(Encode(model, seq, 3), doctest::Contains("out of range"),
                       DomainError);
  CHECK_THROWS_AS(Encode(model, seq, 0), DomainError);

  // Single-frame input keeps its shape.
  FeatureSequence single = seq;
  single.frames = seq.frames.topRows(1);
  CHECK(Encode(model, single).NumFrames() == 1);

  // Framewise: encoding a concatenation concatenates the encodings.
  FeatureSequence head = seq, tail = seq;
  head.frames = seq.frames.topRows(2);
  tail.frames = seq.frames.bottomRows(3);
  const FeatureSequence enc_head = Encode(model, head);
  const FeatureSequence enc_tail = Encode(model, tail);
  CHECK((enc.frames.topRows(2).array() == enc_head.frames.array()).all());
  CHECK((enc.frames.bottomRows(3).array() == enc_tail.frames.array()).all());

  // Permuting input frames permutes output frames identically.
  FeatureSequence reversed = seq;
  reversed.frames = seq.frames.colwise().reverse();
  const FeatureSequence enc_rev = Encode(model, reversed);
  for (int64_t t = 0; t < 5; ++t)
    CHECK((enc_rev.frames.row(t).array() == enc.frames.row(4 - t).array())
              .all());

  FeatureSequence bad = seq;
  bad.frames = RandomMatrix(5, 2, &rng).cast<float>();
  CHECK_THROWS_WITH_AS(Encode(model, bad), doctest::Contains("dims"),
                       DomainError);
  CHECK_THROWS_WITH_AS(Encode(InitMlp({3, 3}, 0), seq),
                       doctest::Contains("hidden"), DomainError);
}

TEST_CASE("models round trip through the archive container") {
  MlpModel model = InitMlp({4, 7, 5, 4}, 9);
  for (int64_t k = 0; k < model.NumWeightLayers(); ++k)
    model.biases[k].setConstant(0.25 * static_cast<double>(k + 1));

  testing::TempDir dir;
  const std::string path = dir.Path("model.zrfa");
  SaveMlp(path, model);
  const MlpModel loaded = LoadMlp(path);
  CHECK(loaded.layer_dims == model.layer_dims);
  for (int64_t k = 0; k < model.NumWeightLayers(); ++k) {
    for (int64_t i = 0; i < model.weights[k].rows(); ++i)
      for (int64_t j = 0; j < model.weights[k].cols(); ++j)
        CHECK(loaded.weights[k](i, j) ==
              static_cast<double>(static_cast<float>(model.weights[k](i, j))));
    CHECK((loaded.biases[k].array() == model.biases[k].array()).all());
  }

  // Saving the loaded model reproduces the file byte for byte.
  const std::string path2 = dir.Path("model2.zrfa");
  SaveMlp(path2, loaded);
  CHECK(testing::ReadBytes(path) == testing::ReadBytes(path2));
}

TEST_CASE("malformed model archives are rejected") {
  testing::TempDir dir;
  const std::string path = dir.Path("model.zrfa");

  // No leading metadata record.
  std::vector<FeatureSequence> records(1);
  records[0].utterance_id = "W1";
  records[0].frames = FloatMatrix::Zero(2, 2);
  WriteFeatureArchive(path, records);
  CHECK_THROWS_WITH_AS(LoadMlp(path), doctest::Contains("__layer_dims__"),
                       IoError);

  // Record count disagrees with layer_dims.
  const MlpModel model = InitMlp({3, 4, 3}, 5);
  SaveMlp(path, model);
  std::vector<FeatureSequence> truncated = ReadFeatureArchive(path);
  truncated.pop_back();
  WriteFeatureArchive(path, truncated);
  CHECK_THROWS_WITH_AS(LoadMlp(path), doctest::Contains("records"), IoError);

  // Swapped record order.
  std::vector<FeatureSequence> swapped = ReadFeatureArchive(
      (SaveMlp(dir.Path("m.zrfa"), model), dir.Path("m.zrfa")));
  std::swap(swapped[1].utterance_id, swapped[2].utterance_id);
  WriteFeatureArchive(path, swapped);
  CHECK_THROWS_WITH_AS(LoadMlp(path), doctest::Contains("order"), IoError);

  // Weight shape contradicts the dims record.
  std::vector<FeatureSequence> reshaped = ReadFeatureArchive(dir.Path("m.zrfa"));
  reshaped[1].frames = FloatMatrix::Zero(4, 4);
  WriteFeatureArchive(path, reshaped);
  CHECK_THROWS_WITH_AS(LoadMlp(path), doctest::Contains("shapes"), IoError);

  // Non-integral layer dim.
  std::vector<FeatureSequence> corrupt = ReadFeatureArchive(dir.Path("m.zrfa"));
  corrupt[0].frames(0, 0) = 3.5f;
  WriteFeatureArchive(path, corrupt);
  CHECK_THROWS_WITH_AS(LoadMlp(path), doctest::Contains("layer dim"), IoError);
}

TEST_CASE("train logs round trip through CSV") {
  Rng rng(71);
  const Matrix frames = RandomMatrix(30, 3, &rng);
  CaeConfig config = SmallConfig();
  config.finetune_epochs = 4;
  const PretrainResult pre = PretrainLayerwise(frames, config);
  const FinetuneResult fine = FinetuneCorrespondence(
      pre.model, PairsFromMatrices(frames, frames, 1), config);

  testing::TempDir dir;
  const std::string path = dir.Path("log.csv");
  SaveTrainLog(path, fine.log);
  const TrainLog loaded = LoadTrainLog(path);
  CHECK(SameLog(fine.log, loaded));

  testing::WriteText(path, "1,0.5,0123456789abcdef\n");
  CHECK_THROWS_WITH_AS(LoadTrainLog(path), doctest::Contains("header"),
                       IoError);
  testing::WriteText(path, "epoch,mean_loss,checksum\n1,0.5\n");
  CHECK_THROWS_WITH_AS(LoadTrainLog(path), doctest::Contains("3"), IoError);
  testing::WriteText(path, "epoch,mean_loss,checksum\n0,0.5,0123456789abcdef\n");
  CHECK_THROWS_WITH_AS(LoadTrainLog(path), doctest::Contains("epoch"), IoError);
  testing::WriteText(path, "epoch,mean_loss,checksum\n1,0.5,012345\n");
  CHECK_THROWS_WITH_AS(LoadTrainLog(path), doctest::Contains("16 hex"),
                       IoError);
  testing::WriteText(path,
                     "epoch,mean_loss,checksum\n1,0.5,0123456789abcdeg\n");
  CHECK_THROWS_AS(LoadTrainLog(path), IoError);
  testing::WriteText(path, "epoch,mean_loss,checksum\n1,inf,0123456789abcdef\n");
  CHECK_THROWS_AS(LoadTrainLog(path), IoError);
}

}  // namespace
}  // namespace zrkit
