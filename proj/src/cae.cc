// src/cae.cc

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

#include "zrkit/cae.h"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "zrkit/error.h"
#include "zrkit/io.h"
#include "zrkit/parallel.h"
#include "zrkit/rng.h"

namespace zrkit {

namespace {

// Minibatches are processed in fixed row blocks whose gradient partials are
// reduced serially in block order. The decomposition depends only on the
// batch size, never on the worker count, so any jobs value reproduces the
// single-threaded result bit for bit.
constexpr int64_t kGradBlockRows = 64;

std::string FormatDouble(double value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

std::vector<std::string> SplitChar(const std::string& line, char sep) {
  std::vector<std::string> fields;
  size_t begin = 0;
  while (true) {
    const size_t pos = line.find(sep, begin);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(begin));
      return fields;
    }
    fields.push_back(line.substr(begin, pos - begin));
    begin = pos + 1;
  }
}

// One SGD update on a gathered minibatch; returns the batch's summed loss
// measured before the update.
double MinibatchStep(MlpModel* model, const Matrix& x, const Matrix& target,
                     double lr, int jobs) {
  const int64_t rows = x.rows();
  const int64_t blocks = (rows + kGradBlockRows - 1) / kGradBlockRows;
  std::vector<double> losses(blocks);
  std::vector<MlpGradients> partials(blocks);
  ParallelFor(blocks, jobs, [&](int64_t blk) {
    const int64_t begin = blk * kGradBlockRows;
    const int64_t n = std::min(kGradBlockRows, rows - begin);
    losses[blk] = MlpLossAndGradients(*model, x.middleRows(begin, n),
                                      target.middleRows(begin, n),
                                      &partials[blk]);
  });
  double loss = losses[0];
  MlpGradients total = std::move(partials[0]);
  for (int64_t blk = 1; blk < blocks; ++blk) {
    loss += losses[blk];
    for (int64_t k = 0; k < model->NumWeightLayers(); ++k) {
      total.weights[k] += partials[blk].weights[k];
      total.biases[k] += partials[blk].biases[k];
    }
  }
  const double scale = lr / static_cast<double>(rows);
  for (int64_t k = 0; k < model->NumWeightLayers(); ++k) {
    model->weights[k] -= scale * total.weights[k];
    model->biases[k] -= scale * total.biases[k];
  }
  return loss;
}

// Epoch loop shared by pretraining stages and fine-tuning. The index
// permutation is reshuffled from *shuffle at the top of every epoch.
TrainLog RunSgd(MlpModel* model, const Matrix& inputs, const Matrix& targets,
                int64_t epochs, double lr, int64_t batch_size, Rng* shuffle,
                int jobs) {
  const int64_t n = inputs.rows();
  std::vector<int64_t> perm(n);
  TrainLog log;
  for (int64_t epoch = 1; epoch <= epochs; ++epoch) {
    std::iota(perm.begin(), perm.end(), 0);
    shuffle->Shuffle(&perm);
    double total = 0.0;
    for (int64_t begin = 0; begin < n; begin += batch_size) {
      const int64_t b = std::min(batch_size, n - begin);
      Matrix xb(b, inputs.cols());
      Matrix tb(b, targets.cols());
      for (int64_t r = 0; r < b; ++r) {
        xb.row(r) = inputs.row(perm[begin + r]);
        tb.row(r) = targets.row(perm[begin + r]);
      }
      total += MinibatchStep(model, xb, tb, lr, jobs);
    }
    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.mean_loss = total / static_cast<double>(n);
    entry.checksum = MlpChecksum(*model);
    if (!std::isfinite(entry.mean_loss))
      throw DomainError("cae: non-finite training loss at epoch " +
                        std::to_string(epoch) + "; lower the learning rate");
    log.entries.push_back(entry);
  }
  return log;
}

// Output of one frozen tanh layer on a whole frame matrix.
Matrix TanhLayer(const Matrix& x, const Matrix& w, const Vector& b) {
  return ((x * w.transpose()).rowwise() + b.transpose()).array().tanh().matrix();
}

}  // namespace

void MlpModel::Validate() const {
  if (layer_dims.size() < 2)
    throw DomainError("mlp: need at least input and output dims");
  for (const int64_t d : layer_dims)
    if (d < 1) throw DomainError("mlp: non-positive layer dim");
  const size_t k = layer_dims.size() - 1;
  if (weights.size() != k || biases.size() != k)
    throw DomainError("mlp: expected " + std::to_string(k) +
                      " weight layers, got " + std::to_string(weights.size()) +
                      " weights and " + std::to_string(biases.size()) +
                      " biases");
  for (size_t l = 0; l < k; ++l) {
    if (weights[l].rows() != layer_dims[l + 1] ||
        weights[l].cols() != layer_dims[l] ||
        biases[l].size() != layer_dims[l + 1])
      throw DomainError("mlp: layer " + std::to_string(l + 1) +
                        " shape does not match layer_dims");
    if (!weights[l].allFinite() || !biases[l].allFinite())
      throw DomainError("mlp: non-finite parameter in layer " +
                        std::to_string(l + 1));
  }
}

void CaeConfig::Validate() const {
  if (hidden_dims.empty()) throw DomainError("cae config: no hidden layers");
  for (const int64_t d : hidden_dims)
    if (d < 1) throw DomainError("cae config: non-positive hidden dim");
  if (pretrain_epochs < 1 || finetune_epochs < 1)
    throw DomainError("cae config: epochs must be >= 1");
  if (!(pretrain_lr > 0.0) || !(finetune_lr > 0.0))
    throw DomainError("cae config: learning rates must be > 0");
  if (batch_size < 1) throw DomainError("cae config: batch_size must be >= 1");
}

MlpModel InitMlp(const std::vector<int64_t>& layer_dims, uint64_t seed) {
  if (layer_dims.size() < 2)
    throw DomainError("mlp init: need at least input and output dims");
  for (const int64_t d : layer_dims)
    if (d < 1) throw DomainError("mlp init: non-positive layer dim");
  MlpModel model;
  model.layer_dims = layer_dims;
  Rng rng(seed);
  for (size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const int64_t fan_in = layer_dims[l];
    const int64_t fan_out = layer_dims[l + 1];
    const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_out, fan_in);
    for (int64_t i = 0; i < fan_out; ++i)
      for (int64_t j = 0; j < fan_in; ++j) w(i, j) = rng.Uniform(-r, r);
    model.weights.push_back(std::move(w));
    model.biases.push_back(Vector::Zero(fan_out));
  }
  return model;
}

std::vector<Matrix> MlpForward(const MlpModel& model, const Matrix& x) {
  model.Validate();
  if (x.cols() != model.InputDim())
    throw DomainError("mlp forward: input has " + std::to_string(x.cols()) +
                      " dims, model expects " +
                      std::to_string(model.InputDim()));
  const int64_t layers = model.NumWeightLayers();
  std::vector<Matrix> acts;
  acts.reserve(layers + 1);
  acts.push_back(x);
  for (int64_t k = 0; k < layers; ++k) {
    Matrix z =
        (acts.back() * model.weights[k].transpose()).rowwise() +
        model.biases[k].transpose();
    if (k + 1 < layers) z = z.array().tanh().matrix();
    acts.push_back(std::move(z));
  }
  return acts;
}

double MlpLossAndGradients(const MlpModel& model, const Matrix& x,
                           const Matrix& target, MlpGradients* grads) {
  const std::vector<Matrix> acts = MlpForward(model, x);
  if (target.rows() != x.rows() || target.cols() != model.OutputDim())
    throw DomainError("mlp loss: target shape " + std::to_string(target.rows()) +
                      "x" + std::to_string(target.cols()) +
                      " does not match output");
  const int64_t layers = model.NumWeightLayers();
  Matrix delta = acts[layers] - target;
  const double loss = 0.5 * delta.squaredNorm();
  if (grads == nullptr) return loss;
  grads->weights.resize(layers);
  grads->biases.resize(layers);
  for (int64_t k = layers - 1; k >= 0; --k) {
    grads->weights[k] = delta.transpose() * acts[k];
    grads->biases[k] = delta.colwise().sum().transpose();
    if (k > 0)
      delta = (delta * model.weights[k])
                  .cwiseProduct((1.0 - acts[k].array().square()).matrix());
  }
  return loss;
}

uint64_t MlpChecksum(const MlpModel& model) {
  uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](double value) {
    uint64_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    for (int shift = 0; shift < 64; shift += 8) {
      h ^= (bits >> shift) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  for (int64_t k = 0; k < model.NumWeightLayers(); ++k) {
    const Matrix& w = model.weights[k];
    for (int64_t i = 0; i < w.rows(); ++i)
      for (int64_t j = 0; j < w.cols(); ++j) mix(w(i, j));
    for (int64_t i = 0; i < model.biases[k].size(); ++i)
      mix(model.biases[k](i));
  }
  return h;
}

PretrainResult PretrainLayerwise(const Matrix& frames, const CaeConfig& config,
                                 int jobs) {
  config.Validate();
  if (frames.rows() == 0) throw DomainError("pretrain: empty training set");
  const int64_t input_dim = frames.cols();
  if (input_dim < 1) throw DomainError("pretrain: frames have no dims");

  std::vector<int64_t> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), config.hidden_dims.begin(),
              config.hidden_dims.end());

  const Rng root(config.seed);
  PretrainResult result;
  result.model.layer_dims = dims;
  Matrix layer_input = frames;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::string tag = std::to_string(l + 1);
    // New hidden layer plus a throwaway decoder back to its input size.
    MlpModel stage =
        InitMlp({dims[l], dims[l + 1], dims[l]},
                root.Fork("pretrain-init-" + tag).NextUint64());
    Rng shuffle = root.Fork("pretrain-shuffle-" + tag);
    result.layer_logs.push_back(
        RunSgd(&stage, layer_input, layer_input, config.pretrain_epochs,
               config.pretrain_lr, config.batch_size, &shuffle, jobs));
    result.model.weights.push_back(stage.weights[0]);
    result.model.biases.push_back(stage.biases[0]);
    if (l + 2 < dims.size())
      layer_input = TanhLayer(layer_input, stage.weights[0], stage.biases[0]);
  }

  // Untrained affine output back to the input size, for fine-tuning.
  const MlpModel output_layer = InitMlp(
      {dims.back(), input_dim}, root.Fork("output-init").NextUint64());
  result.model.layer_dims.push_back(input_dim);
  result.model.weights.push_back(output_layer.weights[0]);
  result.model.biases.push_back(output_layer.biases[0]);
  result.model.Validate();
  return result;
}

FinetuneResult FinetuneCorrespondence(const MlpModel& model,
                                      const FramePairSet& pairs,
                                      const CaeConfig& config, int jobs) {
  config.Validate();
  model.Validate();
  if (pairs.NumPairs() == 0)
    throw DomainError("finetune: empty frame pair set");
  if (pairs.Dim() != model.InputDim() || pairs.Dim() != model.OutputDim())
    throw DomainError("finetune: pair dim " + std::to_string(pairs.Dim()) +
                      " does not match model dims " +
                      std::to_string(model.InputDim()) + " -> " +
                      std::to_string(model.OutputDim()));
  const Matrix inputs = pairs.inputs.cast<double>();
  const Matrix targets = pairs.targets.cast<double>();
  FinetuneResult result;
  result.model = model;
  Rng shuffle = Rng(config.seed).Fork("finetune-shuffle");
  result.log = RunSgd(&result.model, inputs, targets, config.finetune_epochs,
                      config.finetune_lr, config.batch_size, &shuffle, jobs);
  return result;
}

FeatureSequence Encode(const MlpModel& model, const FeatureSequence& sequence,
                       int64_t hidden_layer) {
  model.Validate();
  const int64_t layers = model.NumWeightLayers();
  if (layers < 2) throw DomainError("encode: model has no hidden layers");
  const int64_t layer = hidden_layer < 0 ? layers - 1 : hidden_layer;
  if (layer < 1 || layer > layers - 1)
    throw DomainError("encode: hidden layer " + std::to_string(layer) +
                      " out of range [1, " + std::to_string(layers - 1) + "]");
  if (sequence.Dim() != model.InputDim())
    throw DomainError("encode: sequence '" + sequence.utterance_id + "' has " +
                      std::to_string(sequence.Dim()) + " dims, model expects " +
                      std::to_string(model.InputDim()));
  Matrix a = sequence.frames.cast<double>();
  for (int64_t k = 0; k < layer; ++k)
    a = TanhLayer(a, model.weights[k], model.biases[k]);
  FeatureSequence out;
  out.utterance_id = sequence.utterance_id;
  out.frame_shift = sequence.frame_shift;
  out.frame_length = sequence.frame_length;
  out.frames = a.cast<float>();
  return out;
}

void SaveMlp(const std::string& path, const MlpModel& model) {
  model.Validate();
  std::vector<FeatureSequence> records;
  FeatureSequence meta;
  meta.utterance_id = "__layer_dims__";
  meta.frame_shift = meta.frame_length = 0.0;
  meta.frames = FloatMatrix(1, model.layer_dims.size());
  for (size_t j = 0; j < model.layer_dims.size(); ++j)
    meta.frames(0, j) = static_cast<float>(model.layer_dims[j]);
  records.push_back(std::move(meta));
  for (int64_t k = 0; k < model.NumWeightLayers(); ++k) {
    FeatureSequence w;
    w.utterance_id = "W" + std::to_string(k + 1);
    w.frame_shift = w.frame_length = 0.0;
    w.frames = model.weights[k].cast<float>();
    records.push_back(std::move(w));
    FeatureSequence b;
    b.utterance_id = "b" + std::to_string(k + 1);
    b.frame_shift = b.frame_length = 0.0;
    b.frames = model.biases[k].transpose().cast<float>();
    records.push_back(std::move(b));
  }
  WriteFeatureArchive(path, records);
}

MlpModel LoadMlp(const std::string& path) {
  const std::vector<FeatureSequence> records = ReadFeatureArchive(path);
  if (records.empty() || records[0].utterance_id != "__layer_dims__")
    throw IoError("mlp archive " + path +
                  ": expected a leading __layer_dims__ record");
  const FloatMatrix& meta = records[0].frames;
  if (meta.rows() != 1 || meta.cols() < 2)
    throw IoError("mlp archive " + path + ": malformed __layer_dims__");
  MlpModel model;
  for (int64_t j = 0; j < meta.cols(); ++j) {
    const float v = meta(0, j);
    if (v < 1.0f || v > 16777216.0f || v != std::floor(v))
      throw IoError("mlp archive " + path + ": corrupt layer dim " +
                    std::to_string(v));
    model.layer_dims.push_back(static_cast<int64_t>(v));
  }
  const size_t layers = model.layer_dims.size() - 1;
  if (records.size() != 1 + 2 * layers)
    throw IoError("mlp archive " + path + ": expected " +
                  std::to_string(1 + 2 * layers) + " records, found " +
                  std::to_string(records.size()));
  for (size_t k = 0; k < layers; ++k) {
    const FeatureSequence& w = records[1 + 2 * k];
    const FeatureSequence& b = records[2 + 2 * k];
    if (w.utterance_id != "W" + std::to_string(k + 1) ||
        b.utterance_id != "b" + std::to_string(k + 1))
      throw IoError("mlp archive " + path + ": unexpected record order at layer " +
                    std::to_string(k + 1));
    if (w.frames.rows() != model.layer_dims[k + 1] ||
        w.frames.cols() != model.layer_dims[k] || b.frames.rows() != 1 ||
        b.frames.cols() != model.layer_dims[k + 1])
      throw IoError("mlp archive " + path + ": layer " + std::to_string(k + 1) +
                    " shapes do not match __layer_dims__");
    model.weights.push_back(w.frames.cast<double>());
    model.biases.push_back(b.frames.row(0).transpose().cast<double>());
  }
  model.Validate();
  return model;
}

void SaveTrainLog(const std::string& path, const TrainLog& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot create file '" + path + "'");
  out << "epoch,mean_loss,checksum\n";
  for (const TrainLogEntry& e : log.entries) {
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016" PRIx64, e.checksum);
    out << e.epoch << ',' << FormatDouble(e.mean_loss) << ',' << hex << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

TrainLog LoadTrainLog(const std::string& path) {
  const std::vector<std::pair<int, std::string>> lines =
      ReadContentLines(path);
  if (lines.empty() || lines.front().second != "epoch,mean_loss,checksum")
    throw IoError("train log " + path +
                  ": missing 'epoch,mean_loss,checksum' header");
  TrainLog log;
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string context = path + ":" + std::to_string(lines[i].first);
    const std::vector<std::string> fields = SplitChar(lines[i].second, ',');
    if (fields.size() != 3)
      throw IoError(context + ": expected 3 comma-separated fields, got " +
                    std::to_string(fields.size()));
    TrainLogEntry e;
    e.epoch = ParseInt(fields[0], context);
    e.mean_loss = ParseDouble(fields[1], context);
    if (e.epoch < 1) throw IoError(context + ": epoch must be >= 1");
    if (!std::isfinite(e.mean_loss))
      throw IoError(context + ": non-finite mean_loss");
    if (fields[2].size() != 16)
      throw IoError(context + ": checksum must be 16 hex digits");
    const auto result = std::from_chars(
        fields[2].data(), fields[2].data() + fields[2].size(), e.checksum, 16);
    if (result.ec != std::errc() ||
        result.ptr != fields[2].data() + fields[2].size())
      throw IoError(context + ": malformed checksum '" + fields[2] + "'");
    log.entries.push_back(e);
  }
  return log;
}

}  // namespace zrkit
