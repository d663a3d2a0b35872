// include/zrkit/cae.h

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

// Correspondence autoencoder: a tanh MLP trained in two phases. Layer-wise
// autoencoder pretraining grows the encoder one hidden layer at a time, each
// with a throwaway affine decoder; correspondence fine-tuning then trains the
// whole stack to map each frame of an aligned pair onto its partner. Learned
// features are read from the final hidden layer, before the affine output.
//
// All training arithmetic is 64-bit; feature archives and the frame-pair
// container stay 32-bit at the boundary. The reference path is
// single-threaded; with jobs > 1 each minibatch is split into fixed-size row
// blocks whose gradient partials are reduced in block order, so training is
// bit-identical for any jobs value.

#ifndef ZRKIT_CAE_H_
#define ZRKIT_CAE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "zrkit/pairs.h"
#include "zrkit/types.h"

namespace zrkit {

// Fully-connected stack: weights[k] maps layer_dims[k] -> layer_dims[k+1].
// Hidden layers apply tanh; the final layer is affine only.
struct MlpModel {
  std::vector<int64_t> layer_dims;
  std::vector<Matrix> weights;  // weights[k]: layer_dims[k+1] x layer_dims[k]
  std::vector<Vector> biases;   // biases[k]: layer_dims[k+1]

  int64_t NumWeightLayers() const {
    return static_cast<int64_t>(weights.size());
  }
  int64_t InputDim() const { return layer_dims.front(); }
  int64_t OutputDim() const { return layer_dims.back(); }

  // Shape consistency with layer_dims and finiteness of every parameter.
  void Validate() const;
};

struct CaeConfig {
  // Encoder stack: eight 100-unit layers and a 39-unit feature layer. The
  // affine output appended after pretraining maps back to the input size.
  std::vector<int64_t> hidden_dims = {100, 100, 100, 100, 100,
                                      100, 100, 100, 39};
  int64_t pretrain_epochs = 5;
  double pretrain_lr = 2.5e-4;
  int64_t finetune_epochs = 60;
  double finetune_lr = 2.5e-5;
  int64_t batch_size = 256;
  uint64_t seed = 0;

  void Validate() const;
};

struct TrainLogEntry {
  int64_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  uint64_t checksum = 0;  // parameter checksum after the epoch's updates
};

struct TrainLog {
  std::vector<TrainLogEntry> entries;
};

// Seeded uniform(-r, r) initialization with r = sqrt(6 / (fan_in + fan_out));
// biases start at zero. Requires at least two dims, all positive.
MlpModel InitMlp(const std::vector<int64_t>& layer_dims, uint64_t seed);

// Activations for every layer: result[0] is x itself, result[k+1] the output
// of weight layer k, so result.back() is the network output. Rows are
// independent examples.
std::vector<Matrix> MlpForward(const MlpModel& model, const Matrix& x);

struct MlpGradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

// Summed squared-error loss 1/2 sum_rows |f(x_i) - target_i|^2 and its
// gradients, both summed over the batch rows. grads may be null to get the
// loss alone.
double MlpLossAndGradients(const MlpModel& model, const Matrix& x,
                           const Matrix& target, MlpGradients* grads);

// FNV-1a over the bytes of every parameter in layer order (weights row by
// row, then the bias) — the TrainLog determinism witness.
uint64_t MlpChecksum(const MlpModel& model);

struct PretrainResult {
  MlpModel model;                    // encoder stack + untrained affine output
  std::vector<TrainLog> layer_logs;  // one log per trained hidden layer
};

// Grows the encoder layer by layer on the training frames (rows). Each stage
// trains (new layer + throwaway decoder) to reconstruct the frozen stack's
// output for pretrain_epochs of minibatch SGD at pretrain_lr.
PretrainResult PretrainLayerwise(const Matrix& frames, const CaeConfig& config,
                                 int jobs = 1);

struct FinetuneResult {
  MlpModel model;
  TrainLog log;
};

// Minibatch SGD on the frame pairs (inputs -> targets), reshuffled each epoch
// from the generator seeded by config.seed, for finetune_epochs at
// finetune_lr.
FinetuneResult FinetuneCorrespondence(const MlpModel& model,
                                      const FramePairSet& pairs,
                                      const CaeConfig& config, int jobs = 1);

// Per-frame activations of a hidden layer; hidden_layer = -1 selects the last
// hidden layer (the feature layer before the affine output). Valid indices
// are 1 .. NumWeightLayers() - 1. Timing fields and utterance id carry over.
FeatureSequence Encode(const MlpModel& model, const FeatureSequence& sequence,
                       int64_t hidden_layer = -1);

// ZRFA container: a leading __layer_dims__ record, then W1, b1, W2, b2, ...
// Parameters are stored as float32.
void SaveMlp(const std::string& path, const MlpModel& model);
MlpModel LoadMlp(const std::string& path);

// CSV with header `epoch,mean_loss,checksum`; the checksum is 16 hex digits.
void SaveTrainLog(const std::string& path, const TrainLog& log);
TrainLog LoadTrainLog(const std::string& path);

}  // namespace zrkit

#endif  // ZRKIT_CAE_H_
