// reslstm/training.h

// Copyright 2026  The reslstm Authors
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

#ifndef RESLSTM_TRAINING_H_
#define RESLSTM_TRAINING_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reslstm/data.h"
#include "reslstm/network.h"

namespace reslstm {

struct Hyperparams {
  double learning_rate = 0.005;
  double momentum = 0.9;
  std::optional<double> grad_clip = 5.0;  // global L2 norm bound
  std::size_t epochs = 20;
  std::uint64_t shuffle_seed = 1;
  // Utterances whose gradients are computed concurrently against one
  // parameter snapshot; updates are still applied one by one in order.
  std::size_t jobs = 1;
  double cell_clip = 0.0;

  /// Throws ContractError.
  void validate() const;
};

struct LossAndGradient {
  double loss = 0.0;
  Vector d_logits;
};

/// loss = logsumexp(logits) - logits[label], d = softmax(logits) - onehot.
/// Throws ContractError for an out-of-range label.
LossAndGradient softmax_ce(std::span<const double> logits, std::uint32_t label);

/// velocity = momentum·velocity - lr·g; params += velocity, with g rescaled
/// to global norm <= grad_clip when set. Throws NumericError (leaving params
/// and velocity untouched) if any gradient entry is non-finite.
void sgd_step(NetworkParams &params, const NetworkParams &grads,
              NetworkParams &velocity, const Hyperparams &hyper);

/// Global L2 norm over every tensor.
double global_norm(const NetworkParams &p);

struct UtteranceGradient {
  double loss_sum = 0.0;  // summed frame CE
  std::size_t frames = 0;
  NetworkParams grads;    // gradient of the frame-averaged CE
};

UtteranceGradient utterance_gradient(const NetworkParams &params,
                                     const NetworkConfig &config,
                                     const Utterance &utt,
                                     const CellOptions &options = {});

struct TrainState {
  NetworkParams params;
  NetworkParams velocity;

  static TrainState start(NetworkParams params);
};

/// Visit order for an epoch: a Fisher-Yates permutation seeded by
/// (shuffle_seed, epoch_index).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t shuffle_seed,
                                     std::size_t epoch_index);

/// One pass over `dataset` (network-ready frames), one update per utterance.
/// Returns the frame-averaged CE measured before each utterance's update.
double train_epoch(TrainState &state, const NetworkConfig &config,
                   const std::vector<Utterance> &dataset,
                   const Hyperparams &hyper, std::size_t epoch_index);

/// Fraction of frames whose argmax (lowest index on ties) misses the label.
double evaluate(const NetworkParams &params, const NetworkConfig &config,
                const std::vector<Utterance> &dataset);

/// Frame-averaged CE without updating anything.
double evaluate_loss(const NetworkParams &params, const NetworkConfig &config,
                     const std::vector<Utterance> &dataset);

struct EpochReport {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;
  double fer = 0.0;
};

/// `epoch=<k> loss=<f> fer=<f>`
std::string format_report(const EpochReport &r);

/// Runs hyper.epochs epochs; `on_epoch` sees each report as it is produced.
/// fer is measured on `heldout`, or on `train` when heldout is empty.
std::vector<EpochReport> train(
    TrainState &state, const NetworkConfig &config,
    const std::vector<Utterance> &train_set,
    const std::vector<Utterance> &heldout, const Hyperparams &hyper,
    const std::function<void(const EpochReport &)> &on_epoch = {});

// Finite-difference verification.

/// Summed CE over the frames of one sequence.
double sequence_loss(const NetworkParams &params, const NetworkConfig &config,
                     const Matrix &inputs, std::span<const std::uint32_t> labels);

/// Central differences (f(θ+eps) - f(θ-eps)) / 2eps for every parameter, in
/// NetworkParams::flatten() order. f is evaluated by ReferenceNetwork.
std::vector<double> numeric_gradient(const NetworkParams &params,
                                     const NetworkConfig &config,
                                     const Matrix &inputs,
                                     std::span<const std::uint32_t> labels,
                                     double eps);

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst;  // "layer <l> <tensor>[<index>]"
  std::size_t checked = 0;
};

/// max over parameters of |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult grad_check_params(const NetworkParams &params,
                                  const NetworkConfig &config,
                                  const Matrix &inputs,
                                  std::span<const std::uint32_t> labels,
                                  double eps);

/// Seeded network (biases and peepholes also randomized so every path is
/// exercised), standard-normal inputs of T frames and uniform labels.
GradCheckResult grad_check(const NetworkConfig &config, std::uint64_t seed,
                           std::size_t T, double eps);

}  // namespace reslstm

#endif  // RESLSTM_TRAINING_H_
