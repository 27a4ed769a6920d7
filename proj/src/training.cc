// training.cc

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

#include "reslstm/training.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

#include "reslstm/error.h"
#include "reslstm/random.h"
#include "reslstm/reference.h"

namespace reslstm {

namespace {

template <typename F>
void zip_tensors(NetworkParams &a, const NetworkParams &b, F &&f) {
  std::vector<std::span<double>> dst;
  a.for_each([&](std::size_t, std::string_view, auto &t) { dst.push_back(t.values()); });
  std::size_t k = 0;
  b.for_each([&](std::size_t, std::string_view, const auto &t) {
    if (k >= dst.size() || dst[k].size() != t.size())
      throw DimensionError("parameter sets have different shapes");
    f(dst[k++], t.values());
  });
  if (k != dst.size()) throw DimensionError("parameter sets have different shapes");
}

// Rethrows `e` as the same error kind with the utterance id prepended.
std::exception_ptr tag_utterance(const std::string &id, std::exception_ptr e) {
  const std::string prefix = "utterance '" + id + "': ";
  try {
    std::rethrow_exception(e);
  } catch (const NumericError &err) {
    if (std::string(err.what()).rfind("utterance", 0) == 0) return e;
    return std::make_exception_ptr(NumericError(prefix + err.what()));
  } catch (const DimensionError &err) {
    return std::make_exception_ptr(DimensionError(prefix + err.what()));
  } catch (const ContractError &err) {
    if (std::string(err.what()).rfind("utterance", 0) == 0) return e;
    return std::make_exception_ptr(ContractError(prefix + err.what()));
  } catch (...) {
    return e;
  }
}

struct EpochItem {
  UtteranceGradient grad;
  std::exception_ptr error;
};

}  // namespace

void Hyperparams::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ContractError("learning rate must be finite and >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw ContractError("momentum must lie in [0, 1)");
  if (grad_clip && !(*grad_clip > 0.0))
    throw ContractError("gradient clip must be > 0");
  if (epochs < 1) throw ContractError("epochs must be >= 1");
  if (jobs < 1) throw ContractError("jobs must be >= 1");
  if (cell_clip < 0.0) throw ContractError("cell clip must be >= 0");
}

LossAndGradient softmax_ce(std::span<const double> logits, std::uint32_t label) {
  if (label >= logits.size())
    throw ContractError("softmax_ce: label " + std::to_string(label) +
                        " out of range for " + std::to_string(logits.size()) +
                        " classes");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  const double log_z = mx + std::log(sum);
  LossAndGradient out;
  out.loss = log_z - logits[label];
  out.d_logits = Vector(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k)
    out.d_logits[k] = std::exp(logits[k] - log_z);
  out.d_logits[label] -= 1.0;
  return out;
}

double global_norm(const NetworkParams &p) {
  double sq = 0.0;
  p.for_each([&sq](std::size_t, std::string_view, const auto &t) {
    for (double v : t.values()) sq += v * v;
  });
  return std::sqrt(sq);
}

void sgd_step(NetworkParams &params, const NetworkParams &grads,
              NetworkParams &velocity, const Hyperparams &hyper) {
  bool finite = true;
  grads.for_each([&finite](std::size_t, std::string_view, const auto &t) {
    finite = finite && all_finite(t.values());
  });
  if (!finite) throw NumericError("sgd_step: non-finite gradient, update skipped");

  double scale = 1.0;
  if (hyper.grad_clip) {
    const double norm = global_norm(grads);
    if (norm > *hyper.grad_clip) scale = *hyper.grad_clip / norm;
  }
  const double lr = hyper.learning_rate, mu = hyper.momentum;
  zip_tensors(velocity, grads, [&](std::span<double> v, std::span<const double> g) {
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = mu * v[k] - lr * (scale * g[k]);
  });
  zip_tensors(params, velocity, [](std::span<double> p, std::span<const double> v) {
    for (std::size_t k = 0; k < p.size(); ++k) p[k] += v[k];
  });
}

UtteranceGradient utterance_gradient(const NetworkParams &params,
                                     const NetworkConfig &config,
                                     const Utterance &utt,
                                     const CellOptions &options) {
  ForwardResult fr = forward(params, config, utt.frames, options);
  const std::size_t T = fr.logits.rows();
  if (utt.labels.size() != T)
    throw ContractError("utterance '" + utt.id + "': label count mismatch");
  UtteranceGradient out;
  out.frames = T;
  Matrix d_logits(T, config.n_out);
  const double inv_t = 1.0 / static_cast<double>(T);
  for (std::size_t t = 0; t < T; ++t) {
    LossAndGradient lg = softmax_ce(fr.logits.row(t), utt.labels[t]);
    out.loss_sum += lg.loss;
    auto row = d_logits.row(t);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = lg.d_logits[k] * inv_t;
  }
  if (!std::isfinite(out.loss_sum))
    throw NumericError("utterance '" + utt.id + "': non-finite loss");
  out.grads = backward(params, config, fr.trace, d_logits);
  return out;
}

TrainState TrainState::start(NetworkParams params) {
  TrainState s;
  s.velocity = params;
  s.velocity.for_each([](std::size_t, std::string_view, auto &t) { t.set_zero(); });
  s.params = std::move(params);
  return s;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t shuffle_seed,
                                     std::size_t epoch_index) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(shuffle_seed, epoch_index));
  for (std::size_t k = n; k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
  return order;
}

double train_epoch(TrainState &state, const NetworkConfig &config,
                   const std::vector<Utterance> &dataset,
                   const Hyperparams &hyper, std::size_t epoch_index) {
  hyper.validate();
  if (dataset.empty()) throw ContractError("train_epoch: empty dataset");
  const CellOptions options{hyper.cell_clip};
  const std::vector<std::size_t> order =
      epoch_order(dataset.size(), hyper.shuffle_seed, epoch_index);

  double loss_sum = 0.0;
  std::size_t frames = 0;
  std::vector<EpochItem> batch;
  for (std::size_t begin = 0; begin < order.size(); begin += hyper.jobs) {
    const std::size_t end = std::min(order.size(), begin + hyper.jobs);
    batch.assign(end - begin, {});
    auto work = [&](std::size_t slot) {
      const Utterance &utt = dataset[order[begin + slot]];
      try {
        batch[slot].grad = utterance_gradient(state.params, config, utt, options);
      } catch (...) {
        batch[slot].error = tag_utterance(utt.id, std::current_exception());
      }
    };
    if (batch.size() == 1) {
      work(0);
    } else {
      std::vector<std::thread> threads;
      for (std::size_t slot = 0; slot < batch.size(); ++slot)
        threads.emplace_back(work, slot);
      for (auto &th : threads) th.join();
    }
    for (EpochItem &item : batch) {
      if (item.error) std::rethrow_exception(item.error);
      loss_sum += item.grad.loss_sum;
      frames += item.grad.frames;
      sgd_step(state.params, item.grad.grads, state.velocity, hyper);
    }
  }
  return loss_sum / static_cast<double>(frames);
}

double evaluate(const NetworkParams &params, const NetworkConfig &config,
                const std::vector<Utterance> &dataset) {
  if (dataset.empty()) throw ContractError("evaluate: empty dataset");
  std::size_t wrong = 0, total = 0;
  for (const Utterance &utt : dataset) {
    const Matrix logits = forward(params, config, utt.frames).logits;
    for (std::size_t t = 0; t < logits.rows(); ++t)
      if (argmax(logits.row(t)) != utt.labels.at(t)) ++wrong;
    total += logits.rows();
  }
  return static_cast<double>(wrong) / static_cast<double>(total);
}

double evaluate_loss(const NetworkParams &params, const NetworkConfig &config,
                     const std::vector<Utterance> &dataset) {
  if (dataset.empty()) throw ContractError("evaluate_loss: empty dataset");
  double sum = 0.0;
  std::size_t total = 0;
  for (const Utterance &utt : dataset) {
    sum += sequence_loss(params, config, utt.frames, utt.labels);
    total += utt.frames.rows();
  }
  return sum / static_cast<double>(total);
}

std::string format_report(const EpochReport &r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "epoch=%zu loss=%.6f fer=%.6f", r.epoch, r.loss,
                r.fer);
  return buf;
}

std::vector<EpochReport> train(
    TrainState &state, const NetworkConfig &config,
    const std::vector<Utterance> &train_set,
    const std::vector<Utterance> &heldout, const Hyperparams &hyper,
    const std::function<void(const EpochReport &)> &on_epoch) {
  hyper.validate();
  std::vector<EpochReport> reports;
  for (std::size_t e = 0; e < hyper.epochs; ++e) {
    EpochReport r;
    r.epoch = e + 1;
    r.loss = train_epoch(state, config, train_set, hyper, e);
    r.fer = evaluate(state.params, config, heldout.empty() ? train_set : heldout);
    reports.push_back(r);
    if (on_epoch) on_epoch(r);
  }
  return reports;
}

double sequence_loss(const NetworkParams &params, const NetworkConfig &config,
                     const Matrix &inputs, std::span<const std::uint32_t> labels) {
  const Matrix logits = forward(params, config, inputs).logits;
  if (labels.size() != logits.rows())
    throw ContractError("sequence_loss: label count mismatch");
  double sum = 0.0;
  for (std::size_t t = 0; t < logits.rows(); ++t)
    sum += softmax_ce(logits.row(t), labels[t]).loss;
  return sum;
}

std::vector<double> numeric_gradient(const NetworkParams &params,
                                     const NetworkConfig &config,
                                     const Matrix &inputs,
                                     std::span<const std::uint32_t> labels,
                                     double eps) {
  ReferenceNetwork net(params, config);
  std::vector<double> grad(net.size());
  for (std::size_t k = 0; k < net.size(); ++k) {
    const long double saved = net[k];
    net[k] = saved + eps;
    const long double up = net.loss(inputs, labels);
    net[k] = saved - eps;
    const long double down = net.loss(inputs, labels);
    net[k] = saved;
    grad[k] = static_cast<double>((up - down) / (2.0L * eps));
  }
  return grad;
}

GradCheckResult grad_check_params(const NetworkParams &params,
                                  const NetworkConfig &config,
                                  const Matrix &inputs,
                                  std::span<const std::uint32_t> labels,
                                  double eps) {
  ForwardResult fr = forward(params, config, inputs);
  Matrix d_logits(fr.logits.rows(), config.n_out);
  for (std::size_t t = 0; t < fr.logits.rows(); ++t)
    d_logits.set_row(t, softmax_ce(fr.logits.row(t), labels[t]).d_logits.values());
  const std::vector<double> analytic =
      backward(params, config, fr.trace, d_logits).flatten();
  const std::vector<double> numeric =
      numeric_gradient(params, config, inputs, labels, eps);

  std::vector<std::string> names;
  params.for_each([&](std::size_t layer, std::string_view name, const auto &t) {
    for (std::size_t k = 0; k < t.size(); ++k)
      names.push_back("layer " + std::to_string(layer) + " " + std::string(name) +
                      "[" + std::to_string(k) + "]");
  });

  GradCheckResult result;
  result.checked = analytic.size();
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const double a = analytic[k], n = numeric[k];
    const double rel =
        std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8});
    if (result.worst.empty() || rel > result.max_rel_err) {
      result.max_rel_err = rel;
      result.worst = names[k];
    }
  }
  return result;
}

GradCheckResult grad_check(const NetworkConfig &config, std::uint64_t seed,
                           std::size_t T, double eps) {
  NetworkParams params = init_params(config, seed);
  Rng rng(derive_seed(seed, 7));
  params.for_each([&rng](std::size_t, std::string_view, auto &t) {
    if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Vector>)
      for (double &v : t.values()) v = rng.symmetric(0.5);
  });
  Matrix inputs(T, config.dims.n_x);
  for (double &v : inputs.values()) v = rng.normal();
  std::vector<std::uint32_t> labels(T);
  for (auto &l : labels) l = static_cast<std::uint32_t>(rng.below(config.n_out));
  return grad_check_params(params, config, inputs, labels, eps);
}

}  // namespace reslstm
