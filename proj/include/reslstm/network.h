// reslstm/network.h

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

#ifndef RESLSTM_NETWORK_H_
#define RESLSTM_NETWORK_H_

#include <cstdint>
#include <string>
#include <vector>

#include "reslstm/cells.h"
#include "reslstm/linalg.h"

namespace reslstm {

// A stack of identical-width cell layers followed by one affine output layer
// (softmax lives in the loss). Layer 1 reads dims.n_x inputs; every deeper
// layer reads the full n_y-wide output of the layer below.
struct NetworkConfig {
  std::size_t depth = 1;
  CellDims dims;
  GateStyle style = GateStyle::kFast;
  ResidualVariant variant = ResidualVariant::kNone;
  std::size_t n_out = 2;

  /// Dims of layer `layer` (0-based), with n_x replaced by that layer's input.
  CellDims layer_dims(std::size_t layer) const;
  /// Throws DimensionError / ContractError on an invalid configuration.
  void validate() const;

  friend bool operator==(const NetworkConfig &, const NetworkConfig &) = default;
};

struct NetworkParams {
  std::vector<LayerParams> layers;
  Matrix w_out;  // n_out x n_y
  Vector b_out;  // n_out

  static NetworkParams zeros(const NetworkConfig &config);

  /// f(layer, name, tensor) over every tensor in model-file order; the output
  /// head is reported with layer == layers.size().
  template <typename F>
  void for_each(F &&f) {
    for_each_impl(*this, f);
  }
  template <typename F>
  void for_each(F &&f) const {
    for_each_impl(*this, f);
  }

  std::size_t num_params() const;
  /// All scalars in model-file order.
  std::vector<double> flatten() const;
  /// Inverse of flatten(); the size must match.
  void assign(const std::vector<double> &flat);

 private:
  template <typename Self, typename F>
  static void for_each_impl(Self &p, F &f) {
    for (std::size_t l = 0; l < p.layers.size(); ++l)
      p.layers[l].for_each(
          [&](std::string_view name, auto &t) { f(l, name, t); });
    f(p.layers.size(), std::string_view("W_out"), p.w_out);
    f(p.layers.size(), std::string_view("b_out"), p.b_out);
  }
};

/// Matrices uniform on [-1/sqrt(cols), 1/sqrt(cols)], biases and peepholes
/// zero. Bit-reproducible for a given seed on any platform.
NetworkParams init_params(const NetworkConfig &config, std::uint64_t seed);

struct ForwardTrace {
  // steps[t][layer]
  std::vector<std::vector<StepTrace>> steps;
};

struct ForwardResult {
  Matrix logits;  // T x n_out
  ForwardTrace trace;
};

/// Runs the stack over frames (T x n_x) from a zero initial state.
ForwardResult forward(const NetworkParams &params, const NetworkConfig &config,
                      const Matrix &frames, const CellOptions &options = {});

/// Backpropagation through time for d_logits (T x n_out). Returns gradients
/// shaped like params.
NetworkParams backward(const NetworkParams &params, const NetworkConfig &config,
                       const ForwardTrace &trace, const Matrix &d_logits);

/// Closed-form parameter count; equals NetworkParams::zeros(config).num_params().
std::uint64_t count_params(const NetworkConfig &config);

struct Model {
  NetworkConfig config;
  NetworkParams params;
};

/// RLM1 encoding: magic "RLM1", u32 version, config as u32 fields, then every
/// tensor as u32 rows, u32 cols and row-major f64 (vectors are n x 1).
std::vector<char> encode_model(const NetworkParams &params,
                               const NetworkConfig &config);
/// Throws FormatError (VersionError for an unknown version) with the byte
/// offset of the failure.
Model decode_model(const std::vector<char> &bytes);

void save_model(const NetworkParams &params, const NetworkConfig &config,
                const std::string &path);
Model load_model(const std::string &path);

inline constexpr std::uint32_t kModelVersion = 1;

}  // namespace reslstm

#endif  // RESLSTM_NETWORK_H_
