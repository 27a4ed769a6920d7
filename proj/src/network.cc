// network.cc

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

#include "reslstm/network.h"

#include <cmath>
#include <string>

#include "binary_io.h"
#include "reslstm/error.h"
#include "reslstm/random.h"

namespace reslstm {

namespace {

constexpr std::string_view kModelMagic = "RLM1";


}  // namespace

CellDims NetworkConfig::layer_dims(std::size_t layer) const {
  CellDims d = dims;
  if (layer > 0) d.n_x = dims.n_y();
  return d;
}

void NetworkConfig::validate() const {
  if (depth < 1) throw ContractError("NetworkConfig: depth must be >= 1");
  if (n_out < 2) throw ContractError("NetworkConfig: n_out must be >= 2");
  dims.validate();
  if (static_cast<int>(style) < 0 || static_cast<int>(style) > 1)
    throw ContractError("NetworkConfig: bad gate style");
  if (static_cast<int>(variant) < 0 || static_cast<int>(variant) > 3)
    throw ContractError("NetworkConfig: bad residual variant");
}

NetworkParams NetworkParams::zeros(const NetworkConfig &config) {
  config.validate();
  NetworkParams p;
  p.layers.reserve(config.depth);
  for (std::size_t l = 0; l < config.depth; ++l)
    p.layers.push_back(
        LayerParams::zeros(config.layer_dims(l), config.style, config.variant));
  p.w_out = Matrix(config.n_out, config.dims.n_y());
  p.b_out = Vector(config.n_out);
  return p;
}

std::size_t NetworkParams::num_params() const {
  std::size_t n = 0;
  for_each([&n](std::size_t, std::string_view, const auto &t) { n += t.size(); });
  return n;
}

std::vector<double> NetworkParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(num_params());
  for_each([&flat](std::size_t, std::string_view, const auto &t) {
    flat.insert(flat.end(), t.values().begin(), t.values().end());
  });
  return flat;
}

void NetworkParams::assign(const std::vector<double> &flat) {
  if (flat.size() != num_params())
    throw DimensionError("NetworkParams::assign: " +
                         std::to_string(flat.size()) + " values for " +
                         std::to_string(num_params()) + " parameters");
  std::size_t pos = 0;
  for_each([&](std::size_t, std::string_view, auto &t) {
    auto v = t.values();
    std::copy(flat.begin() + pos, flat.begin() + pos + v.size(), v.begin());
    pos += v.size();
  });
}

NetworkParams init_params(const NetworkConfig &config, std::uint64_t seed) {
  NetworkParams p = NetworkParams::zeros(config);
  Rng rng(seed);
  auto fill = [&rng](Matrix &m) {
    const double s = 1.0 / std::sqrt(static_cast<double>(m.cols()));
    for (double &v : m.values()) v = rng.symmetric(s);
  };
  p.for_each([&](std::size_t, std::string_view, auto &t) {
    if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Matrix>) fill(t);
  });
  return p;
}

ForwardResult forward(const NetworkParams &params, const NetworkConfig &config,
                      const Matrix &frames, const CellOptions &options) {
  config.validate();
  if (frames.rows() < 1)
    throw DimensionError("forward: need at least one frame");
  if (frames.cols() != config.dims.n_x)
    throw DimensionError("forward: frames have " +
                         std::to_string(frames.cols()) +
                         " columns, network expects n_x=" +
                         std::to_string(config.dims.n_x));
  if (params.layers.size() != config.depth)
    throw DimensionError("forward: params have " +
                         std::to_string(params.layers.size()) +
                         " layers, config depth is " +
                         std::to_string(config.depth));

  const std::size_t T = frames.rows();
  ForwardResult out;
  out.logits = Matrix(T, config.n_out);
  out.trace.steps.resize(T);

  std::vector<CellState> states;
  for (std::size_t l = 0; l < config.depth; ++l)
    states.push_back(CellState::zeros(config.layer_dims(l)));

  for (std::size_t t = 0; t < T; ++t) {
    auto &step_traces = out.trace.steps[t];
    step_traces.reserve(config.depth);
    Vector input = frames.row_vector(t);
    for (std::size_t l = 0; l < config.depth; ++l) {
      StepOutput s = cell_step(config.layer_dims(l), config.style,
                               config.variant, params.layers[l], input,
                               states[l], options, t);
      states[l] = std::move(s.state);
      input = std::move(s.y);
      step_traces.push_back(std::move(s.trace));
    }
    out.logits.set_row(t, affine(params.w_out, input, params.b_out).values());
  }
  return out;
}

NetworkParams backward(const NetworkParams &params, const NetworkConfig &config,
                       const ForwardTrace &trace, const Matrix &d_logits) {
  const std::size_t T = trace.steps.size();
  if (d_logits.rows() != T || d_logits.cols() != config.n_out)
    throw ContractError("backward: d_logits is " +
                        std::to_string(d_logits.rows()) + "x" +
                        std::to_string(d_logits.cols()) + ", expected " +
                        std::to_string(T) + "x" + std::to_string(config.n_out));
  for (const auto &s : trace.steps)
    if (s.size() != config.depth)
      throw ContractError("backward: trace depth does not match config");

  NetworkParams grads = NetworkParams::zeros(config);
  const std::size_t top = config.depth - 1;

  // d_y[t] for the layer currently being processed, starting at the top.
  std::vector<Vector> d_y(T);
  for (std::size_t t = 0; t < T; ++t) {
    const Vector dl = d_logits.row_vector(t);
    add_outer(grads.w_out, dl, trace.steps[t][top].y);
    add_to(grads.b_out, dl);
    d_y[t] = matvec_transposed(params.w_out, dl);
  }

  for (std::size_t l = config.depth; l-- > 0;) {
    const CellDims dims = config.layer_dims(l);
    Vector d_c_next(dims.n_c);
    Vector d_r_next(dims.n_r);
    const Vector zero_c(dims.n_c);
    const Vector zero_r(dims.n_r);
    for (std::size_t t = T; t-- > 0;) {
      const StepTrace &st = trace.steps[t][l];
      const Vector &c_prev = t > 0 ? trace.steps[t - 1][l].c : zero_c;
      const Vector &r_prev = t > 0 ? trace.steps[t - 1][l].r : zero_r;
      StepGradients g = cell_step_backward(
          dims, config.style, config.variant, params.layers[l], st, c_prev,
          r_prev, d_y[t], d_c_next, d_r_next, grads.layers[l]);
      d_c_next = std::move(g.d_c_prev);
      d_r_next = std::move(g.d_r_prev);
      d_y[t] = std::move(g.d_x);
    }
  }
  return grads;
}

std::uint64_t count_params(const NetworkConfig &config) {
  config.validate();
  const std::uint64_t nc = config.dims.n_c, nr = config.dims.n_r,
                      ny = config.dims.n_y();
  std::uint64_t total = 0;
  for (std::size_t l = 0; l < config.depth; ++l) {
    const std::uint64_t x_in = config.layer_dims(l).n_x;
    std::uint64_t layer = 4 * nc * (x_in + nr) + 4 * nc;
    if (config.style == GateStyle::kStandard) layer += 3 * nc;
    switch (config.variant) {
      case ResidualVariant::kNone: layer += ny * nc; break;
      case ResidualVariant::kRes1: layer += ny * nc + nc * (nc + x_in); break;
      case ResidualVariant::kRes2: layer += ny * (nc + x_in); break;
      case ResidualVariant::kRes3: layer += ny * nc + ny * (ny + x_in); break;
    }
    total += layer;
  }
  return total + config.n_out * ny + config.n_out;
}

std::vector<char> encode_model(const NetworkParams &params,
                               const NetworkConfig &config) {
  config.validate();
  internal::ByteWriter w;
  w.bytes(kModelMagic);
  w.u32(kModelVersion);
  w.u32(static_cast<std::uint32_t>(config.depth));
  w.u32(static_cast<std::uint32_t>(config.dims.n_x));
  w.u32(static_cast<std::uint32_t>(config.dims.n_c));
  w.u32(static_cast<std::uint32_t>(config.dims.n_r));
  w.u32(static_cast<std::uint32_t>(config.dims.n_nr));
  w.u32(static_cast<std::uint32_t>(config.style));
  w.u32(static_cast<std::uint32_t>(config.variant));
  w.u32(static_cast<std::uint32_t>(config.n_out));
  params.for_each([&w](std::size_t, std::string_view, const auto &t) {
    if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Matrix>) {
      w.u32(static_cast<std::uint32_t>(t.rows()));
      w.u32(static_cast<std::uint32_t>(t.cols()));
    } else {
      w.u32(static_cast<std::uint32_t>(t.size()));
      w.u32(1);
    }
    for (double v : t.values()) w.f64(v);
  });
  return w.release();
}

Model decode_model(const std::vector<char> &bytes) {
  internal::ByteReader r(bytes, "model file");
  r.expect_magic(kModelMagic);
  const std::uint64_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kModelVersion)
    throw VersionError("unsupported model version " + std::to_string(version) +
                           " (supported versions: " +
                           std::to_string(kModelVersion) + ")",
                       version_at);

  Model model;
  NetworkConfig &c = model.config;
  c.depth = r.u32("depth");
  c.dims.n_x = r.u32("n_x");
  c.dims.n_c = r.u32("n_c");
  c.dims.n_r = r.u32("n_r");
  c.dims.n_nr = r.u32("n_nr");
  const std::uint32_t style = r.u32("style");
  const std::uint32_t variant = r.u32("variant");
  c.n_out = r.u32("n_out");
  if (style > 1) r.fail("bad gate style code " + std::to_string(style));
  if (variant > 3) r.fail("bad residual variant code " + std::to_string(variant));
  c.style = static_cast<GateStyle>(style);
  c.variant = static_cast<ResidualVariant>(variant);
  try {
    c.validate();
  } catch (const Error &e) {
    r.fail(std::string("invalid config: ") + e.what());
  }
  // Refuse to allocate more than the file could possibly hold.
  r.need_items(count_params(c), 8, "parameters");

  model.params = NetworkParams::zeros(c);
  model.params.for_each([&r](std::size_t layer, std::string_view name, auto &t) {
    const std::string field =
        "layer " + std::to_string(layer) + " " + std::string(name);
    const std::uint32_t rows = r.u32(field + " rows");
    const std::uint32_t cols = r.u32(field + " cols");
    std::size_t want_rows, want_cols;
    if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Matrix>) {
      want_rows = t.rows();
      want_cols = t.cols();
    } else {
      want_rows = t.size();
      want_cols = 1;
    }
    if (rows != want_rows || cols != want_cols)
      r.fail(field + " is " + std::to_string(rows) + "x" +
             std::to_string(cols) + ", expected " + std::to_string(want_rows) +
             "x" + std::to_string(want_cols));
    r.need_items(t.size(), 8, field);
    for (double &v : t.values()) v = r.f64(field);
  });
  r.expect_end();
  return model;
}

void save_model(const NetworkParams &params, const NetworkConfig &config,
                const std::string &path) {
  internal::write_file_atomic(path, encode_model(params, config));
}

Model load_model(const std::string &path) {
  return decode_model(internal::read_file(path));
}

}  // namespace reslstm
