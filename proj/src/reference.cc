// reference.cc

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

#include "reslstm/reference.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "reslstm/error.h"

namespace reslstm {

namespace {

using Real = long double;
using Vec = std::vector<Real>;

Real logistic(Real u) { return 1.0L / (1.0L + std::exp(-u)); }

}  // namespace

ReferenceNetwork::ReferenceNetwork(const NetworkParams &params,
                                   const NetworkConfig &config)
    : config_(config), layers_(config.depth) {
  config.validate();
  params.for_each([&](std::size_t layer, std::string_view name, const auto &t) {
    Tensor ref;
    ref.offset = theta_.size();
    if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Matrix>) {
      ref.rows = t.rows();
      ref.cols = t.cols();
    } else {
      ref.rows = t.size();
      ref.cols = 1;
    }
    for (double v : t.values()) theta_.push_back(v);
    if (layer == config.depth) {
      (name == "W_out" ? w_out_ : b_out_) = ref;
      return;
    }
    Layer &l = layers_.at(layer);
    if (name == "W_ix") l.ix = ref;
    else if (name == "W_ir") l.ir = ref;
    else if (name == "W_fx") l.fx = ref;
    else if (name == "W_fr") l.fr = ref;
    else if (name == "W_ox") l.ox = ref;
    else if (name == "W_or") l.orr = ref;
    else if (name == "W_gx") l.gx = ref;
    else if (name == "W_gr") l.gr = ref;
    else if (name == "w_ic") l.ic = ref;
    else if (name == "w_fc") l.fc = ref;
    else if (name == "w_oc") l.oc = ref;
    else if (name == "b_i") l.bi = ref;
    else if (name == "b_f") l.bf = ref;
    else if (name == "b_o") l.bo = ref;
    else if (name == "b_g") l.bg = ref;
    else if (name == "W_rp") l.rp = ref;
    else if (name == "W_res") l.res = ref;
  });
}

std::vector<long double> ReferenceNetwork::times(const Tensor &w,
                                                 const Vec &v) const {
  if (w.cols != v.size())
    throw DimensionError("ReferenceNetwork: shape mismatch");
  Vec out(w.rows, 0.0L);
  for (std::size_t r = 0; r < w.rows; ++r)
    for (std::size_t c = 0; c < w.cols; ++c)
      out[r] += theta_[w.offset + r * w.cols + c] * v[c];
  return out;
}

std::vector<std::vector<long double>> ReferenceNetwork::run(
    const Matrix &inputs) const {
  const std::size_t T = inputs.rows();
  const bool peep = config_.style == GateStyle::kStandard;
  const ResidualVariant variant = config_.variant;

  // Sequence of inputs to the current layer; replaced layer by layer.
  std::vector<Vec> seq(T);
  for (std::size_t t = 0; t < T; ++t)
    seq[t].assign(inputs.row(t).begin(), inputs.row(t).end());

  for (std::size_t li = 0; li < config_.depth; ++li) {
    const Layer &L = layers_[li];
    const CellDims d = config_.layer_dims(li);
    Vec c(d.n_c, 0.0L), r(d.n_r, 0.0L);
    for (std::size_t t = 0; t < T; ++t) {
      const Vec &x = seq[t];
      const Vec ix = times(L.ix, x), ir = times(L.ir, r);
      const Vec fx = times(L.fx, x), fr = times(L.fr, r);
      const Vec ox = times(L.ox, x), orr = times(L.orr, r);
      const Vec gx = times(L.gx, x), gr = times(L.gr, r);
      Vec c_new(d.n_c), o(d.n_c), tc(d.n_c);
      for (std::size_t k = 0; k < d.n_c; ++k) {
        Real ai = ix[k] + ir[k] + theta_[L.bi.offset + k];
        Real af = fx[k] + fr[k] + theta_[L.bf.offset + k];
        if (peep) {
          ai += theta_[L.ic.offset + k] * c[k];
          af += theta_[L.fc.offset + k] * c[k];
        }
        const Real g = std::tanh(gx[k] + gr[k] + theta_[L.bg.offset + k]);
        c_new[k] = logistic(ai) * g + logistic(af) * c[k];
        Real ao = ox[k] + orr[k] + theta_[L.bo.offset + k];
        if (peep) ao += theta_[L.oc.offset + k] * c_new[k];
        o[k] = logistic(ao);
        tc[k] = std::tanh(c_new[k]);
      }
      c = c_new;

      Vec m(d.n_c), y;
      if (variant == ResidualVariant::kRes1) {
        Vec h = tc;
        h.insert(h.end(), x.begin(), x.end());
        const Vec u = times(L.res, h);
        for (std::size_t k = 0; k < d.n_c; ++k) m[k] = o[k] * u[k];
      } else {
        for (std::size_t k = 0; k < d.n_c; ++k) m[k] = o[k] * tc[k];
      }
      switch (variant) {
        case ResidualVariant::kNone:
        case ResidualVariant::kRes1:
          y = times(L.rp, m);
          r.assign(y.begin(), y.begin() + d.n_r);
          break;
        case ResidualVariant::kRes2: {
          Vec h = m;
          h.insert(h.end(), x.begin(), x.end());
          y = times(L.res, h);
          r.assign(y.begin(), y.begin() + d.n_r);
          break;
        }
        case ResidualVariant::kRes3: {
          Vec z = times(L.rp, m);
          r.assign(z.begin(), z.begin() + d.n_r);
          z.insert(z.end(), x.begin(), x.end());
          y = times(L.res, z);
          break;
        }
      }
      seq[t] = std::move(y);
    }
  }

  std::vector<Vec> logits(T);
  for (std::size_t t = 0; t < T; ++t) {
    logits[t] = times(w_out_, seq[t]);
    for (std::size_t k = 0; k < logits[t].size(); ++k)
      logits[t][k] += theta_[b_out_.offset + k];
  }
  return logits;
}

Matrix ReferenceNetwork::logits(const Matrix &inputs) const {
  const auto z = run(inputs);
  Matrix out(z.size(), config_.n_out);
  for (std::size_t t = 0; t < z.size(); ++t)
    for (std::size_t k = 0; k < config_.n_out; ++k)
      out(t, k) = static_cast<double>(z[t][k]);
  return out;
}

long double ReferenceNetwork::loss(const Matrix &inputs,
                                   std::span<const std::uint32_t> labels) const {
  const auto z = run(inputs);
  if (labels.size() != z.size())
    throw ContractError("ReferenceNetwork::loss: label count mismatch");
  Real total = 0.0L;
  for (std::size_t t = 0; t < z.size(); ++t) {
    const Real mx = *std::max_element(z[t].begin(), z[t].end());
    Real sum = 0.0L;
    for (Real v : z[t]) sum += std::exp(v - mx);
    total += mx + std::log(sum) - z[t].at(labels[t]);
  }
  return total;
}

}  // namespace reslstm
