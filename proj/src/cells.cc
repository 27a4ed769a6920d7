// cells.cc

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

#include "reslstm/cells.h"

#include <cmath>
#include <string>

#include "reslstm/error.h"

namespace reslstm {

namespace {

std::string shape_str(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void expect_len(std::string_view what, const Vector &v, std::size_t n) {
  if (v.size() != n)
    throw DimensionError(std::string(what) + ": expected length " +
                         std::to_string(n) + ", got " +
                         std::to_string(v.size()));
}

void expect_shape(std::string_view what, const Matrix &m, std::size_t rows,
                  std::size_t cols) {
  if (m.rows() != rows || m.cols() != cols)
    throw DimensionError(std::string(what) + ": expected " +
                         shape_str(rows, cols) + ", got " +
                         shape_str(m.rows(), m.cols()));
}

void check_finite(std::string_view what, const Vector &v, std::size_t step) {
  if (!all_finite(v.values()))
    throw NumericError("non-finite " + std::string(what) + " at time step " +
                       std::to_string(step));
}

// d/du of sigma given s = sigma(u).
Vector sigmoid_grad(const Vector &d_out, const Vector &s) {
  Vector out(s.size());
  for (std::size_t k = 0; k < s.size(); ++k)
    out[k] = d_out[k] * s[k] * (1.0 - s[k]);
  return out;
}

// d/du of tanh given t = tanh(u).
Vector tanh_grad(const Vector &d_out, const Vector &t) {
  Vector out(t.size());
  for (std::size_t k = 0; k < t.size(); ++k)
    out[k] = d_out[k] * (1.0 - t[k] * t[k]);
  return out;
}

void add_prefix(Vector &v, const Vector &prefix) {
  for (std::size_t k = 0; k < prefix.size(); ++k) v[k] += prefix[k];
}

}  // namespace

std::string_view to_string(GateStyle style) {
  return style == GateStyle::kStandard ? "standard" : "fast";
}

std::string_view to_string(ResidualVariant variant) {
  switch (variant) {
    case ResidualVariant::kNone: return "none";
    case ResidualVariant::kRes1: return "res1";
    case ResidualVariant::kRes2: return "res2";
    case ResidualVariant::kRes3: return "res3";
  }
  return "?";
}

GateStyle parse_gate_style(std::string_view text) {
  if (text == "standard") return GateStyle::kStandard;
  if (text == "fast") return GateStyle::kFast;
  throw ContractError("unknown gate style '" + std::string(text) +
                      "' (expected standard or fast)");
}

ResidualVariant parse_residual_variant(std::string_view text) {
  if (text == "none") return ResidualVariant::kNone;
  if (text == "res1") return ResidualVariant::kRes1;
  if (text == "res2") return ResidualVariant::kRes2;
  if (text == "res3") return ResidualVariant::kRes3;
  throw ContractError("unknown residual variant '" + std::string(text) +
                      "' (expected none, res1, res2 or res3)");
}

void CellDims::validate() const {
  if (n_x < 1 || n_c < 1 || n_r < 1)
    throw DimensionError("CellDims: n_x, n_c and n_r must be >= 1 (got n_x=" +
                         std::to_string(n_x) + ", n_c=" + std::to_string(n_c) +
                         ", n_r=" + std::to_string(n_r) + ")");
}

std::size_t splice_width(const CellDims &dims, ResidualVariant variant) {
  switch (variant) {
    case ResidualVariant::kNone: return 0;
    case ResidualVariant::kRes1:
    case ResidualVariant::kRes2: return dims.n_c + dims.n_x;
    case ResidualVariant::kRes3: return dims.n_y() + dims.n_x;
  }
  return 0;
}

LayerParams LayerParams::zeros(const CellDims &dims, GateStyle style,
                               ResidualVariant variant) {
  dims.validate();
  const std::size_t nc = dims.n_c, nx = dims.n_x, nr = dims.n_r,
                    ny = dims.n_y();
  LayerParams p;
  p.w_ix = p.w_fx = p.w_ox = p.w_gx = Matrix(nc, nx);
  p.w_ir = p.w_fr = p.w_or = p.w_gr = Matrix(nc, nr);
  if (style == GateStyle::kStandard) p.w_ic = p.w_fc = p.w_oc = Vector(nc);
  p.b_i = p.b_f = p.b_o = p.b_g = Vector(nc);
  if (variant != ResidualVariant::kRes2) p.w_rp = Matrix(ny, nc);
  switch (variant) {
    case ResidualVariant::kNone: break;
    case ResidualVariant::kRes1:
      p.w_res = Matrix(nc, splice_width(dims, variant));
      break;
    case ResidualVariant::kRes2:
    case ResidualVariant::kRes3:
      p.w_res = Matrix(ny, splice_width(dims, variant));
      break;
  }
  return p;
}

std::size_t LayerParams::num_params() const {
  std::size_t n = 0;
  for_each([&n](std::string_view, const auto &t) { n += t.size(); });
  return n;
}

void LayerParams::check_shapes(const CellDims &dims, GateStyle style,
                               ResidualVariant variant) const {
  const std::size_t nc = dims.n_c, nx = dims.n_x, nr = dims.n_r,
                    ny = dims.n_y();
  expect_shape("W_ix", w_ix, nc, nx);
  expect_shape("W_fx", w_fx, nc, nx);
  expect_shape("W_ox", w_ox, nc, nx);
  expect_shape("W_gx", w_gx, nc, nx);
  expect_shape("W_ir", w_ir, nc, nr);
  expect_shape("W_fr", w_fr, nc, nr);
  expect_shape("W_or", w_or, nc, nr);
  expect_shape("W_gr", w_gr, nc, nr);
  const std::size_t peep = style == GateStyle::kStandard ? nc : 0;
  expect_len("w_ic", w_ic, peep);
  expect_len("w_fc", w_fc, peep);
  expect_len("w_oc", w_oc, peep);
  expect_len("b_i", b_i, nc);
  expect_len("b_f", b_f, nc);
  expect_len("b_o", b_o, nc);
  expect_len("b_g", b_g, nc);
  if (variant == ResidualVariant::kRes2)
    expect_shape("W_rp", w_rp, 0, 0);
  else
    expect_shape("W_rp", w_rp, ny, nc);
  const std::size_t res_rows = variant == ResidualVariant::kNone   ? 0
                               : variant == ResidualVariant::kRes1 ? nc
                                                                   : ny;
  expect_shape("W_res", w_res, res_rows, splice_width(dims, variant));
}

GatePreactivations gate_preactivations(const LayerParams &params,
                                       GateStyle style, const Vector &x,
                                       const Vector &r_prev,
                                       const Vector &c_prev) {
  GatePreactivations a;
  a.a_i = add(affine(params.w_ix, x, params.b_i), matvec(params.w_ir, r_prev));
  a.a_f = add(affine(params.w_fx, x, params.b_f), matvec(params.w_fr, r_prev));
  a.a_o = add(affine(params.w_ox, x, params.b_o), matvec(params.w_or, r_prev));
  a.a_g = add(affine(params.w_gx, x, params.b_g), matvec(params.w_gr, r_prev));
  if (style == GateStyle::kStandard) {
    add_to(a.a_i, hadamard(params.w_ic, c_prev));
    add_to(a.a_f, hadamard(params.w_fc, c_prev));
  }
  return a;
}

FusedGates fuse_gates(const LayerParams &params) {
  const std::size_t nc = params.w_ix.rows();
  const std::size_t nx = params.w_ix.cols();
  const std::size_t nr = params.w_ir.cols();
  FusedGates fused{Matrix(4 * nc, nx + nr), Vector(4 * nc)};
  const Matrix *wx[4] = {&params.w_ix, &params.w_fx, &params.w_ox, &params.w_gx};
  const Matrix *wr[4] = {&params.w_ir, &params.w_fr, &params.w_or, &params.w_gr};
  const Vector *b[4] = {&params.b_i, &params.b_f, &params.b_o, &params.b_g};
  for (std::size_t block = 0; block < 4; ++block) {
    for (std::size_t k = 0; k < nc; ++k) {
      auto dst = fused.w_all.row(block * nc + k);
      auto src_x = wx[block]->row(k);
      auto src_r = wr[block]->row(k);
      std::copy(src_x.begin(), src_x.end(), dst.begin());
      std::copy(src_r.begin(), src_r.end(), dst.begin() + nx);
      fused.b_all[block * nc + k] = (*b[block])[k];
    }
  }
  return fused;
}

GatePreactivations fused_gate_preactivations(const Matrix &w_all,
                                             const Vector &b_all,
                                             const Vector &x,
                                             const Vector &r_prev) {
  if (w_all.rows() % 4 != 0)
    throw DimensionError("fused_gate_preactivations: W_all has " +
                         std::to_string(w_all.rows()) +
                         " rows, not a multiple of 4");
  const Vector all = affine(w_all, concat(x, r_prev), b_all);
  const std::size_t nc = w_all.rows() / 4;
  return {slice(all, 0, nc), slice(all, nc, nc), slice(all, 2 * nc, nc),
          slice(all, 3 * nc, nc)};
}

StepOutput cell_step(const CellDims &dims, GateStyle style,
                     ResidualVariant variant, const LayerParams &params,
                     const Vector &x, const CellState &state_prev,
                     const CellOptions &options, std::size_t step) {
  expect_len("cell_step x", x, dims.n_x);
  expect_len("cell_step c_prev", state_prev.c, dims.n_c);
  expect_len("cell_step r_prev", state_prev.r, dims.n_r);
  params.check_shapes(dims, style, variant);

  StepOutput out;
  StepTrace &tr = out.trace;
  tr.variant = variant;
  tr.x_in = x;

  GatePreactivations a =
      gate_preactivations(params, style, x, state_prev.r, state_prev.c);
  tr.i = sigmoid(a.a_i);
  tr.f = sigmoid(a.a_f);
  tr.g = tanh_v(a.a_g);
  tr.c = add(hadamard(tr.i, tr.g), hadamard(tr.f, state_prev.c));
  if (options.cell_clip > 0.0) {
    tr.clipped.assign(dims.n_c, false);
    for (std::size_t k = 0; k < dims.n_c; ++k) {
      if (std::abs(tr.c[k]) > options.cell_clip) {
        tr.c[k] = std::copysign(options.cell_clip, tr.c[k]);
        tr.clipped[k] = true;
      }
    }
  }
  check_finite("cell activation", tr.c, step);
  if (style == GateStyle::kStandard) add_to(a.a_o, hadamard(params.w_oc, tr.c));
  tr.o = sigmoid(a.a_o);

  const Vector tanh_c = tanh_v(tr.c);
  switch (variant) {
    case ResidualVariant::kNone:
      tr.m = hadamard(tr.o, tanh_c);
      tr.y = matvec(params.w_rp, tr.m);
      tr.r = slice_prefix(tr.y, dims.n_r);
      break;
    case ResidualVariant::kRes1:
      tr.h = concat(tanh_c, x);
      tr.m = hadamard(tr.o, matvec(params.w_res, tr.h));
      tr.y = matvec(params.w_rp, tr.m);
      tr.r = slice_prefix(tr.y, dims.n_r);
      break;
    case ResidualVariant::kRes2:
      tr.m = hadamard(tr.o, tanh_c);
      tr.h = concat(tr.m, x);
      tr.y = matvec(params.w_res, tr.h);
      tr.r = slice_prefix(tr.y, dims.n_r);
      break;
    case ResidualVariant::kRes3:
      tr.m = hadamard(tr.o, tanh_c);
      tr.z = matvec(params.w_rp, tr.m);
      tr.r = slice_prefix(tr.z, dims.n_r);
      tr.h = concat(tr.z, x);
      tr.y = matvec(params.w_res, tr.h);
      break;
  }
  check_finite("cell output", tr.m, step);
  check_finite("layer output", tr.y, step);

  out.y = tr.y;
  out.state = {tr.c, tr.r};
  return out;
}

StepGradients cell_step_backward(const CellDims &dims, GateStyle style,
                                 ResidualVariant variant,
                                 const LayerParams &params,
                                 const StepTrace &trace, const Vector &c_prev,
                                 const Vector &r_prev, const Vector &d_y,
                                 const Vector &d_c_next, const Vector &d_r_next,
                                 LayerParams &d_params) {
  if (trace.variant != variant)
    throw ContractError(std::string("cell_step_backward: trace recorded for ") +
                        std::string(to_string(trace.variant)) +
                        ", called for " + std::string(to_string(variant)));
  if (trace.c.size() != dims.n_c || trace.x_in.size() != dims.n_x ||
      trace.y.size() != dims.n_y() ||
      (variant == ResidualVariant::kRes3) != !trace.z.empty())
    throw ContractError("cell_step_backward: trace does not match the layer");
  expect_len("d_y", d_y, dims.n_y());
  expect_len("d_c_next", d_c_next, dims.n_c);
  expect_len("d_r_next", d_r_next, dims.n_r);
  expect_len("c_prev", c_prev, dims.n_c);
  expect_len("r_prev", r_prev, dims.n_r);

  const std::size_t nc = dims.n_c;
  const Vector tanh_c = tanh_v(trace.c);
  Vector d_x(dims.n_x);
  Vector d_m;
  Vector d_tanh_c;  // gradient reaching tanh(c) through any path
  Vector d_o;

  switch (variant) {
    case ResidualVariant::kNone: {
      Vector dy = d_y;
      add_prefix(dy, d_r_next);
      add_outer(d_params.w_rp, dy, trace.m);
      d_m = matvec_transposed(params.w_rp, dy);
      d_o = hadamard(d_m, tanh_c);
      d_tanh_c = hadamard(d_m, trace.o);
      break;
    }
    case ResidualVariant::kRes1: {
      Vector dy = d_y;
      add_prefix(dy, d_r_next);
      add_outer(d_params.w_rp, dy, trace.m);
      d_m = matvec_transposed(params.w_rp, dy);
      const Vector u = matvec(params.w_res, trace.h);
      d_o = hadamard(d_m, u);
      const Vector d_u = hadamard(d_m, trace.o);
      add_outer(d_params.w_res, d_u, trace.h);
      const Vector d_h = matvec_transposed(params.w_res, d_u);
      d_tanh_c = slice(d_h, 0, nc);
      add_to(d_x, slice(d_h, nc, dims.n_x));
      break;
    }
    case ResidualVariant::kRes2: {
      Vector dy = d_y;
      add_prefix(dy, d_r_next);
      add_outer(d_params.w_res, dy, trace.h);
      const Vector d_h = matvec_transposed(params.w_res, dy);
      d_m = slice(d_h, 0, nc);
      add_to(d_x, slice(d_h, nc, dims.n_x));
      d_o = hadamard(d_m, tanh_c);
      d_tanh_c = hadamard(d_m, trace.o);
      break;
    }
    case ResidualVariant::kRes3: {
      add_outer(d_params.w_res, d_y, trace.h);
      const Vector d_h = matvec_transposed(params.w_res, d_y);
      Vector d_z = slice(d_h, 0, dims.n_y());
      add_to(d_x, slice(d_h, dims.n_y(), dims.n_x));
      add_prefix(d_z, d_r_next);
      add_outer(d_params.w_rp, d_z, trace.m);
      d_m = matvec_transposed(params.w_rp, d_z);
      d_o = hadamard(d_m, tanh_c);
      d_tanh_c = hadamard(d_m, trace.o);
      break;
    }
  }

  Vector d_c = add(d_c_next, tanh_grad(d_tanh_c, tanh_c));
  const Vector d_a_o = sigmoid_grad(d_o, trace.o);
  if (style == GateStyle::kStandard) {
    add_to(d_params.w_oc, hadamard(d_a_o, trace.c));
    add_to(d_c, hadamard(d_a_o, params.w_oc));
  }
  if (!trace.clipped.empty()) {
    for (std::size_t k = 0; k < nc; ++k)
      if (trace.clipped[k]) d_c[k] = 0.0;
  }

  const Vector d_a_i = sigmoid_grad(hadamard(d_c, trace.g), trace.i);
  const Vector d_a_f = sigmoid_grad(hadamard(d_c, c_prev), trace.f);
  const Vector d_a_g = tanh_grad(hadamard(d_c, trace.i), trace.g);

  StepGradients grads;
  grads.d_c_prev = hadamard(d_c, trace.f);
  if (style == GateStyle::kStandard) {
    add_to(grads.d_c_prev, hadamard(d_a_i, params.w_ic));
    add_to(grads.d_c_prev, hadamard(d_a_f, params.w_fc));
    add_to(d_params.w_ic, hadamard(d_a_i, c_prev));
    add_to(d_params.w_fc, hadamard(d_a_f, c_prev));
  }

  const Vector *d_a[4] = {&d_a_i, &d_a_f, &d_a_o, &d_a_g};
  const Matrix *wx[4] = {&params.w_ix, &params.w_fx, &params.w_ox, &params.w_gx};
  const Matrix *wr[4] = {&params.w_ir, &params.w_fr, &params.w_or, &params.w_gr};
  Matrix *dwx[4] = {&d_params.w_ix, &d_params.w_fx, &d_params.w_ox,
                    &d_params.w_gx};
  Matrix *dwr[4] = {&d_params.w_ir, &d_params.w_fr, &d_params.w_or,
                    &d_params.w_gr};
  Vector *db[4] = {&d_params.b_i, &d_params.b_f, &d_params.b_o, &d_params.b_g};

  grads.d_r_prev = Vector(dims.n_r);
  for (std::size_t gate = 0; gate < 4; ++gate) {
    add_outer(*dwx[gate], *d_a[gate], trace.x_in);
    add_outer(*dwr[gate], *d_a[gate], r_prev);
    add_to(*db[gate], *d_a[gate]);
    add_to(d_x, matvec_transposed(*wx[gate], *d_a[gate]));
    add_to(grads.d_r_prev, matvec_transposed(*wr[gate], *d_a[gate]));
  }
  grads.d_x = std::move(d_x);
  return grads;
}

}  // namespace reslstm
