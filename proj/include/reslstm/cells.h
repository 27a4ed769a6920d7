// reslstm/cells.h

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

#ifndef RESLSTM_CELLS_H_
#define RESLSTM_CELLS_H_

#include <cstddef>
#include <string_view>

#include "reslstm/linalg.h"

namespace reslstm {

// Fast drops the three peephole terms so the four gate preactivations share
// one affine structure (and can be fused into a single matrix product).
enum class GateStyle { kStandard = 0, kFast = 1 };

// Where the layer input is spliced into the cell:
//   kRes1: h = [tanh(c), x], m = o ⊙ (W_res·h)       (replaces m = o ⊙ tanh(c))
//   kRes2: h = [m, x],       y = W_res·h              (replaces y = W_rp·m)
//   kRes3: z = W_rp·m, r = z[0:n_r], h = [z, x], y = W_res·h
enum class ResidualVariant { kNone = 0, kRes1 = 1, kRes2 = 2, kRes3 = 3 };

std::string_view to_string(GateStyle style);
std::string_view to_string(ResidualVariant variant);
/// Accepts "standard"/"fast" and "none"/"res1"/"res2"/"res3".
GateStyle parse_gate_style(std::string_view text);
ResidualVariant parse_residual_variant(std::string_view text);

struct CellDims {
  std::size_t n_x = 0;   // layer input
  std::size_t n_c = 0;   // cell
  std::size_t n_r = 0;   // recurrent projection
  std::size_t n_nr = 0;  // non-recurrent projection

  std::size_t n_y() const { return n_r + n_nr; }
  /// Throws DimensionError unless n_x, n_c, n_r >= 1.
  void validate() const;

  friend bool operator==(const CellDims &, const CellDims &) = default;
};

/// Input width of the residual splice h for a variant (0 for kNone).
std::size_t splice_width(const CellDims &dims, ResidualVariant variant);

struct LayerParams {
  Matrix w_ix, w_ir, w_fx, w_fr, w_ox, w_or, w_gx, w_gr;
  Vector w_ic, w_fc, w_oc;  // diagonal peepholes, empty for kFast
  Vector b_i, b_f, b_o, b_g;
  Matrix w_rp;   // n_y x n_c, empty for kRes2
  Matrix w_res;  // empty for kNone

  static LayerParams zeros(const CellDims &dims, GateStyle style,
                           ResidualVariant variant);

  /// Visits every present tensor as f(name, Matrix&) or f(name, Vector&), in
  /// model-file order.
  template <typename F>
  void for_each(F &&f) {
    for_each_impl(*this, f);
  }
  template <typename F>
  void for_each(F &&f) const {
    for_each_impl(*this, f);
  }

  std::size_t num_params() const;
  /// Throws DimensionError naming the first tensor whose shape is wrong.
  void check_shapes(const CellDims &dims, GateStyle style,
                    ResidualVariant variant) const;

 private:
  template <typename Self, typename F>
  static void for_each_impl(Self &p, F &f) {
    f("W_ix", p.w_ix);
    f("W_ir", p.w_ir);
    f("W_fx", p.w_fx);
    f("W_fr", p.w_fr);
    f("W_ox", p.w_ox);
    f("W_or", p.w_or);
    f("W_gx", p.w_gx);
    f("W_gr", p.w_gr);
    if (!p.w_ic.empty()) {
      f("w_ic", p.w_ic);
      f("w_fc", p.w_fc);
      f("w_oc", p.w_oc);
    }
    f("b_i", p.b_i);
    f("b_f", p.b_f);
    f("b_o", p.b_o);
    f("b_g", p.b_g);
    if (!p.w_rp.empty()) f("W_rp", p.w_rp);
    if (!p.w_res.empty()) f("W_res", p.w_res);
  }
};

struct CellState {
  Vector c;  // n_c
  Vector r;  // n_r

  static CellState zeros(const CellDims &dims) {
    return {Vector(dims.n_c), Vector(dims.n_r)};
  }
};

// Every intermediate of one step. h holds the variant's spliced vector and
// z is only filled for kRes3.
struct StepTrace {
  ResidualVariant variant = ResidualVariant::kNone;
  Vector x_in;
  Vector i, f, o, g;
  Vector c;
  Vector m;
  Vector h;
  Vector z;
  Vector y;
  Vector r;
  // Set where |c| hit the clip bound; empty when clipping is off.
  std::vector<bool> clipped;
};

struct GatePreactivations {
  Vector a_i, a_f, a_o, a_g;
};

/// Gate inputs before the nonlinearities. For kStandard the output-gate
/// peephole (which reads the new c) is not included in a_o.
GatePreactivations gate_preactivations(const LayerParams &params,
                                       GateStyle style, const Vector &x,
                                       const Vector &r_prev,
                                       const Vector &c_prev);

// The four fast-style gate blocks stacked as [i; f; o; g] over input [x, r].
struct FusedGates {
  Matrix w_all;  // 4n_c x (n_x + n_r)
  Vector b_all;  // 4n_c
};

FusedGates fuse_gates(const LayerParams &params);

GatePreactivations fused_gate_preactivations(const Matrix &w_all,
                                             const Vector &b_all,
                                             const Vector &x,
                                             const Vector &r_prev);

struct CellOptions {
  // Clamp c to [-cell_clip, cell_clip]; 0 disables.
  double cell_clip = 0.0;
};

struct StepOutput {
  Vector y;
  CellState state;
  StepTrace trace;
};

/// One forward time step. `step` is only used to label a NumericError.
StepOutput cell_step(const CellDims &dims, GateStyle style,
                     ResidualVariant variant, const LayerParams &params,
                     const Vector &x, const CellState &state_prev,
                     const CellOptions &options = {}, std::size_t step = 0);

struct StepGradients {
  Vector d_x;
  Vector d_c_prev;
  Vector d_r_prev;
};

/// Reverse of cell_step. Parameter gradients are accumulated (+=) into
/// d_params, which must have the layer's shapes. d_r_next is the gradient
/// flowing into the recurrent output r of this step.
StepGradients cell_step_backward(const CellDims &dims, GateStyle style,
                                 ResidualVariant variant,
                                 const LayerParams &params,
                                 const StepTrace &trace, const Vector &c_prev,
                                 const Vector &r_prev, const Vector &d_y,
                                 const Vector &d_c_next, const Vector &d_r_next,
                                 LayerParams &d_params);

}  // namespace reslstm

#endif  // RESLSTM_CELLS_H_
