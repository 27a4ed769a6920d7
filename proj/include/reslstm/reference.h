// reslstm/reference.h

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

#ifndef RESLSTM_REFERENCE_H_
#define RESLSTM_REFERENCE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "reslstm/network.h"

namespace reslstm {

// Scalar-loop evaluation of the whole network in long double, written
// without the linalg/cells kernels. It is the finite-difference oracle for
// the analytic backward pass: its roundoff floor is low enough that central
// differences resolve gradient components far below 1e-6.
class ReferenceNetwork {
 public:
  ReferenceNetwork(const NetworkParams &params, const NetworkConfig &config);

  /// Parameters in NetworkParams::flatten() order.
  std::size_t size() const { return theta_.size(); }
  long double &operator[](std::size_t k) { return theta_[k]; }
  long double operator[](std::size_t k) const { return theta_[k]; }

  /// T x n_out logits, rounded to double.
  Matrix logits(const Matrix &inputs) const;
  /// Summed frame CE.
  long double loss(const Matrix &inputs,
                   std::span<const std::uint32_t> labels) const;

 private:
  struct Tensor {
    std::size_t offset = 0, rows = 0, cols = 0;
    bool present() const { return rows != 0; }
  };
  struct Layer {
    Tensor ix, ir, fx, fr, ox, orr, gx, gr, ic, fc, oc, bi, bf, bo, bg, rp, res;
  };

  std::vector<std::vector<long double>> run(const Matrix &inputs) const;
  std::vector<long double> times(const Tensor &w,
                                 const std::vector<long double> &v) const;

  NetworkConfig config_;
  std::vector<long double> theta_;
  std::vector<Layer> layers_;
  Tensor w_out_, b_out_;
};

}  // namespace reslstm

#endif  // RESLSTM_REFERENCE_H_
