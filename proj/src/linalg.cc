// linalg.cc

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

#include "reslstm/linalg.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "reslstm/error.h"

namespace reslstm {

namespace internal {
void dimension_error(std::string_view op, std::string_view detail) {
  throw DimensionError(std::string(op) + ": " + std::string(detail));
}
}  // namespace internal

namespace {

std::string shape(const Matrix &m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

void Vector::set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols)
    internal::dimension_error(
        "Matrix", "got " + std::to_string(data_.size()) + " values for a " +
                      std::to_string(rows) + "x" + std::to_string(cols) +
                      " matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto &r : rows) {
    if (r.size() != cols_)
      internal::dimension_error("Matrix", "ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::row_vector(std::size_t r) const {
  auto s = row(r);
  return Vector(std::vector<double>(s.begin(), s.end()));
}

void Matrix::set_row(std::size_t r, std::span<const double> values) {
  if (values.size() != cols_)
    internal::dimension_error("Matrix::set_row",
                              "row of length " + std::to_string(values.size()) +
                                  " into " + shape(*this));
  std::copy(values.begin(), values.end(), row(r).begin());
}

void Matrix::set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

Vector affine(const Matrix &w, const Vector &x, const Vector &b) {
  if (w.cols() != x.size() || w.rows() != b.size())
    internal::dimension_error(
        "affine", "W is " + shape(w) + ", x has " + std::to_string(x.size()) +
                      ", b has " + std::to_string(b.size()));
  Vector out(w.rows());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const double *wr = w.data() + i * w.cols();
    double sum = 0.0;
    for (std::size_t j = 0; j < w.cols(); ++j) sum += wr[j] * x[j];
    out[i] = sum + b[i];
  }
  return out;
}

Vector matvec(const Matrix &w, const Vector &x) {
  if (w.cols() != x.size())
    internal::dimension_error("matvec", "W is " + shape(w) + ", x has " +
                                            std::to_string(x.size()));
  Vector out(w.rows());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const double *wr = w.data() + i * w.cols();
    double sum = 0.0;
    for (std::size_t j = 0; j < w.cols(); ++j) sum += wr[j] * x[j];
    out[i] = sum;
  }
  return out;
}

Vector matvec_transposed(const Matrix &w, const Vector &d) {
  if (w.rows() != d.size())
    internal::dimension_error("matvec_transposed",
                              "W is " + shape(w) + ", d has " +
                                  std::to_string(d.size()));
  Vector out(w.cols());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const double di = d[i];
    const double *wr = w.data() + i * w.cols();
    for (std::size_t j = 0; j < w.cols(); ++j) out[j] += wr[j] * di;
  }
  return out;
}

void add_outer(Matrix &grad, const Vector &d, const Vector &x) {
  if (grad.rows() != d.size() || grad.cols() != x.size())
    internal::dimension_error(
        "add_outer", "grad is " + shape(grad) + ", d has " +
                         std::to_string(d.size()) + ", x has " +
                         std::to_string(x.size()));
  for (std::size_t i = 0; i < grad.rows(); ++i) {
    const double di = d[i];
    double *gr = grad.data() + i * grad.cols();
    for (std::size_t j = 0; j < grad.cols(); ++j) gr[j] += di * x[j];
  }
}

// Sign-split form: exp() is only ever called on a non-positive argument.
double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

Vector sigmoid(const Vector &v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = sigmoid(v[i]);
  return out;
}

Vector tanh_v(const Vector &v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
  return out;
}

Vector hadamard(const Vector &a, const Vector &b) {
  if (a.size() != b.size())
    internal::dimension_error("hadamard", "lengths " + std::to_string(a.size()) +
                                              " and " + std::to_string(b.size()));
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Vector add(const Vector &a, const Vector &b) {
  Vector out = a;
  add_to(out, b);
  return out;
}

void add_to(Vector &y, const Vector &a) {
  if (a.size() != y.size())
    internal::dimension_error("add", "lengths " + std::to_string(y.size()) +
                                         " and " + std::to_string(a.size()));
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a[i];
}

void axpy(double alpha, std::span<const double> a, std::span<double> y) {
  if (a.size() != y.size())
    internal::dimension_error("axpy", "lengths " + std::to_string(a.size()) +
                                          " and " + std::to_string(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * a[i];
}

Vector concat(const Vector &a, const Vector &b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return Vector(std::move(out));
}

Vector slice_prefix(const Vector &v, std::size_t k) {
  if (k < 1 || k > v.size())
    internal::dimension_error("slice_prefix",
                              "k=" + std::to_string(k) + " for length " +
                                  std::to_string(v.size()));
  return slice(v, 0, k);
}

Vector slice(const Vector &v, std::size_t offset, std::size_t k) {
  if (offset + k > v.size())
    internal::dimension_error(
        "slice", "[" + std::to_string(offset) + ", " +
                     std::to_string(offset + k) + ") of length " +
                     std::to_string(v.size()));
  return Vector(std::vector<double>(v.begin() + offset, v.begin() + offset + k));
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace reslstm
