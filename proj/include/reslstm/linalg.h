// reslstm/linalg.h

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

#ifndef RESLSTM_LINALG_H_
#define RESLSTM_LINALG_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace reslstm {

// Dense double-precision vector. A zero-length Vector marks an absent
// parameter (e.g. peepholes of a fast-LSTM layer); every operation below
// otherwise works on whatever lengths it is handed.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double value = 0.0) : data_(n, value) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double &operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  void set_zero();

  friend bool operator==(const Vector &, const Vector &) = default;

 private:
  std::vector<double> data_;
};

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  // Nested-list construction for tests and small literals.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  Vector row_vector(std::size_t r) const;
  void set_row(std::size_t r, std::span<const double> values);

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void set_zero();

  friend bool operator==(const Matrix &, const Matrix &) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// W·x + b, summing over columns strictly left to right.
Vector affine(const Matrix &w, const Vector &x, const Vector &b);
/// W·x.
Vector matvec(const Matrix &w, const Vector &x);
/// Wᵀ·d, accumulated row by row in ascending order.
Vector matvec_transposed(const Matrix &w, const Vector &d);
/// grad += d·xᵀ.
void add_outer(Matrix &grad, const Vector &d, const Vector &x);

Vector sigmoid(const Vector &v);
Vector tanh_v(const Vector &v);
double sigmoid(double u);

Vector hadamard(const Vector &a, const Vector &b);
Vector add(const Vector &a, const Vector &b);
/// y += a.
void add_to(Vector &y, const Vector &a);
/// y += alpha·a, elementwise on raw spans of equal length.
void axpy(double alpha, std::span<const double> a, std::span<double> y);

Vector concat(const Vector &a, const Vector &b);
Vector slice_prefix(const Vector &v, std::size_t k);
/// Elements [offset, offset + k).
Vector slice(const Vector &v, std::size_t offset, std::size_t k);

bool all_finite(std::span<const double> values);

namespace internal {
[[noreturn]] void dimension_error(std::string_view op, std::string_view detail);
}  // namespace internal

}  // namespace reslstm

#endif  // RESLSTM_LINALG_H_
