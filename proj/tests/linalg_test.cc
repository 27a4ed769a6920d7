// linalg_test.cc

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

#include <cmath>
#include <cstring>

#include <gtest/gtest.h>

#include "reslstm/error.h"
#include "reslstm/random.h"

namespace reslstm {
namespace {

Vector random_vector(Rng &rng, std::size_t n, double scale) {
  Vector v(n);
  for (double &x : v) x = rng.symmetric(scale);
  return v;
}

Matrix random_matrix(Rng &rng, std::size_t r, std::size_t c, double scale) {
  Matrix m(r, c);
  for (double &x : m.values()) x = rng.symmetric(scale);
  return m;
}

TEST(Affine, IdentityPassesInputThrough) {
  EXPECT_EQ(affine(Matrix::identity(2), {3, -1}, {0, 0}), Vector({3, -1}));
}

TEST(Affine, HandArithmetic) {
  EXPECT_EQ(affine({{1, 2}, {3, 4}}, {1, 1}, {1, 0}), Vector({4, 7}));
}

TEST(Affine, ZeroMatrixGivesBias) {
  EXPECT_EQ(affine(Matrix(3, 2), {0.3, -8}, {5, 5, 5}), Vector({5, 5, 5}));
}

TEST(Affine, ShapeMismatchNamesOperands) {
  try {
    affine(Matrix(2, 3), {1, 2}, {0, 0});
    FAIL() << "expected DimensionError";
  } catch (const DimensionError &e) {
    EXPECT_NE(std::string(e.what()).find("2x3"), std::string::npos);
  }
  EXPECT_THROW(affine(Matrix(2, 2), {1, 2}, {0}), DimensionError);
}

TEST(Affine, IsLinear) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix w = random_matrix(rng, 5, 7, 3.0);
    const Vector x = random_vector(rng, 7, 2.0), y = random_vector(rng, 7, 2.0);
    const double alpha = rng.symmetric(4.0), beta = rng.symmetric(4.0);
    Vector combo(7);
    for (std::size_t j = 0; j < 7; ++j) combo[j] = alpha * x[j] + beta * y[j];
    const Vector lhs = affine(w, combo, Vector(5));
    const Vector ax = affine(w, x, Vector(5)), ay = affine(w, y, Vector(5));
    for (std::size_t i = 0; i < 5; ++i) {
      const double rhs = alpha * ax[i] + beta * ay[i];
      EXPECT_NEAR(lhs[i], rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST(Affine, BitDeterministic) {
  Rng rng(3);
  const Matrix w = random_matrix(rng, 16, 33, 1.0);
  const Vector x = random_vector(rng, 33, 1.0), b = random_vector(rng, 16, 1.0);
  const Vector a = affine(w, x, b), c = affine(w, x, b);
  EXPECT_EQ(std::memcmp(a.data(), c.data(), a.size() * sizeof(double)), 0);
}

TEST(Transposed, MatchesExplicitTranspose) {
  Rng rng(5);
  const Matrix w = random_matrix(rng, 4, 3, 1.0);
  const Vector d = random_vector(rng, 4, 1.0);
  Matrix wt(3, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) wt(j, i) = w(i, j);
  const Vector a = matvec_transposed(w, d), b = matvec(wt, d);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(a[j], b[j], 1e-15);
}

TEST(Outer, Accumulates) {
  Matrix g(2, 2, 1.0);
  add_outer(g, {1, 2}, {3, 4});
  EXPECT_EQ(g, Matrix({{4, 5}, {7, 9}}));
  EXPECT_THROW(add_outer(g, {1}, {1, 2}), DimensionError);
}

TEST(Sigmoid, Values) {
  EXPECT_EQ(sigmoid(Vector{0, 0}), Vector({0.5, 0.5}));
  EXPECT_NEAR(sigmoid(Vector{1000})[0], 1.0, 1e-15);
  EXPECT_EQ(sigmoid(Vector{-1000})[0], 0.0);
  EXPECT_TRUE(std::isfinite(sigmoid(-745.5)));
}

TEST(Tanh, Values) {
  EXPECT_EQ(tanh_v(Vector{0}), Vector({0}));
  EXPECT_NEAR(tanh_v(Vector{1000})[0], 1.0, 1e-15);
}

TEST(Nonlinearity, SymmetryLaws) {
  Rng rng(9);
  for (int k = 0; k < 2000; ++k) {
    const double u = rng.symmetric(1000.0);
    EXPECT_NEAR(sigmoid(u) + sigmoid(-u), 1.0, 1e-15);
    EXPECT_NEAR(std::tanh(-u), -std::tanh(u), 1e-15);
    const double s = sigmoid(u);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(Hadamard, Products) {
  EXPECT_EQ(hadamard({1, 2, 3}, {0, 0, 0}), Vector({0, 0, 0}));
  EXPECT_EQ(hadamard({1, 2}, {3, 4}), Vector({3, 8}));
  const Vector a{1.5, -2.25, 7};
  EXPECT_EQ(hadamard(a, Vector(3, 1.0)), a);
  EXPECT_THROW(hadamard({1}, {1, 2}), DimensionError);
}

TEST(Concat, OrderAndSlicing) {
  EXPECT_EQ(concat({1, 2}, {3}), Vector({1, 2, 3}));
  EXPECT_EQ(slice_prefix({9, 8, 7}, 2), Vector({9, 8}));
  EXPECT_THROW(slice_prefix({9, 8, 7}, 0), DimensionError);
  EXPECT_THROW(slice_prefix({9, 8, 7}, 4), DimensionError);
  EXPECT_THROW(slice({1, 2}, 1, 2), DimensionError);
}

TEST(Concat, PrefixRoundTripIsBitExact) {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector a = random_vector(rng, 1 + rng.below(10), 1e3);
    const Vector b = random_vector(rng, rng.below(10), 1e3);
    EXPECT_EQ(slice_prefix(concat(a, b), a.size()), a);
  }
  const Vector neg_zero{-0.0};
  const Vector back = slice_prefix(concat(neg_zero, {1.0}), 1);
  EXPECT_TRUE(std::signbit(back[0]));
}

TEST(MatrixType, RaggedInitializerRejected) {
  EXPECT_THROW(Matrix({{1, 2}, {3}}), DimensionError);
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), DimensionError);
}

}  // namespace
}  // namespace reslstm
