// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>

#include "eventclone/error.hpp"
#include "eventclone/numkernel.hpp"

namespace eventclone::num {

namespace {

void check_finite(std::span<const double> v, const char* op) {
#ifndef NDEBUG
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError(std::string(op) + " produced a non-finite value");
  }
#else
  (void)v;
  (void)op;
#endif
}

void require_same_length(std::span<const double> u, std::span<const double> v, const char* op) {
  if (u.size() != v.size()) {
    throw ShapeError(std::string(op) + ": length " + std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()));
  }
}

}  // namespace

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  if (shape_.empty() || shape_.size() > 3) throw ShapeError("tensor rank must be 1-3, got " + shape_string(shape_));
  std::size_t n = 1;
  for (std::size_t d : shape_) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_string(shape_));
    n *= d;
  }
  data_.assign(n, 0.0);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data) : Tensor(std::move(shape)) {
  if (data.size() != data_.size()) {
    throw ShapeError("tensor " + shape_string(shape_) + " needs " + std::to_string(data_.size()) +
                     " values, got " + std::to_string(data.size()));
  }
  for (double x : data) {
    if (!std::isfinite(x)) throw NumericError("tensor data must be finite");
  }
  data_ = std::move(data);
}

MatrixView Tensor::matrix() const {
  if (rank() != 2) throw ShapeError("expected a matrix, got " + shape_string(shape_));
  return {data_, shape_[0], shape_[1]};
}

MatrixView Tensor::slice(std::size_t k) const {
  if (rank() != 3 || k >= shape_[0]) throw ShapeError("bad slice " + std::to_string(k) + " of " + shape_string(shape_));
  std::size_t n = shape_[1] * shape_[2];
  return {std::span<const double>(data_).subspan(k * n, n), shape_[1], shape_[2]};
}

std::span<double> Tensor::slice_data(std::size_t k) {
  if (rank() != 3 || k >= shape_[0]) throw ShapeError("bad slice " + std::to_string(k) + " of " + shape_string(shape_));
  std::size_t n = shape_[1] * shape_[2];
  return std::span<double>(data_).subspan(k * n, n);
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Vec matvec(const MatrixView& m, std::span<const double> v) {
  if (m.cols != v.size()) {
    throw ShapeError("matvec: matrix " + shape_string({m.rows, m.cols}) + " with vector " +
                     shape_string({v.size()}));
  }
  Vec out(m.rows, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = m.data.data() + r * m.cols;
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) s += row[c] * v[c];
    out[r] = s;
  }
  check_finite(out, "matvec");
  return out;
}

Vec matvec(const Tensor& m, std::span<const double> v) { return matvec(m.matrix(), v); }

Vec vecmat(std::span<const double> v, const MatrixView& m) {
  if (m.rows != v.size()) {
    throw ShapeError("vecmat: vector " + shape_string({v.size()}) + " with matrix " +
                     shape_string({m.rows, m.cols}));
  }
  Vec out(m.cols, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = m.data.data() + r * m.cols;
    double vr = v[r];
    for (std::size_t c = 0; c < m.cols; ++c) out[c] += vr * row[c];
  }
  check_finite(out, "vecmat");
  return out;
}

Vec matvec_transposed(const MatrixView& m, std::span<const double> v) { return vecmat(v, m); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: " + shape_string(a.shape()) + " with " + shape_string(b.shape()));
  }
  std::size_t m = a.dim(0), n = a.dim(1), p = b.dim(1);
  Tensor out({m, p});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += a.at(i, k) * b.at(k, j);
      out.at(i, j) = s;
    }
  }
  check_finite(out.data(), "matmul");
  return out;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

Vec sigmoid(std::span<const double> v) {
  Vec out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return sigmoid(x); });
  return out;
}

Vec tanh(std::span<const double> v) {
  Vec out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::tanh(x); });
  return out;
}

Vec hadamard(std::span<const double> u, std::span<const double> v) {
  require_same_length(u, v, "hadamard");
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] * v[i];
  check_finite(out, "hadamard");
  return out;
}

Vec concat(std::span<const double> u, std::span<const double> v) {
  Vec out;
  out.reserve(u.size() + v.size());
  out.insert(out.end(), u.begin(), u.end());
  out.insert(out.end(), v.begin(), v.end());
  return out;
}

Vec scale_add(double a, std::span<const double> u, double b, std::span<const double> v) {
  require_same_length(u, v, "scale_add");
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = a * u[i] + b * v[i];
  check_finite(out, "scale_add");
  return out;
}

double dot(std::span<const double> u, std::span<const double> v) {
  require_same_length(u, v, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

void add_outer(std::span<double> out, std::span<const double> u, std::span<const double> v,
               double scale) {
  if (out.size() != u.size() * v.size()) throw ShapeError("add_outer: output size mismatch");
  for (std::size_t i = 0; i < u.size(); ++i) {
    double ui = scale * u[i];
    if (ui == 0.0) continue;
    double* row = out.data() + i * v.size();
    for (std::size_t j = 0; j < v.size(); ++j) row[j] += ui * v[j];
  }
}

void axpy(std::span<double> out, double scale, std::span<const double> v) {
  if (out.size() != v.size()) throw ShapeError("axpy: length mismatch");
  for (std::size_t i = 0; i < v.size(); ++i) out[i] += scale * v[i];
}

}  // namespace eventclone::num
