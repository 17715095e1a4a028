// SPDX-License-Identifier: Apache-2.0
//
// Dense 64-bit numeric layer: rank 1-3 tensors, the elementwise and product
// kernels the event model needs, a counter-based PRNG and a central
// finite-difference gradient checker.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace eventclone::num {

using Vec = std::vector<double>;

/// Read-only row-major matrix view over borrowed storage.
struct MatrixView {
  std::span<const double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return data.subspan(r * cols, cols); }
};

class Tensor {
 public:
  Tensor() = default;
  /// Zero-filled tensor. Throws ShapeError unless 1 <= rank <= 3 and all dims > 0.
  explicit Tensor(std::vector<std::size_t> shape);
  /// Throws ShapeError on a length mismatch and NumericError on non-finite data.
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& at(std::size_t k, std::size_t i, std::size_t j) {
    return data_[(k * shape_[1] + i) * shape_[2] + j];
  }
  double at(std::size_t k, std::size_t i, std::size_t j) const {
    return data_[(k * shape_[1] + i) * shape_[2] + j];
  }

  /// The whole rank-2 tensor as a matrix view.
  MatrixView matrix() const;
  /// Slice k of a rank-3 tensor (shape[1] x shape[2]).
  MatrixView slice(std::size_t k) const;
  std::span<double> slice_data(std::size_t k);

  Tensor zeros_like() const { return Tensor(shape_); }
  void fill(double v);
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  Vec data_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

/// M (m x n) times v (n). Left-to-right summation.
Vec matvec(const MatrixView& m, std::span<const double> v);
Vec matvec(const Tensor& m, std::span<const double> v);
/// Row vector v (m) times M (m x n).
Vec vecmat(std::span<const double> v, const MatrixView& m);
/// Mᵀ (n x m) times v (m).
Vec matvec_transposed(const MatrixView& m, std::span<const double> v);
Tensor matmul(const Tensor& a, const Tensor& b);

Vec sigmoid(std::span<const double> v);
Vec tanh(std::span<const double> v);
Vec hadamard(std::span<const double> u, std::span<const double> v);
Vec concat(std::span<const double> u, std::span<const double> v);
/// a*u + b*v
Vec scale_add(double a, std::span<const double> u, double b, std::span<const double> v);
double dot(std::span<const double> u, std::span<const double> v);

double sigmoid(double x);

/// Adds scale * u vᵀ into the (u.size() x v.size()) matrix stored in `out`.
void add_outer(std::span<double> out, std::span<const double> u, std::span<const double> v,
               double scale = 1.0);
/// out += scale * v
void axpy(std::span<double> out, double scale, std::span<const double> v);

/// SplitMix64 evaluated at (seed, counter): draw i depends only on the seed
/// and i, so streams are reproducible across runs and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Box-Muller; consumes two draws per call.
  double normal(double mean, double stddev);
  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[below(i)]);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

enum class InitScheme {
  XavierUniform,  // U(-a, a), a = sqrt(6 / (fan_in + fan_out))
  Normal002,      // N(0, 0.02)
};

/// Bound of the Xavier-uniform scheme for `shape` (fan_in = last dimension,
/// fan_out = second to last, or the same for rank 1).
double xavier_bound(const std::vector<std::size_t>& shape);
Tensor init_params(const std::vector<std::size_t>& shape, Rng& rng, InitScheme scheme);

/// Central differences (f(p+e) - f(p-e)) / 2e for every coordinate of `point`.
Vec finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                     std::span<const double> point, double epsilon = 1e-5);

/// In-place variant: perturbs each coordinate of each parameter block,
/// re-evaluates `f`, and restores the value. Returns one gradient per block.
std::vector<Vec> finite_diff_grad(const std::function<double()>& f,
                                  std::span<const std::span<double>> params,
                                  double epsilon = 1e-5);

}  // namespace eventclone::num
