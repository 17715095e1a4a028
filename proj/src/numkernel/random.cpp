// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>

#include "eventclone/error.hpp"
#include "eventclone/numkernel.hpp"

namespace eventclone::num {

std::uint64_t Rng::next_u64() {
  std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal(double mean, double stddev) {
  double u1 = uniform();
  double u2 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw ShapeError("Rng::below(0)");
  // Rejection sampling removes modulo bias.
  std::uint64_t bound = static_cast<std::uint64_t>(n);
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

double xavier_bound(const std::vector<std::size_t>& shape) {
  if (shape.empty()) return 0.0;
  double fan_in = static_cast<double>(shape.back());
  double fan_out = shape.size() >= 2 ? static_cast<double>(shape[shape.size() - 2]) : fan_in;
  return std::sqrt(6.0 / (fan_in + fan_out));
}

Tensor init_params(const std::vector<std::size_t>& shape, Rng& rng, InitScheme scheme) {
  Tensor t(shape);
  double a = xavier_bound(shape);
  for (double& x : t.data()) {
    x = scheme == InitScheme::XavierUniform ? rng.uniform(-a, a) : rng.normal(0.0, 0.02);
  }
  return t;
}

Vec finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                     std::span<const double> point, double epsilon) {
  Vec p(point.begin(), point.end());
  Vec grad(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    double orig = p[i];
    p[i] = orig + epsilon;
    double up = f(p);
    p[i] = orig - epsilon;
    double down = f(p);
    p[i] = orig;
    grad[i] = (up - down) / (2.0 * epsilon);
  }
  return grad;
}

std::vector<Vec> finite_diff_grad(const std::function<double()>& f,
                                  std::span<const std::span<double>> params, double epsilon) {
  std::vector<Vec> grads;
  grads.reserve(params.size());
  for (std::span<double> block : params) {
    Vec g(block.size(), 0.0);
    for (std::size_t i = 0; i < block.size(); ++i) {
      double orig = block[i];
      block[i] = orig + epsilon;
      double up = f();
      block[i] = orig - epsilon;
      double down = f();
      block[i] = orig;
      g[i] = (up - down) / (2.0 * epsilon);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

}  // namespace eventclone::num
