// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "eventclone/error.hpp"
#include "eventclone/train.hpp"

namespace eventclone::train {

namespace {

constexpr double kMinNorm = 1e-12;

double checked_norm(std::span<const double> v) {
  double n = std::sqrt(num::dot(v, v));
  if (!(n >= kMinNorm)) throw DegenerateVector("program vector norm below 1e-12");
  return n;
}

}  // namespace

double hinge_loss(std::span<const double> va, std::span<const double> vp, std::span<const double> vn,
                  double margin) {
  double sp = clone::cosine_similarity(va, vp);
  double sn = clone::cosine_similarity(va, vn);
  return std::max(0.0, margin - sp + sn);
}

Vec cosine_gradient(std::span<const double> u, std::span<const double> v) {
  double nu = checked_norm(u);
  double nv = checked_norm(v);
  double c = num::dot(u, v) / (nu * nv);
  Vec g(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) g[i] = v[i] / (nu * nv) - c * u[i] / (nu * nu);
  return g;
}

void backward_program(const graph::EventDependencyGraph& g, const model::ProgramTrace& trace,
                      std::span<const double> dq, const ModelParams& params, const ModelConfig& c,
                      Gradients& grads) {
  const std::size_t d = c.dim;
  const std::size_t positions = c.pad_len - c.kernel_length + 1;
  const std::size_t rows = trace.finals.size();

  // Window sums of the restored rows, as in the forward convolution.
  std::vector<Vec> sums(c.kernel_length, Vec(d, 0.0));
  for (std::size_t j = 0; j < c.kernel_length; ++j) {
    std::size_t last = std::min(j + positions, rows);
    for (std::size_t r = j; r < last; ++r) num::axpy(sums[j], 1.0, trace.nodes[trace.finals[r]].output);
  }

  std::vector<Vec> dsums(c.kernel_length, Vec(d, 0.0));
  if (c.conv == model::ConvKernel::StatementAxis) {
    double scale = static_cast<double>(positions) * static_cast<double>(d);
    for (std::size_t j = 0; j < c.kernel_length; ++j) {
      double total = 0.0;
      for (double x : sums[j]) total += x;
      double ds = 0.0;
      for (std::size_t m = 0; m < c.kernels; ++m) {
        grads.conv.at(m, j) += dq[m] * total / scale;
        ds += dq[m] * params.conv.at(m, j) / scale;
      }
      std::fill(dsums[j].begin(), dsums[j].end(), ds);
    }
  } else {
    double scale = static_cast<double>(positions);
    for (std::size_t m = 0; m < c.kernels; ++m) {
      double w = dq[m] / scale;
      if (w == 0.0) continue;
      for (std::size_t j = 0; j < c.kernel_length; ++j) {
        for (std::size_t ch = 0; ch < d; ++ch) {
          grads.conv.at(m, j, ch) += w * sums[j][ch];
          dsums[j][ch] += w * params.conv.at(m, j, ch);
        }
      }
    }
  }

  std::vector<Vec> dA(g.nodes.size());
  for (std::size_t r = 0; r < rows; ++r) {
    Vec& target = dA[trace.finals[r]];
    if (target.empty()) target.assign(d, 0.0);
    std::size_t lo = r + 1 > positions ? r + 1 - positions : 0;
    std::size_t hi = std::min(r, c.kernel_length - 1);
    for (std::size_t j = lo; j <= hi; ++j) num::axpy(target, 1.0, dsums[j]);
  }

  auto route = [&](const model::InputSource& src, const Vec& grad) {
    if (src.from_node) {
      Vec& target = dA[src.index];
      if (target.empty()) target.assign(d, 0.0);
      num::axpy(target, 1.0, grad);
    } else {
      num::axpy(grads.entities.data().subspan(src.index * d, d), 1.0, grad);
    }
  };

  const auto dense = params.dense.matrix();
  const auto wr = params.reset_gate.matrix();
  const auto wz = params.update_gate.matrix();
  for (auto it = trace.order.rbegin(); it != trace.order.rend(); ++it) {
    const graph::NodeId id = *it;
    if (dA[id].empty()) continue;
    const auto& t = trace.nodes[id];
    const auto op = g.nodes[id].op;
    const Vec& dout = dA[id];

    Vec dprev(d), dz(d), dpre(d);
    for (std::size_t i = 0; i < d; ++i) {
      dprev[i] = (1.0 - t.update[i]) * dout[i];
      dz[i] = dout[i] * (t.candidate[i] - t.state[i]);
      dpre[i] = dout[i] * t.update[i] * (1.0 - t.candidate[i] * t.candidate[i]);
    }

    num::add_outer(grads.dense.data(), dpre, t.cell_input);
    num::axpy(grads.bias.data(), 1.0, dpre);
    Vec djoined = num::vecmat(dpre, dense);

    Vec drs(d, 0.0), dother(d, 0.0);
    const auto& t1 = params.left[op];
    const auto& t2 = params.right[op];
    for (std::size_t k = 0; k < c.slices; ++k) {
      std::span<const double> dl(djoined.data() + 2 * k * d, d);
      std::span<const double> dr(djoined.data() + 2 * k * d + d, d);
      num::add_outer(grads.left[op].slice_data(k), t.reset_state, dl);
      num::add_outer(grads.right[op].slice_data(k), t.other, dr);
      num::axpy(drs, 1.0, num::matvec(t1.slice(k), dl));
      num::axpy(dother, 1.0, num::matvec(t2.slice(k), dr));
    }

    Vec dpr(d), dpz(d);
    for (std::size_t i = 0; i < d; ++i) {
      dprev[i] += drs[i] * t.reset[i];
      dpr[i] = drs[i] * t.state[i] * t.reset[i] * (1.0 - t.reset[i]);
      dpz[i] = dz[i] * t.update[i] * (1.0 - t.update[i]);
    }
    Vec gate_in = num::concat(t.state, t.other);
    num::add_outer(grads.reset_gate.data(), dpr, gate_in);
    num::add_outer(grads.update_gate.data(), dpz, gate_in);
    Vec dgate = num::vecmat(dpr, wr);
    num::axpy(dgate, 1.0, num::vecmat(dpz, wz));
    for (std::size_t i = 0; i < d; ++i) {
      dprev[i] += dgate[i];
      dother[i] += dgate[d + i];
    }

    route(t.state_source, dprev);
    route(t.other_source, dother);
  }
}

double triplet_loss(const graph::EventDependencyGraph& anchor, const graph::EventDependencyGraph& positive,
                    const graph::EventDependencyGraph& negative, const ModelParams& params,
                    const ModelConfig& config, double margin) {
  auto va = model::embed_program(anchor, params, config);
  auto vp = model::embed_program(positive, params, config);
  auto vn = model::embed_program(negative, params, config);
  return hinge_loss(va.values, vp.values, vn.values, margin);
}

double backward(const graph::EventDependencyGraph& anchor, const graph::EventDependencyGraph& positive,
                const graph::EventDependencyGraph& negative, const ModelParams& params,
                const ModelConfig& config, Gradients& grads, double margin) {
  auto ta = model::trace_program(anchor, params, config);
  auto tp = model::trace_program(positive, params, config);
  auto tn = model::trace_program(negative, params, config);
  const Vec& va = ta.vector.values;
  const Vec& vp = tp.vector.values;
  const Vec& vn = tn.vector.values;
  double loss = hinge_loss(va, vp, vn, margin);
  if (loss <= 0.0) return 0.0;

  Vec da = cosine_gradient(va, vn);
  num::axpy(da, -1.0, cosine_gradient(va, vp));
  Vec dp = cosine_gradient(vp, va);
  for (double& x : dp) x = -x;
  Vec dn = cosine_gradient(vn, va);

  backward_program(anchor, ta, da, params, config, grads);
  backward_program(positive, tp, dp, params, config, grads);
  backward_program(negative, tn, dn, params, config, grads);
  return loss;
}

}  // namespace eventclone::train
