// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <map>
#include <stdexcept>

#include "eventclone/error.hpp"
#include "eventclone/train.hpp"

namespace eventclone::train {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning rate must be finite and non-negative");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (negatives_per_anchor == 0) throw std::invalid_argument("negatives per anchor must be positive");
  if (margin != 1.0) throw std::invalid_argument("margin is fixed at 1.0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) ||
      !(adam_epsilon > 0.0)) {
    throw std::invalid_argument("bad Adam hyperparameters");
  }
}

std::vector<std::size_t> sample_negatives(const clone::CloneDataset& data, std::span<const std::size_t> pool,
                                          std::size_t anchor, num::Rng& rng, std::size_t count) {
  const std::string& label = data.fragments.at(anchor).label;
  std::vector<std::size_t> candidates;
  for (std::size_t i : pool) {
    if (data.fragments.at(i).label != label) candidates.push_back(i);
  }
  if (candidates.empty()) throw DatasetError("negative sampling needs at least two problem labels");
  std::vector<std::size_t> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(candidates[rng.below(candidates.size())]);
  return out;
}

OptimizerState::OptimizerState(const TrainConfig& config, const ModelParams& like) : config_(config) {
  if (config_.optimizer != Optimizer::Adam) return;
  like.for_each([&](const std::string&, const num::Tensor& t) {
    m_.emplace_back(t.size(), 0.0);
    v_.emplace_back(t.size(), 0.0);
  });
}

void OptimizerState::step(ModelParams& params, const Gradients& grads) {
  std::vector<std::span<const double>> g;
  grads.for_each([&](const std::string&, const num::Tensor& t) { g.push_back(t.data()); });
  const double lr = config_.learning_rate;
  std::size_t idx = 0;
  if (config_.optimizer == Optimizer::Sgd) {
    params.for_each([&](const std::string&, num::Tensor& t) {
      num::axpy(t.data(), -lr, g[idx++]);
    });
    return;
  }
  ++t_;
  const double b1 = config_.adam_beta1, b2 = config_.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  params.for_each([&](const std::string&, num::Tensor& t) {
    auto p = t.data();
    auto gi = g[idx];
    Vec& m = m_[idx];
    Vec& v = v_[idx];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * gi[i];
      v[i] = b2 * v[i] + (1.0 - b2) * gi[i] * gi[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.adam_epsilon);
    }
    ++idx;
  });
}

namespace {

std::vector<Triplet> sample_triplets(const clone::CloneDataset& data, std::span<const std::size_t> pool,
                                     const TrainConfig& config, num::Rng& rng) {
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i : pool) by_label[data.fragments[i].label].push_back(i);

  std::vector<Triplet> out;
  for (std::size_t a : pool) {
    const auto& same = by_label[data.fragments[a].label];
    if (same.size() < 2) continue;
    std::size_t pick = rng.below(same.size() - 1);
    std::size_t positive = same[pick] == a ? same.back() : same[pick];
    for (std::size_t n : sample_negatives(data, pool, a, rng, config.negatives_per_anchor))
      out.push_back({a, positive, n});
  }
  return out;
}

}  // namespace

TrainResult train(const clone::CloneDataset& data, const ModelConfig& model_config,
                  const TrainConfig& train_config, ModelParams initial, const EpochCallback& on_epoch) {
  model_config.validate();
  train_config.validate();
  initial.check(model_config);
  auto pool = data.indices(clone::Split::Train);
  if (pool.empty()) throw DatasetError("no training fragments");

  TrainResult result{std::move(initial), {}};
  num::Rng rng(train_config.seed ^ 0x7261696e5f726e67ull);
  OptimizerState opt(train_config, result.params);
  Gradients grads = ModelParams::zeros(model_config);

  const auto triplets = sample_triplets(data, pool, train_config, rng);
  if (triplets.empty()) throw DatasetError("no problem has two training fragments");
  std::vector<std::size_t> visit(triplets.size());
  for (std::size_t i = 0; i < visit.size(); ++i) visit[i] = i;
  std::vector<double> losses(triplets.size(), 0.0);
  const std::size_t batches = (triplets.size() + train_config.batch_size - 1) / train_config.batch_size;

  for (std::size_t epoch = 1; epoch <= train_config.epochs; ++epoch) {
    rng.shuffle(visit);
    for (std::size_t start = 0; start < visit.size(); start += train_config.batch_size) {
      std::size_t end = std::min(start + train_config.batch_size, visit.size());
      grads.for_each([](const std::string&, num::Tensor& t) { t.fill(0.0); });
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const auto& t = triplets[visit[i]];
        double l = backward(data.fragments[t.anchor].graph, data.fragments[t.positive].graph,
                            data.fragments[t.negative].graph, result.params, model_config, grads,
                            train_config.margin);
        losses[visit[i]] = l;
        batch_loss += l;
      }
      if (!std::isfinite(batch_loss))
        throw NonFiniteLoss("non-finite loss in epoch " + std::to_string(epoch));
      opt.step(result.params, grads);
    }
    double total = 0.0;
    for (double l : losses) total += l;
    double mean = total / static_cast<double>(batches);
    result.loss_history.push_back(mean);
    if (on_epoch) on_epoch(epoch, result.params, mean);
  }
  return result;
}

TrainResult train(const clone::CloneDataset& data, const ModelConfig& model_config,
                  const TrainConfig& train_config, const EpochCallback& on_epoch) {
  return train(data, model_config, train_config, ModelParams::initialize(model_config, train_config.seed),
               on_epoch);
}

}  // namespace eventclone::train
