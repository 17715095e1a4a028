// SPDX-License-Identifier: Apache-2.0
//
// Triplet training for the event model: hinge loss on cosine similarity,
// negative sampling, reverse-topological backpropagation through the event
// graph, and SGD / Adam update loops.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "eventclone/clone.hpp"
#include "eventclone/model.hpp"

namespace eventclone::train {

using model::ModelConfig;
using model::ModelParams;
using model::ProgramVector;
using num::Vec;

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::Sgd;
  double margin = 1.0;
  std::size_t negatives_per_anchor = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct Triplet {
  std::size_t anchor = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
};

/// max(0, margin - cos(va, vp) + cos(va, vn)). Throws DegenerateVector.
double hinge_loss(std::span<const double> va, std::span<const double> vp, std::span<const double> vn,
                  double margin = 1.0);

/// d cos(u, v) / du.
Vec cosine_gradient(std::span<const double> u, std::span<const double> v);

/// `count` fragments drawn uniformly from `pool` whose label differs from the anchor's.
std::vector<std::size_t> sample_negatives(const clone::CloneDataset& data, std::span<const std::size_t> pool,
                                          std::size_t anchor, num::Rng& rng, std::size_t count);

/// Gradients share the parameter layout.
using Gradients = ModelParams;

/// Adds the gradient of sum(dvector . vector) over the program into `grads`.
void backward_program(const graph::EventDependencyGraph& graph, const model::ProgramTrace& trace,
                      std::span<const double> dvector, const ModelParams& params, const ModelConfig& config,
                      Gradients& grads);

/// Loss of one triplet of graphs.
double triplet_loss(const graph::EventDependencyGraph& anchor, const graph::EventDependencyGraph& positive,
                    const graph::EventDependencyGraph& negative, const ModelParams& params,
                    const ModelConfig& config, double margin = 1.0);

/// Forward and backward for one triplet; accumulates into `grads`, returns the loss.
double backward(const graph::EventDependencyGraph& anchor, const graph::EventDependencyGraph& positive,
                const graph::EventDependencyGraph& negative, const ModelParams& params,
                const ModelConfig& config, Gradients& grads, double margin = 1.0);

class OptimizerState {
 public:
  OptimizerState(const TrainConfig& config, const ModelParams& like);
  void step(ModelParams& params, const Gradients& grads);

 private:
  TrainConfig config_;
  std::vector<Vec> m_;
  std::vector<Vec> v_;
  std::uint64_t t_ = 0;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_history;  // mean batch loss per epoch
};

/// Called after every epoch with the 1-based epoch number.
using EpochCallback = std::function<void(std::size_t epoch, const ModelParams&, double mean_loss)>;

/// Every train fragment anchors one triplet per negative with a random
/// same-label positive, drawn once from the seed. Each epoch visits the
/// triplets in a fresh seeded order. The recorded loss is the triplet loss
/// total divided by the batch count, summed in a fixed order.
/// Throws NonFiniteLoss if a batch loss is not finite.
TrainResult train(const clone::CloneDataset& data, const ModelConfig& model_config,
                  const TrainConfig& train_config, ModelParams initial, const EpochCallback& on_epoch = {});
TrainResult train(const clone::CloneDataset& data, const ModelConfig& model_config,
                  const TrainConfig& train_config, const EpochCallback& on_epoch = {});

}  // namespace eventclone::train
