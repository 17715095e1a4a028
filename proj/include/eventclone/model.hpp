// SPDX-License-Identifier: Apache-2.0
//
// Event-dependent execution engine: per-operator bilinear Event Cell, the
// gated Event Transformer step, graph-order embedding, the restore layer and
// the convolutional layer that turns a program into a fixed-length vector.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "eventclone/eventgraph.hpp"
#include "eventclone/numkernel.hpp"

namespace eventclone::model {

using num::Tensor;
using num::Vec;

/// How convolution kernels cover the program embedding matrix.
enum class ConvKernel : std::uint8_t {
  /// Kernels of shape (n_k, l_k) slide along the statement axis of every
  /// embedding channel independently; Z is averaged over channels and positions.
  StatementAxis = 0,
  /// Kernels of shape (n_k, l_k, d) span the whole embedding row at each tap;
  /// Z is averaged over positions.
  FullWidth = 1,
};

struct ModelConfig {
  std::size_t dim = 64;          // d: entity and event vector length
  std::size_t slices = 2;        // K: first dimension of each operator tensor
  std::size_t kernels = 128;     // n_k
  std::size_t kernel_length = 3; // l_k
  std::size_t pad_len = 256;     // statements after padding
  std::size_t top_vocab = 512;   // Top_i ranks with their own vector
  ConvKernel conv = ConvKernel::FullWidth;

  /// Throws ShapeError if any field is zero or kernel_length > pad_len.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ModelParams {
  std::vector<Tensor> left;   // T_p1 per operator, (K, d, d)
  std::vector<Tensor> right;  // T_p2 per operator, (K, d, d)
  Tensor reset_gate;          // W_r, (d, 2d)
  Tensor update_gate;         // W_z, (d, 2d)
  Tensor dense;               // (d, 2Kd)
  Tensor bias;                // (d)
  Tensor entities;            // (top_vocab, d); row i holds Top_{i+1}
  Tensor conv;                // (n_k, l_k) or (n_k, l_k, d)

  static ModelParams zeros(const ModelConfig& config);
  /// Xavier-uniform weights from a seeded stream, zero bias.
  static ModelParams initialize(const ModelConfig& config, std::uint64_t seed);

  /// Visits every tensor with a stable name ("T1/assign", ..., "conv").
  void for_each(const std::function<void(const std::string&, Tensor&)>& fn);
  void for_each(const std::function<void(const std::string&, const Tensor&)>& fn) const;

  /// Throws ShapeError on any shape mismatch, NumericError on non-finite values.
  void check(const ModelConfig& config) const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct EventEmbeddingMatrix {
  std::vector<Vec> rows;  // row i is node i's event embedding
};

struct ProgramEmbeddingMatrix {
  std::vector<Vec> rows;  // row k is statement k's final event embedding
};

struct ProgramVector {
  Vec values;  // length n_k
  friend bool operator==(const ProgramVector&, const ProgramVector&) = default;
};

/// Entity-table row for a ranked, non-ref entity: min(rank, top_vocab) - 1.
std::size_t entity_row(const graph::Entity& entity, const ModelConfig& config);
Vec lookup_entity(const graph::Entity& entity, const ModelParams& params, const ModelConfig& config);

Vec event_cell(std::span<const double> a, graph::OperatorId op, std::span<const double> o,
               const ModelParams& params);
Vec event_transformer_step(std::span<const double> prev, graph::OperatorId op,
                           std::span<const double> o, const ModelParams& params);

EventEmbeddingMatrix embed_graph(const graph::EventDependencyGraph& graph, const ModelParams& params,
                                 const ModelConfig& config);
/// Processes nodes in the given order, which must be topological (GraphError otherwise).
EventEmbeddingMatrix embed_graph(const graph::EventDependencyGraph& graph, const ModelParams& params,
                                 const ModelConfig& config, std::span<const graph::NodeId> order);

ProgramEmbeddingMatrix restore(const EventEmbeddingMatrix& events,
                               const graph::EventDependencyGraph& graph);

ProgramVector convolve(const ProgramEmbeddingMatrix& program, const ModelParams& params,
                       const ModelConfig& config);

ProgramVector embed_program(const graph::EventDependencyGraph& graph, const ModelParams& params,
                            const ModelConfig& config);

// -- forward traces for backpropagation ---------------------------------------

/// Where an Event Transformer input came from.
struct InputSource {
  bool from_node = false;
  std::size_t index = 0;  // node id, or entity-table row
};

struct NodeTrace {
  InputSource state_source;  // A_{t-1}
  InputSource other_source;  // O_t
  Vec state;
  Vec other;
  Vec reset;        // r
  Vec update;       // z
  Vec reset_state;  // r * A_{t-1}
  Vec cell_input;   // concat of the K bilinear blocks, length 2Kd
  Vec candidate;    // Ã_t
  Vec output;       // A_t
};

struct ProgramTrace {
  std::vector<graph::NodeId> order;
  std::vector<NodeTrace> nodes;       // indexed by node id
  std::vector<graph::NodeId> finals;  // statement-final node per statement
  ProgramVector vector;
};

/// Chooses which entity feeds the recurrent state: entity1, unless only
/// entity2 is a node-ref. Returns {state entity, other entity}.
std::pair<const graph::Entity*, const graph::Entity*> chain_inputs(const graph::EventNode& node);

ProgramTrace trace_program(const graph::EventDependencyGraph& graph, const ModelParams& params,
                           const ModelConfig& config);

// -- checkpoints --------------------------------------------------------------

/// Binary container: magic "EDAM1", config record, then named tensors with
/// little-endian 64-bit float payloads.
std::string encode_checkpoint(const ModelConfig& config, const ModelParams& params);
std::pair<ModelConfig, ModelParams> decode_checkpoint(std::string_view bytes);
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config,
                     const ModelParams& params);
std::pair<ModelConfig, ModelParams> load_checkpoint(const std::filesystem::path& path);

}  // namespace eventclone::model
