// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "eventclone/error.hpp"
#include "eventclone/model.hpp"

namespace eventclone::model {

using graph::Entity;
using graph::EventDependencyGraph;
using graph::NodeId;
using graph::OperatorId;

void ModelConfig::validate() const {
  if (dim == 0 || slices == 0 || kernels == 0 || kernel_length == 0 || pad_len == 0 || top_vocab == 0)
    throw ShapeError("model config fields must be positive");
  if (kernel_length > pad_len) throw ShapeError("kernel length exceeds padded length");
}

namespace {

std::vector<std::size_t> conv_shape(const ModelConfig& c) {
  if (c.conv == ConvKernel::FullWidth) return {c.kernels, c.kernel_length, c.dim};
  return {c.kernels, c.kernel_length};
}

}  // namespace

ModelParams ModelParams::zeros(const ModelConfig& c) {
  c.validate();
  ModelParams p;
  for (std::size_t i = 0; i < graph::kOperatorCount; ++i) {
    p.left.emplace_back(std::vector<std::size_t>{c.slices, c.dim, c.dim});
    p.right.emplace_back(std::vector<std::size_t>{c.slices, c.dim, c.dim});
  }
  p.reset_gate = Tensor({c.dim, 2 * c.dim});
  p.update_gate = Tensor({c.dim, 2 * c.dim});
  p.dense = Tensor({c.dim, 2 * c.slices * c.dim});
  p.bias = Tensor({c.dim});
  p.entities = Tensor({c.top_vocab, c.dim});
  p.conv = Tensor(conv_shape(c));
  return p;
}

ModelParams ModelParams::initialize(const ModelConfig& c, std::uint64_t seed) {
  ModelParams p = zeros(c);
  num::Rng rng(seed);
  p.for_each([&](const std::string& name, Tensor& t) {
    if (name == "bias") return;
    t = num::init_params(t.shape(), rng, num::InitScheme::XavierUniform);
  });
  return p;
}

void ModelParams::for_each(const std::function<void(const std::string&, Tensor&)>& fn) {
  for (std::size_t i = 0; i < left.size(); ++i) fn("T1/" + std::string(graph::operator_name(static_cast<OperatorId>(i))), left[i]);
  for (std::size_t i = 0; i < right.size(); ++i) fn("T2/" + std::string(graph::operator_name(static_cast<OperatorId>(i))), right[i]);
  fn("W_r", reset_gate);
  fn("W_z", update_gate);
  fn("dense", dense);
  fn("bias", bias);
  fn("entities", entities);
  fn("conv", conv);
}

void ModelParams::for_each(const std::function<void(const std::string&, const Tensor&)>& fn) const {
  const_cast<ModelParams*>(this)->for_each(
      [&](const std::string& name, Tensor& t) { fn(name, static_cast<const Tensor&>(t)); });
}

void ModelParams::check(const ModelConfig& c) const {
  ModelParams expected = zeros(c);
  if (left.size() != expected.left.size() || right.size() != expected.right.size())
    throw ShapeError("operator tensor count does not match the operator table");
  std::vector<std::pair<std::string, std::vector<std::size_t>>> want;
  expected.for_each([&](const std::string& n, const Tensor& t) { want.emplace_back(n, t.shape()); });
  std::size_t i = 0;
  for_each([&](const std::string& n, const Tensor& t) {
    if (t.shape() != want[i].second) {
      throw ShapeError("parameter " + n + " has shape " + num::shape_string(t.shape()) + ", expected " +
                       num::shape_string(want[i].second));
    }
    if (!t.all_finite()) throw NumericError("parameter " + n + " is not finite");
    ++i;
  });
}

std::size_t entity_row(const Entity& entity, const ModelConfig& config) {
  if (entity.is_ref()) throw RefError("node-ref entity has no vector in the entity table");
  if (!entity.rank || *entity.rank < 1)
    throw RefError("entity " + graph::format_entity(entity) + " has not been ranked");
  return std::min(static_cast<std::size_t>(*entity.rank), config.top_vocab) - 1;
}

Vec lookup_entity(const Entity& entity, const ModelParams& params, const ModelConfig& config) {
  auto row = params.entities.matrix().row(entity_row(entity, config));
  return Vec(row.begin(), row.end());
}

namespace {

std::size_t model_dim(const ModelParams& p) { return p.bias.size(); }

void require_dim(std::span<const double> v, std::size_t d, const char* what) {
  if (v.size() != d)
    throw ShapeError(std::string(what) + " has length " + std::to_string(v.size()) + ", expected " +
                     std::to_string(d));
}

// Shared forward kernel; fills the cell-level trace fields.
Vec cell_forward(std::span<const double> a, OperatorId op, std::span<const double> o,
                 const ModelParams& params, Vec* cell_input) {
  std::size_t d = model_dim(params);
  require_dim(a, d, "entity-1 vector");
  require_dim(o, d, "entity-2 vector");
  if (op >= params.left.size()) throw ShapeError("operator id out of range");
  const Tensor& t1 = params.left[op];
  const Tensor& t2 = params.right[op];
  std::size_t slices = t1.dim(0);
  Vec joined;
  joined.reserve(2 * slices * d);
  for (std::size_t k = 0; k < slices; ++k) {
    Vec lhs = num::vecmat(a, t1.slice(k));
    Vec rhs = num::vecmat(o, t2.slice(k));
    joined.insert(joined.end(), lhs.begin(), lhs.end());
    joined.insert(joined.end(), rhs.begin(), rhs.end());
  }
  Vec pre = num::matvec(params.dense, joined);
  for (std::size_t i = 0; i < d; ++i) pre[i] += params.bias[i];
  if (cell_input) *cell_input = std::move(joined);
  return num::tanh(pre);
}

Vec step_forward(std::span<const double> prev, OperatorId op, std::span<const double> o,
                 const ModelParams& params, NodeTrace* trace) {
  std::size_t d = model_dim(params);
  require_dim(prev, d, "state vector");
  require_dim(o, d, "entity-2 vector");
  Vec gate_in = num::concat(prev, o);
  Vec r = num::sigmoid(num::matvec(params.reset_gate, gate_in));
  Vec z = num::sigmoid(num::matvec(params.update_gate, gate_in));
  Vec rs = num::hadamard(r, prev);
  Vec* cell_input = trace ? &trace->cell_input : nullptr;
  Vec cand = cell_forward(rs, op, o, params, cell_input);
  Vec out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = (1.0 - z[i]) * prev[i] + z[i] * cand[i];
  if (trace) {
    trace->state.assign(prev.begin(), prev.end());
    trace->other.assign(o.begin(), o.end());
    trace->reset = std::move(r);
    trace->update = std::move(z);
    trace->reset_state = std::move(rs);
    trace->candidate = std::move(cand);
    trace->output = out;
  }
  return out;
}

void check_order(const EventDependencyGraph& g, std::span<const NodeId> order) {
  if (order.size() != g.nodes.size()) throw GraphError("processing order does not cover every node");
  std::vector<std::size_t> position(g.nodes.size(), g.nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] >= g.nodes.size() || position[order[i]] != g.nodes.size())
      throw GraphError("processing order is not a permutation of node ids");
    position[order[i]] = i;
  }
  for (const auto& [from, to] : g.edges) {
    if (position[from] > position[to]) throw GraphError("processing order is not topological");
  }
}

InputSource source_of(const Entity& e, const ModelConfig& config) {
  if (e.is_ref()) return {true, *e.ref};
  return {false, entity_row(e, config)};
}

std::span<const double> fetch(const InputSource& src, const std::vector<Vec>& rows,
                              const ModelParams& params) {
  if (src.from_node) {
    if (rows[src.index].empty()) throw GraphError("node " + std::to_string(src.index) + " used before it was embedded");
    return rows[src.index];
  }
  return params.entities.matrix().row(src.index);
}

}  // namespace

Vec event_cell(std::span<const double> a, OperatorId op, std::span<const double> o,
               const ModelParams& params) {
  return cell_forward(a, op, o, params, nullptr);
}

Vec event_transformer_step(std::span<const double> prev, OperatorId op, std::span<const double> o,
                           const ModelParams& params) {
  return step_forward(prev, op, o, params, nullptr);
}

std::pair<const Entity*, const Entity*> chain_inputs(const graph::EventNode& node) {
  if (!node.entity1.is_ref() && node.entity2.is_ref()) return {&node.entity2, &node.entity1};
  return {&node.entity1, &node.entity2};
}

namespace {

EventEmbeddingMatrix run_graph(const EventDependencyGraph& g, const ModelParams& params,
                               const ModelConfig& config, std::span<const NodeId> order,
                               std::vector<NodeTrace>* traces) {
  EventEmbeddingMatrix out;
  out.rows.resize(g.nodes.size());
  if (traces) traces->assign(g.nodes.size(), NodeTrace{});
  for (NodeId id : order) {
    const auto& node = g.nodes[id];
    auto [state_entity, other_entity] = chain_inputs(node);
    InputSource ss = source_of(*state_entity, config);
    InputSource os = source_of(*other_entity, config);
    NodeTrace* tr = traces ? &(*traces)[id] : nullptr;
    out.rows[id] = step_forward(fetch(ss, out.rows, params), node.op, fetch(os, out.rows, params), params, tr);
    if (tr) {
      tr->state_source = ss;
      tr->other_source = os;
    }
  }
  return out;
}

}  // namespace

EventEmbeddingMatrix embed_graph(const EventDependencyGraph& g, const ModelParams& params,
                                 const ModelConfig& config) {
  auto order = graph::topo_schedule(g);
  return run_graph(g, params, config, order, nullptr);
}

EventEmbeddingMatrix embed_graph(const EventDependencyGraph& g, const ModelParams& params,
                                 const ModelConfig& config, std::span<const NodeId> order) {
  check_order(g, order);
  return run_graph(g, params, config, order, nullptr);
}

ProgramEmbeddingMatrix restore(const EventEmbeddingMatrix& events, const EventDependencyGraph& g) {
  if (events.rows.size() != g.nodes.size()) {
    throw ShapeError("event embedding matrix has " + std::to_string(events.rows.size()) +
                     " rows for " + std::to_string(g.nodes.size()) + " nodes");
  }
  ProgramEmbeddingMatrix out;
  out.rows.resize(g.statement_count);
  for (const auto& node : g.nodes) {
    if (node.statement_final) out.rows[node.statement] = events.rows[node.id];
  }
  return out;
}

namespace {

// S[j][c] = sum over the valid window positions t of Xpad[t + j][c]; rows past
// the program are zero padding, so only real rows contribute.
std::vector<Vec> window_sums(const ProgramEmbeddingMatrix& x, const ModelConfig& c) {
  std::size_t positions = c.pad_len - c.kernel_length + 1;
  std::vector<Vec> sums(c.kernel_length, Vec(c.dim, 0.0));
  for (std::size_t j = 0; j < c.kernel_length; ++j) {
    std::size_t last = std::min(j + positions, x.rows.size());
    for (std::size_t r = j; r < last; ++r) num::axpy(sums[j], 1.0, x.rows[r]);
  }
  return sums;
}

}  // namespace

ProgramVector convolve(const ProgramEmbeddingMatrix& x, const ModelParams& params, const ModelConfig& c) {
  if (x.rows.empty()) throw ShapeError("program embedding matrix is empty");
  if (x.rows.size() > c.pad_len) {
    throw ShapeError("program has " + std::to_string(x.rows.size()) + " statements, more than pad_len " +
                     std::to_string(c.pad_len));
  }
  for (const auto& row : x.rows) require_dim(row, c.dim, "program embedding row");
  auto sums = window_sums(x, c);
  double positions = static_cast<double>(c.pad_len - c.kernel_length + 1);
  ProgramVector q;
  q.values.assign(c.kernels, 0.0);
  for (std::size_t m = 0; m < c.kernels; ++m) {
    double s = 0.0;
    for (std::size_t j = 0; j < c.kernel_length; ++j) {
      if (c.conv == ConvKernel::StatementAxis) {
        double w = params.conv.at(m, j);
        double total = 0.0;
        for (double v : sums[j]) total += v;
        s += w * total;
      } else {
        for (std::size_t ch = 0; ch < c.dim; ++ch) s += params.conv.at(m, j, ch) * sums[j][ch];
      }
    }
    double scale = c.conv == ConvKernel::StatementAxis ? positions * static_cast<double>(c.dim) : positions;
    q.values[m] = s / scale;
  }
  return q;
}

ProgramVector embed_program(const EventDependencyGraph& g, const ModelParams& params, const ModelConfig& c) {
  return convolve(restore(embed_graph(g, params, c), g), params, c);
}

ProgramTrace trace_program(const EventDependencyGraph& g, const ModelParams& params, const ModelConfig& c) {
  ProgramTrace t;
  t.order = graph::topo_schedule(g);
  auto events = run_graph(g, params, c, t.order, &t.nodes);
  t.finals = g.statement_finals();
  t.vector = convolve(restore(events, g), params, c);
  return t;
}

}  // namespace eventclone::model
