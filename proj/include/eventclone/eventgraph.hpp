// SPDX-License-Identifier: Apache-2.0
//
// Event dependency graphs: one node per (entity, operator, entity) event,
// intra-statement edges from the embedding tree of each statement and
// inter-statement edges from variable def-use.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eventclone/cparse.hpp"

namespace eventclone::graph {

using NodeId = std::size_t;
using OperatorId = std::uint8_t;

inline constexpr std::size_t kOperatorCount = 38;

/// Fixed operator table; ids are positions in this array.
inline constexpr std::array<std::string_view, kOperatorCount> kOperatorNames = {
    "assign",     "return",     "param",       "parammix", "invoke", "sizeof", "member",
    "index",      "addr-of",    "deref",       "neg",      "not",    "bitnot", "add",
    "sub",        "mul",        "div",         "mod",      "lt",     "gt",     "le",
    "ge",         "eq",         "ne",          "and",      "or",     "bitand", "bitor",
    "bitxor",     "shl",        "shr",         "cond-guard", "loop-body", "branch-then",
    "branch-else", "decl-init", "cast",        "comma"};

std::optional<OperatorId> operator_by_name(std::string_view name);
std::string_view operator_name(OperatorId id);

namespace ops {
OperatorId id(std::string_view name);  // throws std::out_of_range for unknown names
}

enum class EntityKind {
  Variable,
  Function,
  ConstInt,
  ConstFloat,
  ConstStr,
  ConstChar,
  NodeRef,
};

std::string_view to_string(EntityKind kind);

struct Entity {
  EntityKind kind = EntityKind::Variable;
  std::string value;           // name or literal spelling; empty for node-refs
  std::optional<NodeId> ref;   // set iff kind == NodeRef
  std::optional<int> rank;     // Top_i index, 1-based, set by rank_entities

  static Entity variable(std::string name) { return {EntityKind::Variable, std::move(name), {}, {}}; }
  static Entity function(std::string name) { return {EntityKind::Function, std::move(name), {}, {}}; }
  static Entity constant(EntityKind kind, std::string value) { return {kind, std::move(value), {}, {}}; }
  static Entity node_ref(NodeId id) { return {EntityKind::NodeRef, {}, id, {}}; }

  bool is_ref() const { return kind == EntityKind::NodeRef; }

  friend bool operator==(const Entity&, const Entity&) = default;
};

/// Identity of a non-ref entity for counting and ranking.
using EntityKey = std::pair<EntityKind, std::string>;

struct EventNode {
  NodeId id = 0;
  Entity entity1;
  OperatorId op = 0;
  Entity entity2;
  std::size_t statement = 0;
  bool statement_final = false;

  friend bool operator==(const EventNode&, const EventNode&) = default;
};

using Edge = std::pair<NodeId, NodeId>;

struct EventDependencyGraph {
  std::vector<EventNode> nodes;
  std::set<Edge> edges;
  std::size_t statement_count = 0;
  std::map<EntityKey, int> rank_table;

  /// Edges implied by node-ref entities.
  std::set<Edge> implied_edges() const;

  /// Checks every structural invariant; throws GraphError naming the first
  /// violation (backward edge, dangling ref, edge/ref mismatch, missing or
  /// duplicate statement-final node, statement index out of range).
  void validate() const;

  /// Id of the statement-final node of each statement, by statement index.
  std::vector<NodeId> statement_finals() const;

  friend bool operator==(const EventDependencyGraph&, const EventDependencyGraph&) = default;
};

struct BuildOptions {
  /// Receives one message per statement dropped for lowering to zero events.
  std::vector<std::string>* warnings = nullptr;
};

/// Lowers every statement of the translation unit to its event embedding
/// tree and links variable reads to the statement-final node of the latest
/// earlier statement writing that variable.
EventDependencyGraph build_event_graph(const cparse::Ast& ast, BuildOptions options = {});

/// Counts occurrences of every non-ref entity and assigns Top_i ranks by
/// descending count, ties broken by (kind name, value).
EventDependencyGraph rank_entities(EventDependencyGraph graph);

/// Kahn's algorithm with smallest-id-first tie breaking. Throws CycleError.
std::vector<NodeId> topo_order(std::size_t node_count, const std::set<Edge>& edges);
std::vector<NodeId> topo_schedule(const EventDependencyGraph& graph);

/// Line-oriented text format (header "EDG v1 nodes=<n> stmts=<s>").
std::string serialize_graph(const EventDependencyGraph& graph);
/// Throws FormatError with the offending line number.
EventDependencyGraph deserialize_graph(std::string_view text);

std::string format_entity(const Entity& e);

/// Convenience: parse, build and rank in one step.
EventDependencyGraph graph_from_source(std::string_view source, BuildOptions options = {});

}  // namespace eventclone::graph
