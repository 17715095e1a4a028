// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <charconv>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "base64.hpp"
#include "eventclone/error.hpp"
#include "eventclone/eventgraph.hpp"

namespace eventclone::graph {

std::optional<OperatorId> operator_by_name(std::string_view name) {
  auto it = std::find(kOperatorNames.begin(), kOperatorNames.end(), name);
  if (it == kOperatorNames.end()) return std::nullopt;
  return static_cast<OperatorId>(it - kOperatorNames.begin());
}

std::string_view operator_name(OperatorId id) { return kOperatorNames.at(id); }

OperatorId ops::id(std::string_view name) {
  if (auto id = operator_by_name(name)) return *id;
  throw std::out_of_range("unknown operator " + std::string(name));
}

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::Variable: return "variable";
    case EntityKind::Function: return "function";
    case EntityKind::ConstInt: return "constant-int";
    case EntityKind::ConstFloat: return "constant-float";
    case EntityKind::ConstStr: return "constant-str";
    case EntityKind::ConstChar: return "constant-char";
    case EntityKind::NodeRef: return "node-ref";
  }
  return "?";
}

std::set<Edge> EventDependencyGraph::implied_edges() const {
  std::set<Edge> out;
  for (const auto& n : nodes) {
    if (n.entity1.is_ref()) out.emplace(*n.entity1.ref, n.id);
    if (n.entity2.is_ref()) out.emplace(*n.entity2.ref, n.id);
  }
  return out;
}

void EventDependencyGraph::validate() const {
  auto fail = [](const std::string& msg) { throw GraphError("invalid event graph: " + msg); };
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.id != i) fail("node at position " + std::to_string(i) + " has id " + std::to_string(n.id));
    if (n.op >= kOperatorCount) fail("node " + std::to_string(i) + " has unknown operator");
    for (const Entity* e : {&n.entity1, &n.entity2}) {
      if (e->is_ref() != e->ref.has_value())
        fail("node " + std::to_string(i) + " has inconsistent node-ref entity");
      if (e->is_ref() && *e->ref >= n.id)
        fail("node " + std::to_string(i) + " refers to node " + std::to_string(*e->ref) +
             " which does not precede it");
    }
    if (n.statement >= statement_count)
      fail("node " + std::to_string(i) + " has statement index out of range");
  }
  for (const auto& [from, to] : edges) {
    if (from >= to) fail("edge (" + std::to_string(from) + "," + std::to_string(to) + ") points backward");
    if (to >= nodes.size()) fail("edge targets missing node " + std::to_string(to));
  }
  if (edges != implied_edges()) fail("edge set does not match node-ref entities");
  std::vector<int> finals(statement_count, 0);
  for (const auto& n : nodes) {
    if (n.statement_final) ++finals[n.statement];
  }
  for (std::size_t s = 0; s < statement_count; ++s) {
    if (finals[s] != 1)
      fail("statement " + std::to_string(s) + " has " + std::to_string(finals[s]) +
           " statement-final nodes");
  }
}

std::vector<NodeId> EventDependencyGraph::statement_finals() const {
  std::vector<NodeId> out(statement_count, 0);
  for (const auto& n : nodes) {
    if (n.statement_final && n.statement < statement_count) out[n.statement] = n.id;
  }
  return out;
}

// -- ranking ------------------------------------------------------------------

EventDependencyGraph rank_entities(EventDependencyGraph graph) {
  std::map<EntityKey, std::size_t> counts;
  for (const auto& n : graph.nodes) {
    for (const Entity* e : {&n.entity1, &n.entity2}) {
      if (!e->is_ref()) ++counts[{e->kind, e->value}];
    }
  }
  std::vector<std::pair<EntityKey, std::size_t>> order(counts.begin(), counts.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    auto ka = to_string(a.first.first), kb = to_string(b.first.first);
    if (ka != kb) return ka < kb;
    return a.first.second < b.first.second;
  });
  graph.rank_table.clear();
  for (std::size_t i = 0; i < order.size(); ++i) graph.rank_table[order[i].first] = static_cast<int>(i + 1);
  for (auto& n : graph.nodes) {
    for (Entity* e : {&n.entity1, &n.entity2}) {
      if (e->is_ref()) {
        e->rank.reset();
      } else {
        e->rank = graph.rank_table.at({e->kind, e->value});
      }
    }
  }
  return graph;
}

// -- scheduling ----------------------------------------------------------------

std::vector<NodeId> topo_order(std::size_t node_count, const std::set<Edge>& edges) {
  std::vector<std::vector<NodeId>> next(node_count);
  std::vector<std::size_t> in_degree(node_count, 0);
  for (const auto& [from, to] : edges) {
    if (from >= node_count || to >= node_count) throw GraphError("edge references missing node");
    next[from].push_back(to);
    ++in_degree[to];
  }
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId i = 0; i < node_count; ++i) {
    if (in_degree[i] == 0) ready.push(i);
  }
  std::vector<NodeId> order;
  order.reserve(node_count);
  while (!ready.empty()) {
    NodeId id = ready.top();
    ready.pop();
    order.push_back(id);
    for (NodeId to : next[id]) {
      if (--in_degree[to] == 0) ready.push(to);
    }
  }
  if (order.size() != node_count) {
    throw CycleError("event graph contains a cycle through " +
                     std::to_string(node_count - order.size()) + " node(s)");
  }
  return order;
}

std::vector<NodeId> topo_schedule(const EventDependencyGraph& graph) {
  return topo_order(graph.nodes.size(), graph.edges);
}

// -- serialization -------------------------------------------------------------

std::string format_entity(const Entity& e) {
  switch (e.kind) {
    case EntityKind::Variable: return "v:" + e.value;
    case EntityKind::Function: return "f:" + e.value;
    case EntityKind::ConstInt: return "ci:" + e.value;
    case EntityKind::ConstFloat: return "cf:" + e.value;
    case EntityKind::ConstStr: return "cs:" + detail::base64_encode(e.value);
    case EntityKind::ConstChar: return "cc:" + e.value;
    case EntityKind::NodeRef: return "ref:" + std::to_string(e.ref.value_or(0));
  }
  return "?";
}

std::string serialize_graph(const EventDependencyGraph& graph) {
  std::ostringstream out;
  out << "EDG v1 nodes=" << graph.nodes.size() << " stmts=" << graph.statement_count << '\n';
  for (const auto& n : graph.nodes) {
    out << "N " << n.id << ' ' << n.statement << ' ' << (n.statement_final ? 1 : 0) << ' '
        << operator_name(n.op) << ' ' << format_entity(n.entity1) << ' ' << format_entity(n.entity2)
        << '\n';
  }
  std::vector<std::pair<int, EntityKey>> ranks;
  for (const auto& [key, rank] : graph.rank_table) ranks.emplace_back(rank, key);
  std::sort(ranks.begin(), ranks.end());
  for (const auto& [rank, key] : ranks) {
    out << "R " << rank << ' ' << format_entity(Entity{key.first, key.second, {}, {}}) << '\n';
  }
  return out.str();
}

namespace {

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

Entity parse_entity(std::string_view text, std::size_t line) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) throw FormatError(line, "entity without kind prefix: " + std::string(text));
  std::string_view tag = text.substr(0, colon);
  std::string value(text.substr(colon + 1));
  if (tag == "v" || tag == "f" || tag == "ci" || tag == "cf" || tag == "cc") {
    if (value.empty()) throw FormatError(line, "empty entity value");
  }
  if (tag == "v") return Entity::variable(value);
  if (tag == "f") return Entity::function(value);
  if (tag == "ci") return Entity::constant(EntityKind::ConstInt, value);
  if (tag == "cf") return Entity::constant(EntityKind::ConstFloat, value);
  if (tag == "cc") return Entity::constant(EntityKind::ConstChar, value);
  if (tag == "cs") {
    auto decoded = detail::base64_decode(value);
    if (!decoded) throw FormatError(line, "malformed base64 string constant");
    return Entity::constant(EntityKind::ConstStr, *decoded);
  }
  if (tag == "ref") {
    NodeId id = 0;
    if (!parse_number(value, id)) throw FormatError(line, "malformed node-ref");
    return Entity::node_ref(id);
  }
  throw FormatError(line, "unknown entity kind '" + std::string(tag) + "'");
}

}  // namespace

EventDependencyGraph deserialize_graph(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw FormatError(1, "missing header");

  auto header = split_fields(lines[0]);
  std::size_t node_count = 0, stmt_count = 0;
  if (header.size() != 4 || header[0] != "EDG" || header[1] != "v1" ||
      !header[2].starts_with("nodes=") || !header[3].starts_with("stmts=") ||
      !parse_number(header[2].substr(6), node_count) || !parse_number(header[3].substr(6), stmt_count)) {
    throw FormatError(1, "expected 'EDG v1 nodes=<n> stmts=<s>'");
  }

  EventDependencyGraph g;
  g.statement_count = stmt_count;
  std::vector<std::size_t> final_line(stmt_count, 0);
  std::vector<std::size_t> node_line;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    std::size_t lineno = li + 1;
    auto f = split_fields(lines[li]);
    if (f.empty()) throw FormatError(lineno, "blank line");
    if (f[0] == "N") {
      if (!g.rank_table.empty()) throw FormatError(lineno, "node line after rank table");
      if (f.size() != 7) throw FormatError(lineno, "node line needs 7 fields");
      EventNode n;
      int final_flag = 0;
      if (!parse_number(f[1], n.id) || n.id != g.nodes.size())
        throw FormatError(lineno, "node ids must be consecutive from 0");
      if (!parse_number(f[2], n.statement) || n.statement >= stmt_count)
        throw FormatError(lineno, "statement index out of range");
      if (!parse_number(f[3], final_flag) || (final_flag != 0 && final_flag != 1))
        throw FormatError(lineno, "final flag must be 0 or 1");
      n.statement_final = final_flag == 1;
      auto op = operator_by_name(f[4]);
      if (!op) throw FormatError(lineno, "unknown operator '" + std::string(f[4]) + "'");
      n.op = *op;
      n.entity1 = parse_entity(f[5], lineno);
      n.entity2 = parse_entity(f[6], lineno);
      for (const Entity* e : {&n.entity1, &n.entity2}) {
        if (e->is_ref() && *e->ref >= n.id)
          throw FormatError(lineno, "dangling node-ref to node " + std::to_string(*e->ref));
      }
      if (n.statement_final) {
        if (final_line[n.statement]) throw FormatError(lineno, "second statement-final node for a statement");
        final_line[n.statement] = lineno;
      }
      g.nodes.push_back(std::move(n));
      node_line.push_back(lineno);
    } else if (f[0] == "R") {
      if (f.size() != 3) throw FormatError(lineno, "rank line needs 3 fields");
      int rank = 0;
      if (!parse_number(f[1], rank) || rank < 1) throw FormatError(lineno, "rank must be a positive integer");
      Entity e = parse_entity(f[2], lineno);
      if (e.is_ref()) throw FormatError(lineno, "node-refs are not ranked");
      if (!g.rank_table.emplace(EntityKey{e.kind, e.value}, rank).second)
        throw FormatError(lineno, "duplicate rank entry");
    } else {
      throw FormatError(lineno, "unknown record '" + std::string(f[0]) + "'");
    }
  }
  if (g.nodes.size() != node_count)
    throw FormatError(lines.size(), "header declares " + std::to_string(node_count) + " nodes, found " +
                                        std::to_string(g.nodes.size()));
  for (std::size_t s = 0; s < stmt_count; ++s) {
    if (!final_line[s]) throw FormatError(1, "statement " + std::to_string(s) + " has no statement-final node");
  }
  g.edges = g.implied_edges();
  if (!g.rank_table.empty()) {
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      auto& n = g.nodes[i];
      for (Entity* e : {&n.entity1, &n.entity2}) {
        if (e->is_ref()) continue;
        auto it = g.rank_table.find({e->kind, e->value});
        if (it == g.rank_table.end())
          throw FormatError(node_line[i], "entity " + format_entity(*e) + " missing from rank table");
        e->rank = it->second;
      }
    }
  }
  return g;
}

}  // namespace eventclone::graph
