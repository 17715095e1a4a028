// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <cstdio>
#include <unordered_map>

#include "eventclone/error.hpp"
#include "eventclone/eventgraph.hpp"

namespace eventclone::graph {

using cparse::AstNode;
using cparse::LiteralKind;
using cparse::NodeKind;

namespace {

const std::unordered_map<std::string_view, std::string_view>& binary_operator_names() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"+", "add"},    {"-", "sub"},    {"*", "mul"},     {"/", "div"},    {"%", "mod"},
      {"<", "lt"},     {">", "gt"},     {"<=", "le"},     {">=", "ge"},    {"==", "eq"},
      {"!=", "ne"},    {"&&", "and"},   {"||", "or"},     {"&", "bitand"}, {"|", "bitor"},
      {"^", "bitxor"}, {"<<", "shl"},   {">>", "shr"},    {",", "comma"}};
  return table;
}

// Char constants are normalized so equal characters spelled differently
// ('\x41' vs 'A') are one entity and the value never contains whitespace.
std::string normalize_char(std::string_view lexeme) {
  std::string_view body = lexeme.substr(1, lexeme.size() >= 2 ? lexeme.size() - 2 : 0);
  int code = -1;
  if (body.size() == 1) {
    code = static_cast<unsigned char>(body[0]);
  } else if (body.size() >= 2 && body[0] == '\\') {
    switch (body[1]) {
      case 'n': code = '\n'; break;
      case 't': code = '\t'; break;
      case 'r': code = '\r'; break;
      case '0':
        code = body.size() == 2 ? 0 : static_cast<int>(std::strtol(std::string(body.substr(1)).c_str(), nullptr, 8));
        break;
      case 'a': code = '\a'; break;
      case 'b': code = '\b'; break;
      case 'f': code = '\f'; break;
      case 'v': code = '\v'; break;
      case '\\': code = '\\'; break;
      case '\'': code = '\''; break;
      case '"': code = '"'; break;
      case '?': code = '?'; break;
      case 'x': code = static_cast<int>(std::strtol(std::string(body.substr(2)).c_str(), nullptr, 16)); break;
      default:
        if (std::isdigit(static_cast<unsigned char>(body[1])))
          code = static_cast<int>(std::strtol(std::string(body.substr(1)).c_str(), nullptr, 8));
        break;
    }
  }
  if (code < 0) return std::string(body.empty() ? "\\x00" : body);
  if (code > 0x20 && code < 0x7f && code != '\\') return std::string(1, static_cast<char>(code));
  char buf[8];
  std::snprintf(buf, sizeof buf, "\\x%02x", code & 0xff);
  return buf;
}

class Builder {
 public:
  explicit Builder(BuildOptions options) : options_(options) {}

  EventDependencyGraph run(const cparse::Ast& ast) {
    if (!ast.root) return std::move(graph_);
    for (const auto& item : ast.root->children) {
      if (item->kind == NodeKind::FunctionDef) {
        function_ = item->text;
        last_def_ = global_defs_;
        statement(item->children.back().operator*());
      } else if (item->kind == NodeKind::Declaration) {
        function_.clear();
        last_def_ = global_defs_;
        statement(*item);
        global_defs_ = last_def_;
      }
    }
    graph_.statement_count = next_statement_;
    graph_.validate();
    return std::move(graph_);
  }

 private:
  // -- emission ---------------------------------------------------------------

  Entity emit(Entity a, std::string_view op, Entity o) {
    EventNode node;
    node.id = graph_.nodes.size();
    node.op = ops::id(op);
    node.statement = current_statement_;
    if (a.is_ref()) graph_.edges.emplace(*a.ref, node.id);
    if (o.is_ref()) graph_.edges.emplace(*o.ref, node.id);
    node.entity1 = std::move(a);
    node.entity2 = std::move(o);
    graph_.nodes.push_back(std::move(node));
    return Entity::node_ref(graph_.nodes.back().id);
  }

  static Entity placeholder() { return Entity::constant(EntityKind::ConstInt, "0"); }

  Entity read_variable(const std::string& name) {
    auto it = last_def_.find(name);
    if (it != last_def_.end()) return Entity::node_ref(it->second);
    return Entity::variable(name);
  }

  // -- statements -------------------------------------------------------------

  // Returns the statement-final node, or nothing for statements without events
  // (which are dropped and do not consume a statement index).
  std::optional<NodeId> statement(const AstNode& s) {
    switch (s.kind) {
      case NodeKind::Block: {
        std::optional<NodeId> last;
        for (const auto& c : s.children) {
          if (auto f = statement(*c)) last = f;
        }
        return last;
      }
      case NodeKind::If:
      case NodeKind::While:
      case NodeKind::DoWhile:
      case NodeKind::For:
        return control_statement(s);
      default:
        return simple_statement(s);
    }
  }

  std::optional<NodeId> simple_statement(const AstNode& s) {
    std::size_t saved = current_statement_;
    current_statement_ = next_statement_;
    std::size_t first = graph_.nodes.size();
    writes_.clear();

    switch (s.kind) {
      case NodeKind::Declaration:
        declaration(s);
        break;
      case NodeKind::ExpressionStatement:
        expression(s.child(0));
        break;
      case NodeKind::Return:
        emit(Entity::function(function_), "return",
             s.children.empty() ? placeholder() : expression(s.child(0)));
        break;
      default:
        break;
    }

    current_statement_ = saved;
    if (graph_.nodes.size() == first) {
      if (options_.warnings) {
        options_.warnings->push_back("line " + std::to_string(s.span.begin_line) + ": " +
                                     std::string(cparse::to_string(s.kind)) +
                                     " lowers to zero events; statement dropped");
      }
      return std::nullopt;
    }
    return finish_statement();
  }

  NodeId finish_statement() {
    ++next_statement_;
    NodeId final_id = graph_.nodes.size() - 1;
    graph_.nodes[final_id].statement_final = true;
    for (const auto& name : writes_) last_def_[name] = final_id;
    writes_.clear();
    return final_id;
  }

  void declaration(const AstNode& decl) {
    std::optional<Entity> joined;
    for (const auto& d : decl.children) {
      if (d->kind != NodeKind::Declarator || d->children.empty()) continue;
      Entity init = initializer(d->child(0));
      Entity ev = emit(Entity::variable(d->text), "decl-init", std::move(init));
      writes_.push_back(d->text);
      joined = joined ? emit(std::move(*joined), "comma", std::move(ev)) : std::move(ev);
    }
  }

  Entity initializer(const AstNode& init) {
    if (init.kind != NodeKind::InitList) return expression(init);
    std::optional<Entity> joined;
    for (const auto& c : init.children) {
      Entity e = initializer(*c);
      joined = joined ? emit(std::move(*joined), "comma", std::move(e)) : std::move(e);
    }
    return joined ? std::move(*joined) : placeholder();
  }

  // Control statements reserve their index up front so nested statements
  // number after them (pre-order), and always emit a final guard node.
  std::optional<NodeId> control_statement(const AstNode& s) {
    std::size_t saved = current_statement_;
    std::size_t index = next_statement_++;
    current_statement_ = index;
    std::vector<std::string> own_writes;

    auto guarded = [&](const AstNode& e) {
      writes_.clear();
      Entity r = e.kind == NodeKind::None ? Entity::constant(EntityKind::ConstInt, "1") : expression(e);
      own_writes.insert(own_writes.end(), writes_.begin(), writes_.end());
      writes_.clear();
      return r;
    };
    auto body = [&](const AstNode& b) {
      auto f = statement(b);
      current_statement_ = index;
      return f ? Entity::node_ref(*f) : placeholder();
    };

    switch (s.kind) {
      case NodeKind::If: {
        Entity cond = guarded(s.child(0));
        Entity then_final = body(s.child(1));
        if (s.children.size() == 2) {
          emit(std::move(cond), "cond-guard", std::move(then_final));
        } else {
          Entity then_ev = emit(std::move(cond), "branch-then", std::move(then_final));
          Entity else_final = body(s.child(2));
          emit(std::move(then_ev), "branch-else", std::move(else_final));
        }
        break;
      }
      case NodeKind::While: {
        Entity cond = guarded(s.child(0));
        Entity b = body(s.child(1));
        emit(std::move(cond), "loop-body", std::move(b));
        break;
      }
      case NodeKind::DoWhile: {
        Entity b = body(s.child(0));
        Entity cond = guarded(s.child(1));
        emit(std::move(cond), "loop-body", std::move(b));
        break;
      }
      case NodeKind::For: {
        std::optional<Entity> head;
        auto join = [&](Entity e) {
          head = head ? emit(std::move(*head), "comma", std::move(e)) : std::move(e);
        };
        const AstNode& init = s.child(0);
        if (init.kind == NodeKind::Declaration) {
          writes_.clear();
          std::size_t before = graph_.nodes.size();
          declaration(init);
          own_writes.insert(own_writes.end(), writes_.begin(), writes_.end());
          writes_.clear();
          if (graph_.nodes.size() > before) join(Entity::node_ref(graph_.nodes.size() - 1));
        } else if (init.kind != NodeKind::None) {
          join(guarded(init));
        }
        if (s.child(1).kind != NodeKind::None) join(guarded(s.child(1)));
        Entity b = body(s.child(3));
        if (s.child(2).kind != NodeKind::None) join(guarded(s.child(2)));
        emit(head ? std::move(*head) : Entity::constant(EntityKind::ConstInt, "1"), "loop-body",
             std::move(b));
        break;
      }
      default:
        break;
    }

    NodeId final_id = graph_.nodes.size() - 1;
    graph_.nodes[final_id].statement_final = true;
    for (const auto& name : own_writes) last_def_[name] = final_id;
    current_statement_ = saved;
    return final_id;
  }

  // -- expressions -----------------------------------------------------------

  Entity expression(const AstNode& e) {
    switch (e.kind) {
      case NodeKind::Identifier:
        return read_variable(e.text);
      case NodeKind::Literal:
        return literal(e);
      case NodeKind::BinaryOp: {
        Entity a = expression(e.child(0));
        Entity o = expression(e.child(1));
        return emit(std::move(a), binary_operator_names().at(e.text), std::move(o));
      }
      case NodeKind::Assignment:
        return assignment(e);
      case NodeKind::UnaryOp:
        return unary(e);
      case NodeKind::Call:
        return call(e);
      case NodeKind::Index: {
        Entity a = expression(e.child(0));
        Entity o = expression(e.child(1));
        return emit(std::move(a), "index", std::move(o));
      }
      case NodeKind::MemberAccess:
        return member(e, expression(e.child(0)));
      case NodeKind::Sizeof: {
        Entity a = e.children.empty() ? Entity::constant(EntityKind::ConstStr, e.text)
                                      : expression(e.child(0));
        return emit(std::move(a), "sizeof", placeholder());
      }
      case NodeKind::Cast: {
        Entity a = expression(e.child(0));
        return emit(std::move(a), "cast", Entity::constant(EntityKind::ConstStr, e.text));
      }
      case NodeKind::Conditional: {
        Entity c = expression(e.child(0));
        Entity t = expression(e.child(1));
        Entity then_ev = emit(std::move(c), "branch-then", std::move(t));
        Entity f = expression(e.child(2));
        return emit(std::move(then_ev), "branch-else", std::move(f));
      }
      case NodeKind::InitList:
        return initializer(e);
      default:
        throw GraphError("cannot lower " + std::string(cparse::to_string(e.kind)) +
                         " as an expression at line " + std::to_string(e.span.begin_line));
    }
  }

  Entity literal(const AstNode& e) {
    switch (e.literal) {
      case LiteralKind::Int:
        return Entity::constant(EntityKind::ConstInt, e.text);
      case LiteralKind::Float:
        return Entity::constant(EntityKind::ConstFloat, e.text);
      case LiteralKind::String:
        return Entity::constant(EntityKind::ConstStr, e.text.substr(1, e.text.size() - 2));
      case LiteralKind::Char:
        return Entity::constant(EntityKind::ConstChar, normalize_char(e.text));
      default:
        throw GraphError("literal without kind");
    }
  }

  // `p->f` lowers as `(*p).f`.
  Entity member(const AstNode& e, Entity base) {
    if (e.text == "->") base = emit(std::move(base), "deref", placeholder());
    return emit(std::move(base), "member", Entity::variable(e.child(1).text));
  }

  static const AstNode* base_identifier(const AstNode& lvalue) {
    const AstNode* n = &lvalue;
    while (true) {
      switch (n->kind) {
        case NodeKind::Identifier:
          return n;
        case NodeKind::Index:
        case NodeKind::MemberAccess:
        case NodeKind::Cast:
          n = &n->child(0);
          break;
        case NodeKind::UnaryOp:
          if (n->text != "*") return nullptr;
          n = &n->child(0);
          break;
        default:
          return nullptr;
      }
    }
  }

  // The write target: the base variable stays a plain entity (never a ref),
  // subscripts and member paths are lowered around it.
  Entity target(const AstNode& lv) {
    switch (lv.kind) {
      case NodeKind::Identifier:
        return Entity::variable(lv.text);
      case NodeKind::Index: {
        Entity a = target(lv.child(0));
        Entity o = expression(lv.child(1));
        return emit(std::move(a), "index", std::move(o));
      }
      case NodeKind::MemberAccess:
        return member(lv, target(lv.child(0)));
      case NodeKind::UnaryOp:
        if (lv.text == "*") return emit(target(lv.child(0)), "deref", placeholder());
        break;
      case NodeKind::Cast:
        return target(lv.child(0));
      default:
        break;
    }
    return expression(lv);
  }

  void note_write(const AstNode& lvalue) {
    if (const AstNode* base = base_identifier(lvalue)) writes_.push_back(base->text);
  }

  Entity assignment(const AstNode& e) {
    const AstNode& lhs = e.child(0);
    Entity value;
    if (e.text == "=") {
      value = expression(e.child(1));
    } else {
      std::string op = e.text.substr(0, e.text.size() - 1);
      Entity current = expression(lhs);
      Entity rhs = expression(e.child(1));
      value = emit(std::move(current), binary_operator_names().at(op), std::move(rhs));
    }
    Entity dest = target(lhs);
    note_write(lhs);
    return emit(std::move(dest), "assign", std::move(value));
  }

  Entity unary(const AstNode& e) {
    const std::string& op = e.text;
    if (op == "++" || op == "--") {
      const AstNode& lv = e.child(0);
      Entity current = expression(lv);
      Entity sum = emit(std::move(current), op == "++" ? "add" : "sub",
                        Entity::constant(EntityKind::ConstInt, "1"));
      Entity dest = target(lv);
      note_write(lv);
      return emit(std::move(dest), "assign", std::move(sum));
    }
    if (op == "+") return expression(e.child(0));
    std::string_view name = op == "-"   ? "neg"
                            : op == "!" ? "not"
                            : op == "~" ? "bitnot"
                            : op == "*" ? "deref"
                                        : "addr-of";
    return emit(expression(e.child(0)), name, placeholder());
  }

  // Arguments fold right to left with parammix, then one param and one
  // invoke event: f(a, b) -> (a #parammix# b) #param# f #invoke# receiver.
  Entity call(const AstNode& e) {
    const AstNode& callee = e.child(0);
    Entity func;
    Entity receiver;
    if (callee.kind == NodeKind::Identifier) {
      func = Entity::function(callee.text);
      receiver = func;
    } else if (callee.kind == NodeKind::MemberAccess) {
      func = Entity::function(callee.child(1).text);
      receiver = expression(callee.child(0));
      if (callee.text == "->") receiver = emit(std::move(receiver), "deref", placeholder());
    } else {
      func = expression(callee);
      receiver = func;
    }

    std::vector<Entity> args;
    for (std::size_t i = 1; i < e.children.size(); ++i) args.push_back(expression(e.child(i)));
    if (args.empty()) return emit(std::move(func), "invoke", std::move(receiver));

    Entity mixed = std::move(args.back());
    for (std::size_t i = args.size() - 1; i-- > 0;) {
      mixed = emit(std::move(args[i]), "parammix", std::move(mixed));
    }
    Entity passed = emit(std::move(mixed), "param", std::move(func));
    return emit(std::move(passed), "invoke", std::move(receiver));
  }

  BuildOptions options_;
  EventDependencyGraph graph_;
  std::size_t next_statement_ = 0;
  std::size_t current_statement_ = 0;
  std::string function_;
  std::map<std::string, NodeId> last_def_;
  std::map<std::string, NodeId> global_defs_;
  std::vector<std::string> writes_;
};

}  // namespace

EventDependencyGraph build_event_graph(const cparse::Ast& ast, BuildOptions options) {
  return Builder(options).run(ast);
}

EventDependencyGraph graph_from_source(std::string_view source, BuildOptions options) {
  return rank_entities(build_event_graph(cparse::parse_source(source), options));
}

}  // namespace eventclone::graph
