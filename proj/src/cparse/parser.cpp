// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <sstream>

#include "eventclone/cparse.hpp"
#include "eventclone/error.hpp"

namespace eventclone::cparse {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::TranslationUnit: return "translation-unit";
    case NodeKind::FunctionDef: return "function-def";
    case NodeKind::Parameter: return "parameter";
    case NodeKind::Declaration: return "declaration";
    case NodeKind::Declarator: return "declarator";
    case NodeKind::Assignment: return "assignment";
    case NodeKind::Call: return "call";
    case NodeKind::BinaryOp: return "binary-op";
    case NodeKind::UnaryOp: return "unary-op";
    case NodeKind::Conditional: return "conditional";
    case NodeKind::Cast: return "cast";
    case NodeKind::Return: return "return";
    case NodeKind::If: return "if";
    case NodeKind::While: return "while";
    case NodeKind::DoWhile: return "do-while";
    case NodeKind::For: return "for";
    case NodeKind::Block: return "block";
    case NodeKind::ExpressionStatement: return "expression-statement";
    case NodeKind::Empty: return "empty";
    case NodeKind::Break: return "break";
    case NodeKind::Continue: return "continue";
    case NodeKind::MemberAccess: return "member-access";
    case NodeKind::Index: return "index";
    case NodeKind::Literal: return "literal";
    case NodeKind::Identifier: return "identifier";
    case NodeKind::Sizeof: return "sizeof";
    case NodeKind::InitList: return "init-list";
    case NodeKind::None: return "none";
  }
  return "?";
}

namespace {

using NodePtr = std::unique_ptr<AstNode>;

constexpr std::array<std::string_view, 20> kTypeWords = {
    "void",   "char",     "short",  "int",      "long",   "float",    "double",
    "signed", "unsigned", "const",  "volatile", "static", "extern",   "register",
    "auto",   "inline",   "_Bool",  "restrict", "struct", "union"};

constexpr std::array<std::string_view, 11> kAssignOps = {"=",  "+=", "-=", "*=",  "/=", "%=",
                                                         "&=", "|=", "^=", "<<=", ">>="};

bool is_statement(NodeKind k) {
  switch (k) {
    case NodeKind::Declaration:
    case NodeKind::ExpressionStatement:
    case NodeKind::Return:
    case NodeKind::If:
    case NodeKind::While:
    case NodeKind::DoWhile:
    case NodeKind::For:
    case NodeKind::Empty:
    case NodeKind::Break:
    case NodeKind::Continue:
      return true;
    default:
      return false;
  }
}

// Pre-order numbering; blocks are transparent containers.
void number_statements(AstNode& node, int& next) {
  if (node.kind == NodeKind::Block) {
    for (auto& c : node.children) number_statements(*c, next);
    return;
  }
  if (!is_statement(node.kind)) return;
  node.statement_index = next++;
  switch (node.kind) {
    case NodeKind::If:
      for (std::size_t i = 1; i < node.children.size(); ++i) number_statements(*node.children[i], next);
      break;
    case NodeKind::While:
      number_statements(*node.children[1], next);
      break;
    case NodeKind::DoWhile:
      number_statements(*node.children[0], next);
      break;
    case NodeKind::For:
      number_statements(*node.children[3], next);
      break;
    default:
      break;
  }
}

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {}

  Ast run() {
    auto unit = make(NodeKind::TranslationUnit, {});
    unit->span = {1, 1, 1, 1};
    while (!at_end()) unit->children.push_back(external_declaration());
    if (!toks_.empty()) {
      unit->span = {toks_.front().line, toks_.front().column, 0, 0};
      set_end(*unit);
    }
    return Ast{std::move(unit)};
  }

 private:
  // -- token helpers --------------------------------------------------------

  bool at_end() const { return pos_ >= toks_.size(); }

  const Token* peek(std::size_t ahead = 0) const {
    return pos_ + ahead < toks_.size() ? &toks_[pos_ + ahead] : nullptr;
  }

  bool check(std::string_view text, std::size_t ahead = 0) const {
    const Token* t = peek(ahead);
    return t && t->text == text && t->kind != TokenKind::StringLiteral &&
           t->kind != TokenKind::CharLiteral;
  }

  bool check_kind(TokenKind kind) const { return !at_end() && toks_[pos_].kind == kind; }

  const Token& advance() {
    last_ = &toks_[pos_];
    return toks_[pos_++];
  }

  bool accept(std::string_view text) {
    if (!check(text)) return false;
    advance();
    return true;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    if (at_end()) {
      int line = last_ ? last_->line : 1;
      int col = last_ ? last_->column + static_cast<int>(last_->text.size()) : 1;
      throw ParseError(line, col, expected, "end of input");
    }
    const Token& t = toks_[pos_];
    throw ParseError(t.line, t.column, expected, "'" + t.text + "'");
  }

  const Token& expect(std::string_view text) {
    if (!check(text)) fail("'" + std::string(text) + "'");
    return advance();
  }

  const Token& expect_identifier() {
    if (!check_kind(TokenKind::Identifier)) fail("identifier");
    return advance();
  }

  NodePtr make(NodeKind kind, std::string text) {
    auto n = std::make_unique<AstNode>();
    n->kind = kind;
    n->text = std::move(text);
    if (!at_end()) n->span = {toks_[pos_].line, toks_[pos_].column, 0, 0};
    return n;
  }

  NodePtr make_at(NodeKind kind, std::string text, const Token& at) {
    auto n = std::make_unique<AstNode>();
    n->kind = kind;
    n->text = std::move(text);
    n->span = {at.line, at.column, 0, 0};
    return n;
  }

  void set_end(AstNode& n) const {
    if (!last_) return;
    n.span.end_line = last_->line;
    n.span.end_column = last_->column + static_cast<int>(last_->text.size());
  }

  // -- types and declarations ------------------------------------------------

  bool is_type_start(std::size_t ahead = 0) const {
    const Token* t = peek(ahead);
    if (!t || t->kind != TokenKind::Keyword) return false;
    if (t->text == "enum" || t->text == "typedef") return true;
    return std::find(kTypeWords.begin(), kTypeWords.end(), t->text) != kTypeWords.end();
  }

  void reject_unsupported_keyword() const {
    const Token* t = peek();
    if (!t || t->kind != TokenKind::Keyword) return;
    if (t->text == "typedef" || t->text == "switch" || t->text == "goto" || t->text == "case" ||
        t->text == "default")
      throw UnsupportedConstruct(t->line, t->text);
  }

  // Returns the type spelling. Struct/union bodies are skipped member-wise.
  std::string type_specifiers() {
    reject_unsupported_keyword();
    std::string spelling;
    bool any = false;
    while (is_type_start()) {
      const Token& t = advance();
      any = true;
      if (!spelling.empty()) spelling += ' ';
      spelling += t.text;
      if (t.text == "struct" || t.text == "union" || t.text == "enum") {
        if (check_kind(TokenKind::Identifier)) spelling += " " + advance().text;
        if (check("{")) {
          if (t.text == "enum") throw UnsupportedConstruct(t.line, "enum body");
          record_body();
        }
      }
    }
    if (!any) fail("type specifier");
    return spelling;
  }

  void record_body() {
    expect("{");
    while (!check("}")) {
      if (at_end()) fail("'}'");
      type_specifiers();
      do {
        while (accept("*")) {
        }
        expect_identifier();
        array_suffix(nullptr);
      } while (accept(","));
      expect(";");
    }
    expect("}");
  }

  // Array dimensions are parsed for syntax only; dimension sizes carry no events.
  void array_suffix(AstNode* declarator) {
    while (accept("[")) {
      if (!check("]")) {
        auto dim = conditional();
        if (declarator) declarator->children.push_back(std::move(dim));
      }
      expect("]");
    }
  }

  void reject_function_pointer() const {
    if (check("(") && check("*", 1)) throw UnsupportedConstruct(peek()->line, "function pointer");
  }

  NodePtr external_declaration() {
    const Token& first = *peek();
    std::string type = type_specifiers();
    if (check(";")) {
      advance();
      auto decl = make_at(NodeKind::Declaration, type, first);
      set_end(*decl);
      return decl;
    }
    while (accept("*")) {
    }
    reject_function_pointer();
    const Token& name = expect_identifier();
    if (check("(")) {
      auto params = parameter_list();
      if (check("{")) {
        auto fn = make_at(NodeKind::FunctionDef, name.text, first);
        for (auto& p : params) fn->children.push_back(std::move(p));
        fn->children.push_back(block());
        int next = 0;
        number_statements(*fn->children.back(), next);
        set_end(*fn);
        return fn;
      }
      // Prototype: a declaration without events.
      auto decl = make_at(NodeKind::Declaration, type, first);
      decl->children.push_back(make_at(NodeKind::Declarator, name.text, name));
      while (accept(",")) declarator_into(*decl);
      expect(";");
      set_end(*decl);
      return decl;
    }
    auto decl = make_at(NodeKind::Declaration, type, first);
    declarator_rest(*decl, name);
    while (accept(",")) declarator_into(*decl);
    expect(";");
    set_end(*decl);
    return decl;
  }

  std::vector<NodePtr> parameter_list() {
    std::vector<NodePtr> params;
    expect("(");
    if (accept(")")) return params;
    if (check("void") && check(")", 1)) {
      advance();
      advance();
      return params;
    }
    do {
      if (accept("...")) break;
      const Token& first = *peek();
      std::string type = type_specifiers();
      while (accept("*")) {
      }
      reject_function_pointer();
      std::string name;
      if (check_kind(TokenKind::Identifier)) name = advance().text;
      auto p = make_at(NodeKind::Parameter, name, first);
      array_suffix(nullptr);
      set_end(*p);
      params.push_back(std::move(p));
    } while (accept(","));
    expect(")");
    return params;
  }

  void declarator_into(AstNode& decl) {
    while (accept("*")) {
    }
    reject_function_pointer();
    const Token& name = expect_identifier();
    if (check("(")) {
      parameter_list();
      decl.children.push_back(make_at(NodeKind::Declarator, name.text, name));
      return;
    }
    declarator_rest(decl, name);
  }

  void declarator_rest(AstNode& decl, const Token& name) {
    auto d = make_at(NodeKind::Declarator, name.text, name);
    array_suffix(nullptr);
    if (accept("=")) d->children.push_back(initializer());
    set_end(*d);
    decl.children.push_back(std::move(d));
  }

  NodePtr initializer() {
    if (!check("{")) return assignment();
    auto list = make(NodeKind::InitList, {});
    expect("{");
    while (!check("}")) {
      list->children.push_back(initializer());
      if (!accept(",")) break;
    }
    expect("}");
    set_end(*list);
    return list;
  }

  NodePtr local_declaration() {
    const Token& first = *peek();
    std::string type = type_specifiers();
    auto decl = make_at(NodeKind::Declaration, type, first);
    if (!check(";")) {
      declarator_into(*decl);
      while (accept(",")) declarator_into(*decl);
    }
    expect(";");
    set_end(*decl);
    return decl;
  }

  // -- statements -----------------------------------------------------------

  NodePtr block() {
    auto b = make(NodeKind::Block, {});
    expect("{");
    while (!check("}")) {
      if (at_end()) fail("'}'");
      b->children.push_back(statement());
    }
    expect("}");
    set_end(*b);
    return b;
  }

  NodePtr statement() {
    reject_unsupported_keyword();
    if (check("{")) return block();
    if (check_kind(TokenKind::Identifier) && check(":", 1))
      throw UnsupportedConstruct(peek()->line, "label");
    if (is_type_start()) return local_declaration();

    auto node = make(NodeKind::None, {});
    if (accept(";")) {
      node->kind = NodeKind::Empty;
    } else if (accept("if")) {
      node->kind = NodeKind::If;
      expect("(");
      node->children.push_back(expression());
      expect(")");
      node->children.push_back(statement());
      if (accept("else")) node->children.push_back(statement());
    } else if (accept("while")) {
      node->kind = NodeKind::While;
      expect("(");
      node->children.push_back(expression());
      expect(")");
      node->children.push_back(statement());
    } else if (accept("do")) {
      node->kind = NodeKind::DoWhile;
      node->children.push_back(statement());
      expect("while");
      expect("(");
      node->children.push_back(expression());
      expect(")");
      expect(";");
    } else if (accept("for")) {
      node->kind = NodeKind::For;
      expect("(");
      if (is_type_start()) {
        node->children.push_back(local_declaration());
      } else {
        node->children.push_back(check(";") ? make(NodeKind::None, {}) : expression());
        expect(";");
      }
      node->children.push_back(check(";") ? make(NodeKind::None, {}) : expression());
      expect(";");
      node->children.push_back(check(")") ? make(NodeKind::None, {}) : expression());
      expect(")");
      node->children.push_back(statement());
    } else if (accept("return")) {
      node->kind = NodeKind::Return;
      if (!check(";")) node->children.push_back(expression());
      expect(";");
    } else if (accept("break")) {
      node->kind = NodeKind::Break;
      expect(";");
    } else if (accept("continue")) {
      node->kind = NodeKind::Continue;
      expect(";");
    } else {
      node->kind = NodeKind::ExpressionStatement;
      node->children.push_back(expression());
      expect(";");
    }
    set_end(*node);
    return node;
  }

  // -- expressions ----------------------------------------------------------

  NodePtr binary(NodePtr lhs, const Token& op, NodePtr rhs) {
    auto n = std::make_unique<AstNode>();
    n->kind = NodeKind::BinaryOp;
    n->text = op.text;
    n->span = lhs->span;
    n->children.push_back(std::move(lhs));
    n->children.push_back(std::move(rhs));
    set_end(*n);
    return n;
  }

  NodePtr expression() {
    auto lhs = assignment();
    while (check(",")) {
      const Token& op = advance();
      lhs = binary(std::move(lhs), op, assignment());
    }
    return lhs;
  }

  NodePtr assignment() {
    auto lhs = conditional();
    const Token* t = peek();
    if (t && t->kind == TokenKind::Operator &&
        std::find(kAssignOps.begin(), kAssignOps.end(), t->text) != kAssignOps.end()) {
      const Token& op = advance();
      auto n = std::make_unique<AstNode>();
      n->kind = NodeKind::Assignment;
      n->text = op.text;
      n->span = lhs->span;
      n->children.push_back(std::move(lhs));
      n->children.push_back(assignment());
      set_end(*n);
      return n;
    }
    return lhs;
  }

  NodePtr conditional() {
    auto cond = logical_or();
    if (!check("?")) return cond;
    advance();
    auto n = std::make_unique<AstNode>();
    n->kind = NodeKind::Conditional;
    n->span = cond->span;
    n->children.push_back(std::move(cond));
    n->children.push_back(expression());
    expect(":");
    n->children.push_back(conditional());
    set_end(*n);
    return n;
  }

  template <typename Next>
  NodePtr left_assoc(std::initializer_list<std::string_view> ops, Next next) {
    auto lhs = (this->*next)();
    while (true) {
      const Token* t = peek();
      if (!t || t->kind != TokenKind::Operator ||
          std::find(ops.begin(), ops.end(), t->text) == ops.end())
        return lhs;
      const Token& op = advance();
      lhs = binary(std::move(lhs), op, (this->*next)());
    }
  }

  NodePtr logical_or() { return left_assoc({"||"}, &Parser::logical_and); }
  NodePtr logical_and() { return left_assoc({"&&"}, &Parser::bit_or); }
  NodePtr bit_or() { return left_assoc({"|"}, &Parser::bit_xor); }
  NodePtr bit_xor() { return left_assoc({"^"}, &Parser::bit_and); }
  NodePtr bit_and() { return left_assoc({"&"}, &Parser::equality); }
  NodePtr equality() { return left_assoc({"==", "!="}, &Parser::relational); }
  NodePtr relational() { return left_assoc({"<", ">", "<=", ">="}, &Parser::shift); }
  NodePtr shift() { return left_assoc({"<<", ">>"}, &Parser::additive); }
  NodePtr additive() { return left_assoc({"+", "-"}, &Parser::multiplicative); }
  NodePtr multiplicative() { return left_assoc({"*", "/", "%"}, &Parser::unary); }

  std::string type_name() {
    std::string spelling = type_specifiers();
    while (check("*")) {
      advance();
      spelling += "*";
    }
    reject_function_pointer();
    while (accept("[")) {
      if (!check("]")) conditional();
      expect("]");
      spelling += "[]";
    }
    return spelling;
  }

  NodePtr unary() {
    const Token* t = peek();
    if (!t) fail("expression");
    if (t->kind == TokenKind::Operator &&
        (t->text == "++" || t->text == "--" || t->text == "-" || t->text == "+" ||
         t->text == "!" || t->text == "~" || t->text == "*" || t->text == "&")) {
      auto n = make(NodeKind::UnaryOp, advance().text);
      n->children.push_back(unary());
      set_end(*n);
      return n;
    }
    if (t->text == "sizeof" && t->kind == TokenKind::Keyword) {
      auto n = make(NodeKind::Sizeof, {});
      advance();
      if (check("(") && is_type_start(1)) {
        advance();
        n->text = type_name();
        expect(")");
      } else {
        n->children.push_back(unary());
      }
      set_end(*n);
      return n;
    }
    if (check("(") && is_type_start(1)) {
      auto n = make(NodeKind::Cast, {});
      advance();
      n->text = type_name();
      expect(")");
      n->children.push_back(unary());
      set_end(*n);
      return n;
    }
    return postfix();
  }

  NodePtr postfix() {
    auto e = primary();
    while (true) {
      if (check("[")) {
        advance();
        auto n = std::make_unique<AstNode>();
        n->kind = NodeKind::Index;
        n->span = e->span;
        n->children.push_back(std::move(e));
        n->children.push_back(expression());
        expect("]");
        set_end(*n);
        e = std::move(n);
      } else if (check("(")) {
        advance();
        auto n = std::make_unique<AstNode>();
        n->kind = NodeKind::Call;
        n->span = e->span;
        n->children.push_back(std::move(e));
        if (!check(")")) {
          do {
            n->children.push_back(assignment());
          } while (accept(","));
        }
        expect(")");
        set_end(*n);
        e = std::move(n);
      } else if (check(".") || check("->")) {
        const Token& op = advance();
        const Token& member = expect_identifier();
        auto n = std::make_unique<AstNode>();
        n->kind = NodeKind::MemberAccess;
        n->text = op.text;
        n->span = e->span;
        n->children.push_back(std::move(e));
        auto m = make_at(NodeKind::Identifier, member.text, member);
        set_end(*m);
        n->children.push_back(std::move(m));
        set_end(*n);
        e = std::move(n);
      } else if (check("++") || check("--")) {
        const Token& op = advance();
        auto n = std::make_unique<AstNode>();
        n->kind = NodeKind::UnaryOp;
        n->text = op.text;
        n->postfix = true;
        n->span = e->span;
        n->children.push_back(std::move(e));
        set_end(*n);
        e = std::move(n);
      } else {
        return e;
      }
    }
  }

  NodePtr primary() {
    const Token* t = peek();
    if (!t) fail("expression");
    switch (t->kind) {
      case TokenKind::Identifier: {
        auto n = make(NodeKind::Identifier, advance().text);
        set_end(*n);
        return n;
      }
      case TokenKind::IntLiteral:
      case TokenKind::FloatLiteral:
      case TokenKind::CharLiteral: {
        auto n = make(NodeKind::Literal, t->text);
        n->literal = t->kind == TokenKind::IntLiteral     ? LiteralKind::Int
                     : t->kind == TokenKind::FloatLiteral ? LiteralKind::Float
                                                          : LiteralKind::Char;
        advance();
        set_end(*n);
        return n;
      }
      case TokenKind::StringLiteral: {
        auto n = make(NodeKind::Literal, {});
        n->literal = LiteralKind::String;
        // Adjacent literals concatenate; the node keeps the joined body in quotes.
        std::string body;
        while (check_kind(TokenKind::StringLiteral)) {
          const std::string& s = advance().text;
          body += s.substr(1, s.size() - 2);
        }
        n->text = "\"" + body + "\"";
        set_end(*n);
        return n;
      }
      default:
        break;
    }
    if (check("(")) {
      advance();
      auto e = expression();
      expect(")");
      return e;
    }
    fail("expression");
  }

  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
  const Token* last_ = nullptr;
};

void dump_node(const AstNode& n, int depth, std::ostringstream& out) {
  out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << '(' << to_string(n.kind);
  if (!n.text.empty()) out << ' ' << n.text;
  if (n.postfix) out << " postfix";
  if (n.statement_index >= 0) out << " #" << n.statement_index;
  out << " @" << n.span.begin_line << ':' << n.span.begin_column;
  for (const auto& c : n.children) {
    out << '\n';
    dump_node(*c, depth + 1, out);
  }
  out << ')';
}

}  // namespace

Ast parse(const std::vector<Token>& tokens) { return Parser(tokens).run(); }

Ast parse_source(std::string_view source) { return parse(tokenize(source)); }

std::string dump_ast(const Ast& ast) {
  std::ostringstream out;
  if (ast.root) dump_node(*ast.root, 0, out);
  out << '\n';
  return out.str();
}

}  // namespace eventclone::cparse
