// SPDX-License-Identifier: Apache-2.0
//
// Lexer and recursive-descent parser for the C subset the event analyzer
// understands. Parsing is purely syntactic: no types are checked and no
// preprocessing is performed (directive lines are skipped).
#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace eventclone::cparse {

enum class TokenKind {
  Identifier,
  Keyword,
  IntLiteral,
  FloatLiteral,
  StringLiteral,
  CharLiteral,
  Operator,
  Punctuation,
};

std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind;
  std::string text;
  int line = 1;
  int column = 1;

  friend bool operator==(const Token&, const Token&) = default;
};

/// Splits `source` into tokens. Comments, whitespace and preprocessor
/// directive lines never produce tokens. Throws LexError.
std::vector<Token> tokenize(std::string_view source);

struct SourceSpan {
  int begin_line = 0;
  int begin_column = 0;
  int end_line = 0;
  int end_column = 0;
};

enum class NodeKind {
  TranslationUnit,
  FunctionDef,
  Parameter,
  Declaration,
  Declarator,
  Assignment,  // text holds the operator ("=", "+=", ...)
  Call,
  BinaryOp,    // text holds the operator spelling; "," for the comma operator
  UnaryOp,     // text holds the operator; "++"/"--" carry a prefix/postfix flag
  Conditional,
  Cast,        // text holds the target type spelling
  Return,
  If,
  While,
  DoWhile,
  For,
  Block,
  ExpressionStatement,
  Empty,
  Break,
  Continue,
  MemberAccess,  // text is "." or "->"; second child is the member identifier
  Index,
  Literal,
  Identifier,
  Sizeof,      // one child (expression) or none with text = type spelling
  InitList,
  None,        // placeholder for an omitted for-clause
};

std::string_view to_string(NodeKind kind);

enum class LiteralKind { None, Int, Float, String, Char };

struct AstNode {
  NodeKind kind = NodeKind::None;
  std::string text;
  LiteralKind literal = LiteralKind::None;
  bool postfix = false;
  /// Pre-order index among the statements of the enclosing function body;
  /// -1 for nodes that are not statements.
  int statement_index = -1;
  SourceSpan span;
  std::vector<std::unique_ptr<AstNode>> children;

  const AstNode& child(std::size_t i) const { return *children.at(i); }
};

struct Ast {
  std::unique_ptr<AstNode> root;
};

/// Parses a token sequence produced by tokenize. Throws ParseError on a
/// grammar violation and UnsupportedConstruct for recognized C features
/// outside the subset (switch, goto, typedef, enum bodies, function pointers).
Ast parse(const std::vector<Token>& tokens);

/// tokenize + parse.
Ast parse_source(std::string_view source);

/// Indented s-expression dump, one node per line.
std::string dump_ast(const Ast& ast);

}  // namespace eventclone::cparse
