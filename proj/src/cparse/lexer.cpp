// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>

#include "eventclone/cparse.hpp"
#include "eventclone/error.hpp"

namespace eventclone::cparse {

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Keyword: return "keyword";
    case TokenKind::IntLiteral: return "integer-literal";
    case TokenKind::FloatLiteral: return "float-literal";
    case TokenKind::StringLiteral: return "string-literal";
    case TokenKind::CharLiteral: return "char-literal";
    case TokenKind::Operator: return "operator-symbol";
    case TokenKind::Punctuation: return "punctuation";
  }
  return "?";
}

namespace {

constexpr std::array<std::string_view, 44> kKeywords = {
    "auto",     "break",    "case",     "char",   "const",    "continue", "default",  "do",
    "double",   "else",     "enum",     "extern", "float",    "for",      "goto",     "if",
    "inline",   "int",      "long",     "register", "restrict", "return", "short",    "signed",
    "sizeof",   "static",   "struct",   "switch", "typedef",  "union",    "unsigned", "void",
    "volatile", "while",    "_Bool",    "_Complex", "_Imaginary", "_Alignas", "_Alignof",
    "_Atomic",  "_Generic", "_Noreturn", "_Static_assert", "_Thread_local"};

// Longest first so a greedy scan picks the maximal munch.
constexpr std::array<std::string_view, 46> kOperators = {
    ">>=", "<<=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&",  "||",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=", "^=", "+",  "-",
    "*",   "/",   "%",   "<",  ">",  "=",  "!",  "~",  "&",  "|",  "^",  "?",
    ":",   ".",   "(",   ")",  "[",  "]",  "{",  "}",  ";",  ","};

bool is_punctuation(std::string_view op) {
  return op == "(" || op == ")" || op == "[" || op == "]" || op == "{" || op == "}" ||
         op == ";" || op == "," || op == "...";
}

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    bool line_start = true;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        advance();
        line_start = true;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        advance();
        continue;
      }
      if (c == '#' && line_start) {
        skip_directive();
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        skip_block_comment();
        continue;
      }
      line_start = false;
      out.push_back(next_token());
    }
    return out;
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_directive() {
    while (pos_ < src_.size() && src_[pos_] != '\n') {
      if (src_[pos_] == '\\' && peek(1) == '\n') advance();
      advance();
    }
  }

  void skip_block_comment() {
    int line = line_, col = column_;
    advance();
    advance();
    while (pos_ < src_.size()) {
      if (src_[pos_] == '*' && peek(1) == '/') {
        advance();
        advance();
        return;
      }
      advance();
    }
    throw LexError(line, col, "unterminated comment");
  }

  Token next_token() {
    Token tok;
    tok.line = line_;
    tok.column = column_;
    std::size_t start = pos_;
    char c = src_[pos_];

    if (is_ident_start(c)) {
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
      tok.text = std::string(src_.substr(start, pos_ - start));
      bool kw = std::find(kKeywords.begin(), kKeywords.end(), tok.text) != kKeywords.end();
      tok.kind = kw ? TokenKind::Keyword : TokenKind::Identifier;
      return tok;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      tok.kind = lex_number();
      tok.text = std::string(src_.substr(start, pos_ - start));
      return tok;
    }
    if (c == '"' || c == '\'') {
      lex_quoted(c, tok.line, tok.column);
      tok.kind = c == '"' ? TokenKind::StringLiteral : TokenKind::CharLiteral;
      tok.text = std::string(src_.substr(start, pos_ - start));
      return tok;
    }
    for (std::string_view op : kOperators) {
      if (src_.substr(pos_, op.size()) == op) {
        for (std::size_t i = 0; i < op.size(); ++i) advance();
        tok.text = std::string(op);
        tok.kind = is_punctuation(op) ? TokenKind::Punctuation : TokenKind::Operator;
        return tok;
      }
    }
    unsigned byte = static_cast<unsigned char>(c);
    char hex[8];
    std::snprintf(hex, sizeof hex, "0x%02x", byte);
    throw LexError(tok.line, tok.column, std::string("illegal byte ") + hex);
  }

  TokenKind lex_number() {
    bool is_float = false;
    if (src_[pos_] == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      advance();
      advance();
      while (pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    } else {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      if (pos_ < src_.size() && src_[pos_] == '.') {
        is_float = true;
        advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        char sign = peek(1);
        bool digit_next = std::isdigit(static_cast<unsigned char>(sign)) ||
                          ((sign == '+' || sign == '-') &&
                           std::isdigit(static_cast<unsigned char>(peek(2))));
        if (digit_next) {
          is_float = true;
          advance();
          if (src_[pos_] == '+' || src_[pos_] == '-') advance();
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            advance();
        }
      }
    }
    while (pos_ < src_.size()) {
      char s = src_[pos_];
      if (s == 'u' || s == 'U' || s == 'l' || s == 'L') {
        advance();
      } else if ((s == 'f' || s == 'F') && is_float) {
        advance();
      } else {
        break;
      }
    }
    if (pos_ < src_.size() && (is_ident_char(src_[pos_]) || src_[pos_] == '.'))
      throw LexError(line_, column_, "malformed numeric literal");
    return is_float ? TokenKind::FloatLiteral : TokenKind::IntLiteral;
  }

  void lex_quoted(char quote, int line, int col) {
    advance();
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') {
        throw LexError(line, col, quote == '"' ? "unterminated string literal"
                                               : "unterminated character literal");
      }
      char c = src_[pos_];
      if (c == '\\') {
        advance();
        if (pos_ >= src_.size()) continue;
        advance();
        continue;
      }
      advance();
      if (c == quote) return;
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace eventclone::cparse
