// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eventclone {

/// Broad category used by the CLI to pick an exit code.
enum class ErrorClass { Data, Numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }

 private:
  ErrorClass class_;
};

class LexError : public Error {
 public:
  LexError(int line, int column, const std::string& message)
      : Error(ErrorClass::Data, "lex error at " + std::to_string(line) + ":" +
                                    std::to_string(column) + ": " + message),
        line(line),
        column(column) {}
  int line;
  int column;
};

class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& expected, const std::string& found)
      : Error(ErrorClass::Data, "parse error at " + std::to_string(line) + ":" +
                                    std::to_string(column) + ": expected " + expected +
                                    ", found " + found),
        line(line),
        column(column),
        expected(expected),
        found(found) {}
  int line;
  int column;
  std::string expected;
  std::string found;
};

class UnsupportedConstruct : public Error {
 public:
  UnsupportedConstruct(int line, const std::string& construct)
      : Error(ErrorClass::Data,
              "unsupported construct '" + construct + "' at line " + std::to_string(line)),
        line(line),
        construct(construct) {}
  int line;
  std::string construct;
};

class GraphError : public Error {
 public:
  explicit GraphError(const std::string& what) : Error(ErrorClass::Data, what) {}
};

class CycleError : public Error {
 public:
  explicit CycleError(const std::string& what) : Error(ErrorClass::Data, what) {}
};

class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& message)
      : Error(ErrorClass::Data, "format error at line " + std::to_string(line) + ": " + message),
        line(line) {}
  std::size_t line;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorClass::Numeric, what) {}
};

class RefError : public Error {
 public:
  explicit RefError(const std::string& what) : Error(ErrorClass::Data, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorClass::Numeric, what) {}
};

class DegenerateVector : public Error {
 public:
  explicit DegenerateVector(const std::string& what) : Error(ErrorClass::Numeric, what) {}
};

class NonFiniteLoss : public Error {
 public:
  explicit NonFiniteLoss(const std::string& what) : Error(ErrorClass::Numeric, what) {}
};

class DatasetError : public Error {
 public:
  explicit DatasetError(const std::string& what) : Error(ErrorClass::Data, what) {}
};

class EmptyEval : public Error {
 public:
  EmptyEval() : Error(ErrorClass::Data, "evaluation over zero verdicts") {}
};

class CheckpointError : public Error {
 public:
  explicit CheckpointError(const std::string& what) : Error(ErrorClass::Data, what) {}
};

}  // namespace eventclone
