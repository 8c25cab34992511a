#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcc {

enum class ErrorKind {
  DegenerateCloud,
  BadCount,
  EmptyCloud,
  ShapeMismatch,
  DegenerateBatch,
  NonScalarLoss,
  NonFinite,
  LayerCountMismatch,
  CountMismatch,
  BadSpec,
  EmptyScan,
  InsufficientPoints,
  BadMagic,
  TruncatedFile,
  ParseError,
  IoError,
  DatasetMissing,
  DivergedLoss,
  ConfigMismatch,
  TooFewPoints,
  BadArgument,
};

std::string_view error_kind_name(ErrorKind kind);

// All library failures are reported through this type. The kind is the
// machine-readable class the CLI prints on failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// ParseError with the offending 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorKind::ParseError,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace pcc
