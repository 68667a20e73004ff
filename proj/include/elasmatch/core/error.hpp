#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace elasmatch {

enum class ErrorKind {
  DegenerateCell,
  InvalidShape,
  UnsupportedShape,
  ParseError,
  UnsupportedFormat,
  StructureMismatch,
  ZeroCell,
  DimensionMismatch,
  SignalMismatch,
  NonSymmetricInput,
  InvalidArgument,
  ConfigError,
  NonFiniteValue,
  IoError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateCell: return "DegenerateCell";
    case ErrorKind::InvalidShape: return "InvalidShape";
    case ErrorKind::UnsupportedShape: return "UnsupportedShape";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::StructureMismatch: return "StructureMismatch";
    case ErrorKind::ZeroCell: return "ZeroCell";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SignalMismatch: return "SignalMismatch";
    case ErrorKind::NonSymmetricInput: return "NonSymmetricInput";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library. The kind is
/// stable and meant for machine-readable error records.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failure with an optional 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::optional<std::size_t> line = std::nullopt)
      : Error(ErrorKind::ParseError,
              line ? "line " + std::to_string(*line) + ": " + message : message),
        line_(line) {}

  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  std::optional<std::size_t> line_;
};

/// Degenerate edge or face; carries the offending cell index.
class DegenerateCellError : public Error {
 public:
  DegenerateCellError(std::size_t cell, double measure)
      : Error(ErrorKind::DegenerateCell,
              "cell " + std::to_string(cell) + " has measure " + std::to_string(measure)),
        cell_(cell) {}

  std::size_t cell() const noexcept { return cell_; }

 private:
  std::size_t cell_;
};

}  // namespace elasmatch
