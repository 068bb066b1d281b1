#pragma once

#include <stdexcept>
#include <string>

namespace ginv {

// Broad failure classes. The numeric values are the CLI exit codes.
enum class ErrorKind : int {
  kUsage = 1,
  kData = 2,
  kInvariant = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Bad flags, bad config values, out-of-range parameters.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(ErrorKind::kData, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& what) : Error(ErrorKind::kInvariant, what) {}
};

class DisconnectedPattern : public Error {
 public:
  explicit DisconnectedPattern(const std::string& what) : Error(ErrorKind::kInvariant, what) {}
};

class VocabularyTooLarge : public Error {
 public:
  explicit VocabularyTooLarge(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class GraphTooSmall : public Error {
 public:
  explicit GraphTooSmall(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class ShapeMismatch : public Error {
 public:
  explicit ShapeMismatch(const std::string& what) : Error(ErrorKind::kInvariant, what) {}
};

class NonFiniteLoss : public Error {
 public:
  explicit NonFiniteLoss(const std::string& what) : Error(ErrorKind::kInvariant, what) {}
};

}  // namespace ginv
