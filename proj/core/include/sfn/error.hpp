#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A network violates a structural invariant (parameter count, input index, finiteness).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Evaluation produced a non-finite value. `path` locates the offending node
/// (root index followed by child indices).
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::vector<std::size_t> path)
      : Error(what), path_(std::move(path)) {}

  const std::vector<std::size_t>& path() const noexcept { return path_; }

 private:
  std::vector<std::size_t> path_;
};

/// Malformed model or record bytes. `offset` is the byte position where
/// parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A model file declares a schema version this build does not understand.
class VersionError : public Error {
 public:
  VersionError(int found, int expected)
      : Error("unsupported schema_version " + std::to_string(found) + " (expected " +
              std::to_string(expected) + ")"),
        found_(found) {}

  int found() const noexcept { return found_; }

 private:
  int found_;
};

/// Bad input data: sizing, shapes, unreadable files, non-numeric cells.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid training configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training diverged or could not proceed.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace sfn
