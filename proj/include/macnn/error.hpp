#pragma once

#include <stdexcept>
#include <string>

namespace macnn {

// Failure categories map one-to-one onto CLI exit codes.
enum class ErrorKind : int {
  kUsage = 1,
  kIo = 2,
  kIntegrity = 3,
  kInternal = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Tensor or weight shapes that do not fit together.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::kIntegrity, "shape error: " + what) {}
};

/// Corrupt, truncated or otherwise malformed serialized data.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorKind::kIntegrity, what) {}
};

/// The arithmetic decoder ran out of input bytes.
class StreamExhausted : public FormatError {
 public:
  StreamExhausted() : FormatError("stream exhausted") {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::kInternal, "numeric error: " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

/// An invariant that should hold by construction was violated.
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error(ErrorKind::kInternal, what) {}
};

}  // namespace macnn
