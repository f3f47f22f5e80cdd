#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bodyfit {

enum class ErrorKind {
  Parse,
  InvalidMesh,
  IndexOutOfRange,
  IsolatedVertex,
  NoConstraints,
  Singular,
  InvalidArgument,
  SizeMismatch,
  MissingJoint,
  DuplicateVertex,
  Io,
  Config,
  Stage,
};

std::string_view to_string(ErrorKind kind);

// All recoverable failures in the library are reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bodyfit
