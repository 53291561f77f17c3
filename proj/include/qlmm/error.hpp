#pragma once

#include <stdexcept>
#include <string>

namespace qlmm {

enum class ErrorKind {
  InvalidConfig,
  InvalidArgument,
  OutOfRange,
  MeshSingular,
  PhysicsDomain,
  PositivityViolation,
  NumericalBlowup,
  AdaptationInput,
  Nonconvergence,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace qlmm
