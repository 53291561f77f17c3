#include "qlmm/error.hpp"

namespace qlmm {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig: return "invalid_config";
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::OutOfRange: return "out_of_range";
    case ErrorKind::MeshSingular: return "mesh_singular";
    case ErrorKind::PhysicsDomain: return "physics_domain";
    case ErrorKind::PositivityViolation: return "positivity_violation";
    case ErrorKind::NumericalBlowup: return "numerical_blowup";
    case ErrorKind::AdaptationInput: return "adaptation_input";
    case ErrorKind::Nonconvergence: return "nonconvergence";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace qlmm
