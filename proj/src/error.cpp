#include "pilat/error.hpp"

namespace pilat {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::UndeclaredVariable: return "UndeclaredVariable";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::NotSolvable: return "NotSolvable";
    case ErrorKind::MissingMagnitudeBound: return "MissingMagnitudeBound";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::DegreeOverflow: return "DegreeOverflow";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DivisorExplosion: return "DivisorExplosion";
    case ErrorKind::Precondition: return "PreconditionViolation";
    case ErrorKind::UnboundedSublevel: return "UnboundedSublevel";
    case ErrorKind::NoInductiveBound: return "NoInductiveBound";
    case ErrorKind::PrecheckFailed: return "PrecheckFailed";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

std::string Error::render() const {
  std::string out;
  if (has_location()) {
    out += std::to_string(loc_.line) + ":" + std::to_string(loc_.column) + ": ";
  }
  out += to_string(kind_);
  out += ": ";
  out += what();
  return out;
}

}  // namespace pilat
