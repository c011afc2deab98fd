#pragma once

#include <stdexcept>
#include <string>

namespace pilat {

enum class ErrorKind {
  Syntax,
  UndeclaredVariable,
  Unsupported,
  NotSolvable,
  MissingMagnitudeBound,
  DimensionTooLarge,
  DegreeOverflow,
  DimensionMismatch,
  DivisorExplosion,
  Precondition,
  UnboundedSublevel,
  NoInductiveBound,
  PrecheckFailed,
  Io,
};

const char* to_string(ErrorKind kind);

struct SourceLoc {
  int line = 0;
  int column = 0;
};

/// Base of every error raised by the analysis pipeline.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, SourceLoc loc = {})
      : std::runtime_error(std::move(message)), kind_(kind), loc_(loc) {}

  ErrorKind kind() const { return kind_; }
  const SourceLoc& loc() const { return loc_; }
  bool has_location() const { return loc_.line > 0; }

  /// "line:col: kind: message" when a location is known.
  std::string render() const;

 private:
  ErrorKind kind_;
  SourceLoc loc_;
};

}  // namespace pilat
