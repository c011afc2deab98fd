#pragma once

// Loop language: a single `while * do ... done` loop whose body is a
// sequence of (simultaneous) polynomial assignments with non-deterministic
// choices.
//
//   program   := header* "while" "*" "do" stmt* "done"
//   header    := "var" ids | "param" id "in" "[" num "," num "]"
//              | "init" id "=" num | "init" id "in" "[" num "," num "]"
//   stmt      := "skip" ";" | "(" ids ")" ":=" "(" exprs ")" ";" | id ":=" expr ";"
//   expr      := term (("+" | "-") term)*
//   term      := unary ("*" unary)*
//   unary     := "-" unary | primary
//   primary   := num | id | "non_det" "(" expr "," expr ")" | "int" "(" expr ")"
//              | "(" expr ")"
//
// Header lines may end with an optional ';'. Comments start with '//' or '#'.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pilat/error.hpp"
#include "pilat/polynomial.hpp"
#include "pilat/rational.hpp"

namespace pilat {

struct Expr {
  enum class Kind { Constant, Variable, Parameter, Add, Mul, NonDet, Cast };

  Kind kind = Kind::Constant;
  Rational value;           // Constant
  std::string name;         // Variable, Parameter, and the parameter bound to a NonDet
  std::vector<Expr> args;   // Add/Mul: 2, NonDet: 2 (bounds), Cast: 1
  bool negation = false;    // Mul(-1, e) written as unary or binary minus
  bool subtraction = false; // Add(a, -b) written as a - b
  SourceLoc loc;

  static Expr constant(Rational v, SourceLoc loc = {});
  static Expr variable(std::string name, SourceLoc loc = {});
  static Expr parameter(std::string name, SourceLoc loc = {});
  static Expr add(Expr a, Expr b, SourceLoc loc = {});
  static Expr mul(Expr a, Expr b, SourceLoc loc = {});
};

/// Simultaneous assignment; no targets means `skip`.
struct Assignment {
  std::vector<std::string> targets;
  std::vector<Expr> rhs;
  SourceLoc loc;

  bool is_skip() const { return targets.empty(); }
};

enum class ParamOrigin { Declared, NonDet, Rounding };

/// A non-deterministic parameter, drawn afresh on every loop iteration.
struct ParamDecl {
  std::string name;
  Rational lower;
  Rational upper;
  ParamOrigin origin = ParamOrigin::Declared;

  friend bool operator==(const ParamDecl& a, const ParamDecl& b) {
    return a.name == b.name && a.lower == b.lower && a.upper == b.upper;
  }
};

struct InitConstraint {
  std::string var;
  Rational lower;
  Rational upper;

  bool is_point() const { return lower == upper; }
};

struct Program {
  std::vector<std::string> vars;         // state variables, declaration order
  std::vector<std::string> temporaries;  // written before read, not part of the state
  std::vector<ParamDecl> params;
  std::vector<InitConstraint> init;
  std::vector<Assignment> body;

  /// Index of a state variable, or nullopt.
  std::optional<std::size_t> var_index(std::string_view name) const;
  const ParamDecl* find_param(std::string_view name) const;
  bool has_nondeterminism() const { return !params.empty(); }
};

struct ParseOptions {
  /// Constant envelopes [lo, hi] for non_det calls with non-constant
  /// arguments, keyed by call-site index (0-based, source order).
  std::map<std::size_t, std::pair<Rational, Rational>> envelopes;
};

Program parse_program(std::string_view source, const ParseOptions& options = {});

/// Canonical source text; parse_program(to_source(p)) prints identically.
std::string to_source(const Program& p);
std::string to_source(const Expr& e);

/// FNV-1a digest of the canonical source, as 16 hex digits.
std::string program_digest(const Program& p);

/// The loop body composed into one simultaneous polynomial map over the state
/// variables. Symbols are the state variables followed by the parameters.
struct SimultaneousMap {
  std::vector<std::string> vars;
  std::vector<ParamDecl> params;
  std::vector<Polynomial> updates;

  std::size_t arity() const { return vars.size() + params.size(); }
  std::vector<std::string> symbol_names() const;
  /// Evaluates the map at a state and parameter tuple.
  std::vector<Rational> apply(std::span<const Rational> state, std::span<const Rational> params) const;
};

/// Sequential statements are composed by substitution.
SimultaneousMap compose(const Program& p);

/// Reference interpreter: executes the body statement by statement.
/// `param_values` is indexed like `p.params`; every non_det call returns the
/// value of its bound parameter. `admissible`, if given, is cleared when a
/// non_det value falls outside the interval its arguments evaluate to.
std::vector<Rational> execute(const Program& p, std::span<const Rational> state,
                              std::span<const Rational> param_values, bool* admissible = nullptr);

/// Ordered blocks w_1..w_k of state-variable indices.
struct SolvablePartition {
  std::vector<std::vector<std::size_t>> blocks;
};

/// Finds a partition where every block updates linearly in itself (constant
/// coefficients) plus a polynomial in earlier blocks and parameters.
/// Throws Error(NotSolvable) naming an offending assignment.
SolvablePartition validate_solvable(const SimultaneousMap& map);

enum class FloatKind { Real, Single, Double };

struct FloatModel {
  FloatKind kind = FloatKind::Real;
  Rational epsilon = 0;

  static FloatModel real();
  static FloatModel single_precision();
  static FloatModel double_precision();
};

FloatModel float_model_from_string(std::string_view name);
const char* to_string(FloatKind kind);

struct MagnitudeConfig {
  std::optional<Rational> default_bound;
  std::map<std::size_t, Rational> per_site;  // keyed by rounding-site index
};

/// Wraps every rounding + and * (and every cast) in the body with an
/// additive parameter: ±ε·B(e) for arithmetic, [-1, 1] for casts. B(e) comes
/// from the config, else from interval evaluation over the initial region.
Program inject_rounding_noise(const Program& p, const FloatModel& model, const MagnitudeConfig& cfg = {});

}  // namespace pilat
