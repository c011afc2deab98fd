#pragma once

// Semi-invariants from left eigenvectors of the lifted loop matrix, bound
// synthesis for non-deterministic loops, and simulation-based checking.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pilat/lift.hpp"
#include "pilat/linalg.hpp"
#include "pilat/loop_ir.hpp"
#include "pilat/poly_opt.hpp"

namespace pilat {

enum class InvariantClass { Exact, Convergent, Divergent };

const char* to_string(InvariantClass c);
InvariantClass invariant_class_from_string(std::string_view s);

enum class VerificationStatus { Unchecked, Verified, CounterExample };

const char* to_string(VerificationStatus s);
VerificationStatus verification_status_from_string(std::string_view s);

struct Verification {
  VerificationStatus status = VerificationStatus::Unchecked;
  std::size_t trials = 0;
  std::vector<Rational> state;   // counterexample, if any
  std::vector<Rational> params;

  friend bool operator==(const Verification&, const Verification&) = default;
};

/// Relation over the state variables:
///   Exact       P(X) == 0             (with lambda = 1 and no init point:
///                                      P(X) == P(X at loop entry))
///   Convergent  |P(X)| <= bound       (symbolic: <= |P| at loop entry)
///   Divergent   |P(X)| >= bound       (symbolic: >= |P| at loop entry)
struct SemiInvariant {
  std::vector<Rational> covector;  // over the monomial basis
  Rational lambda;
  InvariantClass cls = InvariantClass::Exact;
  std::optional<Rational> bound;
  bool symbolic = false;
  Verification verified;
  std::string provenance;  // "eigenpair" or "candidate"
  std::vector<DichotomyStep> trace;

  friend bool operator==(const SemiInvariant&, const SemiInvariant&) = default;
};

/// Classes whose defining implication holds for a left eigenvector with
/// eigenvalue lambda (lambda != 0).
std::vector<InvariantClass> classify_eigenpair(const Rational& lambda);

/// Per-variable point or interval.
struct InitialRegion {
  std::map<std::string, RationalRange> values;

  static InitialRegion from_program(const Program& p);
  bool covers(const std::vector<std::string>& vars) const;
  /// Ranges ordered like `vars`; requires covers(vars).
  std::vector<RationalRange> box(const std::vector<std::string>& vars) const;
  /// The point, when every variable is fixed.
  std::optional<std::vector<Rational>> point(const std::vector<std::string>& vars) const;
};

/// Rescales so the last nonzero coordinate (in basis order) is 1.
std::vector<Rational> normalize_last_nonzero(std::vector<Rational> v);

std::vector<SemiInvariant> deterministic_invariants(const RationalMatrix& a, const MonomialBasis& basis,
                                                    const std::optional<InitialRegion>& init);

struct CandidateInvariant {
  std::vector<Rational> e0;
  Rational lambda0;
  std::vector<Polynomial> delta;  // e0·(M_N − M_0), one parameter polynomial per basis entry
  Polynomial objective;           // <delta, X> over (vars..., params...)
};

/// Candidates from rational left eigenpairs of M_0 with 0 < |lambda| < 1. Each
/// covector is normalized by its last nonzero coordinate and oriented so
/// that its polynomial is bounded below.
std::vector<CandidateInvariant> nd_candidates(const AbstractMatrix& a);

struct SynthesisOptions {
  DichotomyConfig dichotomy;
  bool override_precheck = false;
};

/// Throws PrecheckFailed (without override) and NoInductiveBound.
SemiInvariant synthesize_nd_invariant(const CandidateInvariant& c, const MonomialBasis& basis,
                                      const std::vector<ParamDecl>& params, const std::optional<InitialRegion>& init,
                                      const SynthesisOptions& opts = {});

/// One-step check of the relation on `trials` sampled states (inside and on
/// the boundary of the relation) and parameter draws, with exact rationals.
Verification verify_inductive_simulation(const Program& p, const MonomialBasis& basis, const SemiInvariant& s,
                                         std::size_t trials, std::uint64_t seed = 1,
                                         const std::optional<InitialRegion>& init = std::nullopt);

struct InvariantReport {
  std::string program;  // digest
  int degree = 0;
  std::vector<std::string> vars;
  std::vector<std::string> basis;  // monomial names, basis order
  std::vector<SemiInvariant> invariants;
  std::vector<std::string> diagnostics;
  double candidate_generation_ms = 0;
  double optimization_s = 0;

  friend bool operator==(const InvariantReport&, const InvariantReport&) = default;
};

/// |lambda| descending, then polynomial text.
void sort_invariants(std::vector<SemiInvariant>& invs, const MonomialBasis& basis);

}  // namespace pilat
