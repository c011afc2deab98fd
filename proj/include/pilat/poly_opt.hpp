#pragma once

// Constrained polynomial optimization over {P(X) <= k} x parameter box, and
// the dichotomy search for an inductive bound k.
//
// Bounds are certified outward by interval branch-and-bound; inner estimates
// come from feasible sample points and local descent.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pilat/interval.hpp"
#include "pilat/loop_ir.hpp"
#include "pilat/polynomial.hpp"
#include "pilat/rational.hpp"

namespace pilat {

struct RationalRange {
  Rational lower;
  Rational upper;
};

struct OptProblem {
  std::size_t nvars = 0;
  Polynomial objective;  // over (vars..., params...)
  Polynomial sublevel;   // over vars
  Rational k;
  std::vector<ParamDecl> params;
  /// Replaces the derived bounding box of the sublevel set when given.
  std::optional<std::vector<RationalRange>> state_box;
};

struct OptResult {
  Rational min_lower;  // <= true minimum
  Rational min_inner;  // attained at a feasible point, >= true minimum
  Rational max_inner;  // attained at a feasible point, <= true maximum
  Rational max_upper;  // >= true maximum
  std::string certificate;
  double tolerance = 0;  // requested relative gap
  double achieved_gap = 0;
  std::size_t nodes = 0;
};

struct OptOptions {
  double eps_opt = 1e-4;
  std::size_t node_budget = 400000;
  unsigned seed = 0x5eed;
  /// Early exit once the maximum is known to lie below, or an attained value
  /// reaches, this value (and symmetrically for the minimum). Bounds stay
  /// sound but the gap may exceed eps_opt.
  std::optional<double> max_threshold;
  std::optional<double> min_threshold;
};

/// Bounding box of {P(X) <= k}. Closed form for positive-definite quadratic
/// P, else a coercivity radius from the top-degree form on the unit cube.
/// Throws UnboundedSublevel when neither applies and Precondition when the
/// set is empty.
IBox sublevel_box(const Polynomial& p, const Rational& k);

/// Even degree with a leading form certified positive away from the origin.
bool certified_coercive(const Polynomial& p);

OptResult min_oracle(const OptProblem& prob, const OptOptions& opts = {});

struct PrecheckReport {
  bool pass = false;
  int degree_p = 0;
  int degree_q = 0;
  /// Upper bound of sup |Q_top / P_top| when the degrees tie.
  std::optional<double> ratio;
  Rational slack;  // 1 - |lambda|
  std::string message;
};

PrecheckReport degree_precheck(const Polynomial& p, const Polynomial& q, std::size_t nvars, const Rational& lambda,
                               const std::vector<ParamDecl>& params);

struct DichotomyConfig {
  int iterations = 10;
  Rational k_init = 50;
  Rational low_k = 0;
  double eps_opt = 1e-4;
};

struct DichotomyStep {
  Rational k;
  Rational min_lower;
  Rational max_upper;
  bool accepted = false;
  std::string phase;  // "init", "expand", "bisect"

  friend bool operator==(const DichotomyStep&, const DichotomyStep&) = default;
};

struct DichotomyResult {
  std::optional<Rational> k;
  std::vector<DichotomyStep> trace;
};

/// Acceptance test for one k: min > -(1-|lambda|)k and max < (1-|lambda|)k.
DichotomyStep test_bound(const Rational& lambda, const Polynomial& p, const Polynomial& q, std::size_t nvars,
                         const std::vector<ParamDecl>& params, const Rational& k, double eps_opt);

/// Returns the smallest accepted k; when init_floor is given it is tested
/// first and returned directly if accepted. Throws NoInductiveBound when no
/// k is accepted within the iteration budget.
DichotomyResult dichotomy_search(const Rational& lambda, const Polynomial& p, const Polynomial& q, std::size_t nvars,
                                 const std::vector<ParamDecl>& params, const std::optional<Rational>& init_floor,
                                 const DichotomyConfig& cfg = {});

/// Range of a polynomial over a rational box. Exact (both ends attained)
/// for total degree <= 2; otherwise outward bounds from branch-and-bound.
struct BoxRange {
  Rational min;
  Rational max;
  bool exact = false;
};
BoxRange polynomial_box_range(const Polynomial& p, const std::vector<RationalRange>& box);

}  // namespace pilat
