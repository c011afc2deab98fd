#pragma once

// Monomial lifting: a polynomial loop body acting on the vector of all
// monomials of bounded degree is a linear map whose matrix entries are
// polynomials in the non-deterministic parameters.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pilat/linalg.hpp"
#include "pilat/loop_ir.hpp"
#include "pilat/polynomial.hpp"

namespace pilat {

inline constexpr std::size_t kDefaultMonomialCap = 5000;

/// Monomials of total degree <= d in graded-lex order: 1, x, y, x^2, x*y, y^2, ...
class MonomialBasis {
 public:
  MonomialBasis() = default;
  MonomialBasis(std::vector<std::string> vars, std::vector<Exponents> monomials);

  const std::vector<std::string>& vars() const { return vars_; }
  const std::vector<Exponents>& monomials() const { return monomials_; }
  std::size_t size() const { return monomials_.size(); }
  int degree() const;
  /// Position of a monomial, or size() when absent.
  std::size_t index_of(const Exponents& e) const;
  std::string name(std::size_t i, Polynomial::PowerStyle style = Polynomial::PowerStyle::Caret) const;
  /// Position of the constant monomial 1.
  std::size_t unit_index() const { return index_of(Exponents(vars_.size(), 0)); }

  /// Monomial vector of a concrete state.
  std::vector<Rational> lift_state(std::span<const Rational> state) const;
  /// P(X) = <phi, monomials(X)> as a polynomial over the variables.
  Polynomial covector_polynomial(std::span<const Rational> phi) const;

  friend bool operator==(const MonomialBasis& a, const MonomialBasis& b) = default;

 private:
  std::vector<std::string> vars_;
  std::vector<Exponents> monomials_;
  std::map<Exponents, std::size_t> index_;
};

/// Throws DimensionTooLarge when C(n+d, d) exceeds `cap`.
MonomialBasis monomial_basis(const std::vector<std::string>& vars, int degree,
                             std::size_t cap = kDefaultMonomialCap);

/// Square matrix over a monomial basis with entries polynomial in the
/// parameters. Row i is the expansion of monomial i after one iteration.
class AbstractMatrix {
 public:
  AbstractMatrix() = default;
  AbstractMatrix(MonomialBasis basis, std::vector<ParamDecl> params, std::vector<Polynomial> entries);

  const MonomialBasis& basis() const { return basis_; }
  const std::vector<ParamDecl>& params() const { return params_; }
  std::size_t dim() const { return basis_.size(); }
  const Polynomial& at(std::size_t row, std::size_t col) const { return entries_[row * dim() + col]; }
  bool parameter_free() const;
  std::vector<std::string> param_names() const;

  /// Concrete matrix for a parameter tuple.
  RationalMatrix instantiate(std::span<const Rational> values) const;

  friend bool operator==(const AbstractMatrix& a, const AbstractMatrix& b) = default;

 private:
  MonomialBasis basis_;
  std::vector<ParamDecl> params_;
  std::vector<Polynomial> entries_;  // row-major, arity = params.size()
};

/// Lifts the composed body to degree d. Throws DegreeOverflow naming the
/// first monomial whose image leaves the basis.
AbstractMatrix lift_to_abstract_matrix(const SimultaneousMap& map, const SolvablePartition& partition, int degree,
                                       std::size_t cap = kDefaultMonomialCap);

/// All parameters set to 0.
RationalMatrix instantiate_at_zero(const AbstractMatrix& a);

/// e·(A − A(0)), a covector of parameter polynomials.
std::vector<Polynomial> noise_covector(std::span<const Rational> e, const AbstractMatrix& a);

/// <delta, monomials(X)> over the symbols (vars..., params...).
Polynomial pair_with_state(std::span<const Polynomial> delta, const AbstractMatrix& a);

std::string to_json(const AbstractMatrix& a);
AbstractMatrix abstract_matrix_from_json(std::string_view text);

}  // namespace pilat
