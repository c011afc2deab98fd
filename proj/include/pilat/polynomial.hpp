#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pilat/rational.hpp"

namespace pilat {

using Exponents = std::vector<unsigned>;

/// Sparse multivariate polynomial with rational coefficients over a fixed
/// number of symbols. Symbol meaning (program variable, parameter) is
/// decided by the owner; names are only needed for printing.
class Polynomial {
 public:
  using TermMap = std::map<Exponents, Rational>;

  explicit Polynomial(std::size_t arity = 0) : arity_(arity) {}

  static Polynomial constant(std::size_t arity, const Rational& c);
  static Polynomial symbol(std::size_t arity, std::size_t index);
  static Polynomial monomial(const Exponents& exps, const Rational& c = 1);

  std::size_t arity() const { return arity_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rational constant_term() const;
  Rational coefficient(const Exponents& exps) const;

  void add_term(const Exponents& exps, const Rational& c);

  Polynomial operator-() const;
  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(const Rational& c);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, const Rational& c) { return a *= c; }
  friend Polynomial operator*(const Rational& c, Polynomial a) { return a *= c; }
  friend bool operator==(const Polynomial& a, const Polynomial& b) = default;

  Polynomial pow(unsigned e) const;

  /// Maximum total degree; -1 for the zero polynomial.
  int total_degree() const;
  /// Maximum degree counted only over symbols in [first, last).
  int degree_in(std::size_t first, std::size_t last) const;

  Rational evaluate(std::span<const Rational> point) const;
  double evaluate(std::span<const double> point) const;

  /// Replaces symbol i by images[i]; all images share one arity.
  Polynomial substitute(std::span<const Polynomial> images) const;
  /// Moves symbol i to position mapping[i] in a space of `arity` symbols.
  Polynomial relabel(std::size_t arity, std::span<const std::size_t> mapping) const;
  Polynomial derivative(std::size_t index) const;
  /// Terms whose degree over [first, last) equals `degree`.
  Polynomial homogeneous_part(int degree, std::size_t first, std::size_t last) const;
  /// Groups terms by their exponents on the first `count` symbols; values are
  /// polynomials over the remaining symbols.
  std::map<Exponents, Polynomial> split_leading(std::size_t count) const;

  enum class CoefficientStyle { Exact, Decimal6 };
  enum class PowerStyle { Caret, Product };
  /// Highest degree first. Names must cover every symbol.
  std::string to_string(std::span<const std::string> names,
                        CoefficientStyle coeffs = CoefficientStyle::Exact,
                        PowerStyle powers = PowerStyle::Caret) const;

 private:
  std::size_t arity_;
  TermMap terms_;
};

/// Monomial rendering: "1", "x", "x^2*y" (Caret) or "x*x*y" (Product).
std::string monomial_string(const Exponents& exps, std::span<const std::string> names,
                            Polynomial::PowerStyle powers = Polynomial::PowerStyle::Caret);

/// Total-degree-descending, then lexicographically descending order used for
/// printing.
bool print_order_less(const Exponents& a, const Exponents& b);

/// Parses a polynomial string produced by `to_string` (or any sum of
/// products of rational constants and named symbols with optional ^powers).
Polynomial parse_polynomial(std::string_view text, std::span<const std::string> names);

}  // namespace pilat
