#pragma once

// Exact dense linear algebra over the rationals.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pilat/rational.hpp"

namespace pilat {

using RowVector = std::vector<Rational>;

class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  RationalMatrix(std::initializer_list<std::initializer_list<Rational>> rows);

  static RationalMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  RationalMatrix transpose() const;
  friend RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b);
  friend RationalMatrix operator-(const RationalMatrix& a, const RationalMatrix& b);
  friend RationalMatrix operator+(const RationalMatrix& a, const RationalMatrix& b);
  friend RationalMatrix operator*(const Rational& s, const RationalMatrix& a);
  friend bool operator==(const RationalMatrix& a, const RationalMatrix& b) = default;

  /// v·A for a row vector v.
  RowVector left_multiply(std::span<const Rational> v) const;
  /// A·v for a column vector v.
  RowVector right_multiply(std::span<const Rational> v) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

/// Univariate polynomial, coefficients in ascending degree order.
class UniPoly {
 public:
  UniPoly() = default;
  explicit UniPoly(std::vector<Rational> coeffs);

  static UniPoly monomial(std::size_t degree, const Rational& c = 1);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<Rational>& coeffs() const { return coeffs_; }
  Rational coeff(std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : Rational(0); }
  Rational leading() const { return coeffs_.empty() ? Rational(0) : coeffs_.back(); }

  Rational evaluate(const Rational& x) const;
  int sign_at(const Rational& x) const { return sgn(evaluate(x)); }
  UniPoly derivative() const;
  /// Positive rational multiple with coprime integer coefficients.
  UniPoly primitive() const;

  friend UniPoly operator+(const UniPoly& a, const UniPoly& b);
  friend UniPoly operator-(const UniPoly& a, const UniPoly& b);
  friend UniPoly operator*(const UniPoly& a, const UniPoly& b);
  friend UniPoly operator*(const Rational& s, const UniPoly& a);
  friend bool operator==(const UniPoly& a, const UniPoly& b) = default;

  /// Euclidean division; throws on a zero divisor.
  static void divmod(const UniPoly& a, const UniPoly& b, UniPoly& quotient, UniPoly& remainder);
  static UniPoly gcd(UniPoly a, UniPoly b);

  std::string to_string(const std::string& var = "t") const;

 private:
  void trim();
  std::vector<Rational> coeffs_;
};

/// det(t·Id − A), monic of degree n. Hessenberg reduction over Q.
UniPoly char_poly(const RationalMatrix& a);

/// Distinct rational roots in increasing order.
std::vector<Rational> rational_roots(const UniPoly& p);

/// Distinct rational eigenvalues in increasing order (zero included).
std::vector<Rational> rational_eigenvalues(const RationalMatrix& a);

/// Basis of {x : A·x = 0}; empty iff A is injective.
std::vector<RowVector> kernel_basis(const RationalMatrix& a);

std::size_t rank(const RationalMatrix& a);

struct Eigenpair {
  Rational value;
  std::vector<RowVector> left_space;
};

/// Scales v so that its first nonzero coordinate equals 1.
RowVector normalize_first_nonzero(RowVector v);

/// One pair per nonzero rational eigenvalue; left_space spans ker(Aᵗ − λ·Id)
/// with each vector normalized by its first nonzero coordinate.
std::vector<Eigenpair> left_eigenpairs(const RationalMatrix& a);

/// Floating-point left eigenpair for eigenvalues the exact path cannot
/// represent. Never sound on its own.
struct ApproxEigenpair {
  double real = 0;
  double imag = 0;
  std::vector<double> left_vector;  // real part, empty for complex eigenvalues
};

/// Real eigenvalues (and complex ones, without vectors) that are not among
/// the given exact rational eigenvalues.
std::vector<ApproxEigenpair> approximate_left_eigenpairs(const RationalMatrix& a,
                                                         std::span<const Rational> exact);

}  // namespace pilat
