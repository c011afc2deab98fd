#pragma once

// Outward-rounded double intervals and polynomials compiled for fast
// enclosure. Every operation widens its result by one ulp on each side,
// which dominates the half-ulp error of round-to-nearest.

#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "pilat/polynomial.hpp"
#include "pilat/rational.hpp"

namespace pilat {

struct Interval {
  double lo = 0;
  double hi = 0;

  static Interval point(double v) { return {v, v}; }
  /// Smallest double interval containing q.
  static Interval enclose(const Rational& q);
  static Interval entire() {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }

  double width() const { return hi - lo; }
  double mid() const { return lo + 0.5 * (hi - lo); }
  double mag() const { return std::max(std::fabs(lo), std::fabs(hi)); }
  bool contains(double v) const { return lo <= v && v <= hi; }
};

inline double round_down(double v) { return std::nextafter(v, -std::numeric_limits<double>::infinity()); }
inline double round_up(double v) { return std::nextafter(v, std::numeric_limits<double>::infinity()); }

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator*(const Interval& a, const Interval& b);
/// Requires 0 outside b.
Interval operator/(const Interval& a, const Interval& b);
Interval pow(const Interval& a, unsigned e);
Interval abs(const Interval& a);
/// Intersection; callers guarantee overlap.
Interval intersect(const Interval& a, const Interval& b);
Interval hull(const Interval& a, const Interval& b);

using IBox = std::vector<Interval>;

/// A polynomial with double coefficient enclosures and its gradient.
class CompiledPoly {
 public:
  CompiledPoly() = default;
  explicit CompiledPoly(const Polynomial& p, bool with_gradient = true);

  std::size_t arity() const { return arity_; }
  bool is_zero() const { return terms_.empty(); }

  /// Natural interval extension.
  Interval natural(std::span<const Interval> box) const;
  /// Natural extension intersected with the mean-value form at the midpoint.
  Interval enclose(std::span<const Interval> box) const;
  /// Enclosure of the i-th partial derivative.
  Interval gradient(std::size_t i, std::span<const Interval> box) const;
  /// Plain floating-point evaluation (not certified).
  double value(std::span<const double> x) const;
  /// True when the polynomial does not involve symbol i.
  bool independent_of(std::size_t i) const;

 private:
  struct Term {
    Interval coeff;
    double approx = 0;
    std::vector<std::pair<std::size_t, unsigned>> factors;
  };
  std::size_t arity_ = 0;
  std::vector<Term> terms_;
  std::vector<CompiledPoly> gradient_;
  std::vector<bool> uses_;
};

}  // namespace pilat
