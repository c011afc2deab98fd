#include "pilat/interval.hpp"

#include <algorithm>
#include <stdexcept>

namespace pilat {

Interval Interval::enclose(const Rational& q) {
  double d = q.get_d();
  if (std::isfinite(d) && Rational(d) == q) return {d, d};
  return {round_down(d), round_up(d)};
}

Interval operator+(const Interval& a, const Interval& b) { return {round_down(a.lo + b.lo), round_up(a.hi + b.hi)}; }

Interval operator-(const Interval& a, const Interval& b) { return {round_down(a.lo - b.hi), round_up(a.hi - b.lo)}; }

Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

Interval operator*(const Interval& a, const Interval& b) {
  if ((a.lo == 0 && a.hi == 0) || (b.lo == 0 && b.hi == 0)) return {0, 0};
  double p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {round_down(*std::min_element(p, p + 4)), round_up(*std::max_element(p, p + 4))};
}

Interval operator/(const Interval& a, const Interval& b) {
  if (b.lo <= 0 && b.hi >= 0) throw std::domain_error("interval division by an interval containing zero");
  double p[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
  return {round_down(*std::min_element(p, p + 4)), round_up(*std::max_element(p, p + 4))};
}

Interval pow(const Interval& a, unsigned e) {
  if (e == 0) return {1, 1};
  if (e == 1) return a;
  auto up = [e](double m) {
    double r = 1;
    for (unsigned i = 0; i < e; ++i) r = round_up(r * m);
    return r;
  };
  auto down = [e](double m) {
    double r = 1;
    for (unsigned i = 0; i < e; ++i) r = round_down(r * m);
    return std::max(0.0, r);
  };
  if (e % 2 == 1) {
    // Odd powers are monotone.
    double lo = a.lo >= 0 ? down(a.lo) : -up(-a.lo);
    double hi = a.hi >= 0 ? up(a.hi) : -down(-a.hi);
    return {lo, hi};
  }
  Interval m = abs(a);
  return {down(m.lo), up(m.hi)};
}

Interval abs(const Interval& a) {
  if (a.lo >= 0) return a;
  if (a.hi <= 0) return -a;
  return {0, std::max(-a.lo, a.hi)};
}

Interval intersect(const Interval& a, const Interval& b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

Interval hull(const Interval& a, const Interval& b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

CompiledPoly::CompiledPoly(const Polynomial& p, bool with_gradient) : arity_(p.arity()), uses_(p.arity(), false) {
  for (const auto& [exps, c] : p.terms()) {
    Term t;
    t.coeff = Interval::enclose(c);
    t.approx = c.get_d();
    for (std::size_t i = 0; i < exps.size(); ++i)
      if (exps[i] > 0) {
        t.factors.emplace_back(i, exps[i]);
        uses_[i] = true;
      }
    terms_.push_back(std::move(t));
  }
  if (with_gradient)
    for (std::size_t i = 0; i < arity_; ++i) gradient_.emplace_back(p.derivative(i), false);
}

Interval CompiledPoly::natural(std::span<const Interval> box) const {
  Interval sum{0, 0};
  for (const auto& t : terms_) {
    Interval v = t.coeff;
    for (const auto& [i, e] : t.factors) v = v * pow(box[i], e);
    sum = sum + v;
  }
  return sum;
}

Interval CompiledPoly::enclose(std::span<const Interval> box) const {
  Interval nat = natural(box);
  if (gradient_.empty()) return nat;
  std::vector<Interval> centre(box.size());
  bool degenerate = true;
  for (std::size_t i = 0; i < box.size(); ++i) {
    centre[i] = Interval::point(box[i].mid());
    if (box[i].width() > 0) degenerate = false;
  }
  if (degenerate) return nat;
  Interval mv = natural(centre);
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (!uses_[i] || box[i].width() == 0) continue;
    mv = mv + gradient_[i].natural(box) * (box[i] - centre[i]);
  }
  return intersect(nat, mv);
}

Interval CompiledPoly::gradient(std::size_t i, std::span<const Interval> box) const {
  if (gradient_.empty()) throw std::logic_error("polynomial compiled without gradient");
  return gradient_[i].natural(box);
}

double CompiledPoly::value(std::span<const double> x) const {
  double sum = 0;
  for (const auto& t : terms_) {
    double v = t.approx;
    for (const auto& [i, e] : t.factors)
      for (unsigned k = 0; k < e; ++k) v *= x[i];
    sum += v;
  }
  return sum;
}

bool CompiledPoly::independent_of(std::size_t i) const { return i >= uses_.size() || !uses_[i]; }

}  // namespace pilat
