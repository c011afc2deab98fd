#include "pilat/rational.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace pilat {

namespace {

Integer pow10(long e) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, static_cast<unsigned long>(e));
  return r;
}

// floor(q) and ceil(q) for rationals.
Integer floor_q(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

Integer ceil_q(const Rational& q) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw std::invalid_argument("malformed number '" + std::string(text) + "'");
  };
  if (text.empty()) return fail();
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_rational(text.substr(0, slash));
    Rational den = parse_rational(text.substr(slash + 1));
    if (den == 0) return fail();
    Rational r = num / den;
    r.canonicalize();
    return r;
  }
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '+' || text[i] == '-') {
    negative = text[i] == '-';
    ++i;
  }
  std::string digits;
  long frac_digits = 0;
  bool seen_point = false;
  bool any_digit = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      any_digit = true;
      if (seen_point) ++frac_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) return fail();
  long exponent = 0;
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') return fail();
    ++i;
    std::string exp_text(text.substr(i));
    if (exp_text.empty()) return fail();
    std::size_t used = 0;
    try {
      exponent = std::stol(exp_text, &used);
    } catch (const std::exception&) {
      return fail();
    }
    if (used != exp_text.size()) return fail();
  }
  Integer mantissa(digits, 10);
  long shift = exponent - frac_digits;
  Rational r;
  if (shift >= 0) {
    r = Rational(mantissa * pow10(shift));
  } else {
    r = Rational(mantissa, pow10(-shift));
    r.canonicalize();
  }
  return negative ? Rational(-r) : r;
}

std::string to_fraction_string(const Rational& q) { return q.get_str(); }

std::string to_exact_string(const Rational& q) {
  Integer den = q.get_den();
  unsigned long twos = mpz_remove(den.get_mpz_t(), den.get_mpz_t(), Integer(2).get_mpz_t());
  unsigned long fives = mpz_remove(den.get_mpz_t(), den.get_mpz_t(), Integer(5).get_mpz_t());
  if (den != 1) return to_fraction_string(q);
  long scale = static_cast<long>(std::max(twos, fives));
  if (scale == 0) return q.get_num().get_str();
  Integer scaled = q.get_num() * pow10(scale) / q.get_den();
  bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string s = scaled.get_str();
  if (static_cast<long>(s.size()) <= scale) s.insert(0, static_cast<std::size_t>(scale) - s.size() + 1, '0');
  s.insert(s.size() - static_cast<std::size_t>(scale), ".");
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return negative ? "-" + s : s;
}

std::string to_decimal_string(const Rational& q, int digits, int direction) {
  if (q == 0) return "0";
  if (digits < 1) digits = 1;
  Rational magnitude = abs(q);
  // Locate e with 10^e <= |q| < 10^(e+1).
  long e = static_cast<long>(std::floor(std::log10(to_double(magnitude))));
  auto ten_pow = [](long k) {
    return k >= 0 ? Rational(pow10(k)) : Rational(Integer(1), pow10(-k));
  };
  while (ten_pow(e) > magnitude) --e;
  while (ten_pow(e + 1) <= magnitude) ++e;
  long shift = digits - 1 - e;
  Rational scaled = q * ten_pow(shift);
  Integer m;
  if (direction < 0) {
    m = floor_q(scaled);
  } else if (direction > 0) {
    m = ceil_q(scaled);
  } else {
    m = floor_q(scaled + Rational(1, 2));
  }
  Rational value = Rational(m) / ten_pow(shift);
  value.canonicalize();
  return to_exact_string(value);
}

double to_double(const Rational& q) { return q.get_d(); }

Rational from_double(double d) {
  if (!std::isfinite(d)) throw std::invalid_argument("non-finite double");
  Rational r(d);
  r.canonicalize();
  return r;
}

Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

}  // namespace pilat
