#include "pilat/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace pilat {

namespace {

unsigned total(const Exponents& e) {
  unsigned s = 0;
  for (unsigned v : e) s += v;
  return s;
}

}  // namespace

Polynomial Polynomial::constant(std::size_t arity, const Rational& c) {
  Polynomial p(arity);
  p.add_term(Exponents(arity, 0), c);
  return p;
}

Polynomial Polynomial::symbol(std::size_t arity, std::size_t index) {
  if (index >= arity) throw std::out_of_range("symbol index out of range");
  Exponents e(arity, 0);
  e[index] = 1;
  Polynomial p(arity);
  p.add_term(e, 1);
  return p;
}

Polynomial Polynomial::monomial(const Exponents& exps, const Rational& c) {
  Polynomial p(exps.size());
  p.add_term(exps, c);
  return p;
}

bool Polynomial::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && total(terms_.begin()->first) == 0);
}

Rational Polynomial::constant_term() const { return coefficient(Exponents(arity_, 0)); }

Rational Polynomial::coefficient(const Exponents& exps) const {
  auto it = terms_.find(exps);
  return it == terms_.end() ? Rational(0) : it->second;
}

void Polynomial::add_term(const Exponents& exps, const Rational& c) {
  if (exps.size() != arity_) throw std::invalid_argument("exponent arity mismatch");
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(exps, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Polynomial Polynomial::operator-() const {
  Polynomial r = *this;
  for (auto& [e, c] : r.terms_) c = -c;
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.arity_ != arity_) throw std::invalid_argument("polynomial arity mismatch");
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  if (other.arity_ != arity_) throw std::invalid_argument("polynomial arity mismatch");
  for (const auto& [e, c] : other.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, v] : terms_) v *= c;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.arity_ != b.arity_) throw std::invalid_argument("polynomial arity mismatch");
  Polynomial r(a.arity_);
  Exponents e(a.arity_);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      r.add_term(e, ca * cb);
    }
  }
  return r;
}

Polynomial Polynomial::pow(unsigned e) const {
  Polynomial result = constant(arity_, 1);
  Polynomial base = *this;
  while (e > 0) {
    if (e & 1u) result = result * base;
    e >>= 1u;
    if (e > 0) base = base * base;
  }
  return result;
}

int Polynomial::total_degree() const { return degree_in(0, arity_); }

int Polynomial::degree_in(std::size_t first, std::size_t last) const {
  if (terms_.empty()) return -1;
  int best = 0;
  for (const auto& [e, c] : terms_) {
    int d = 0;
    for (std::size_t i = first; i < last && i < e.size(); ++i) d += static_cast<int>(e[i]);
    best = std::max(best, d);
  }
  return best;
}

Rational Polynomial::evaluate(std::span<const Rational> point) const {
  if (point.size() != arity_) throw std::invalid_argument("evaluation point arity mismatch");
  Rational sum = 0;
  Rational term;
  for (const auto& [e, c] : terms_) {
    term = c;
    for (std::size_t i = 0; i < e.size(); ++i) {
      for (unsigned k = 0; k < e[i]; ++k) term *= point[i];
    }
    sum += term;
  }
  return sum;
}

double Polynomial::evaluate(std::span<const double> point) const {
  if (point.size() != arity_) throw std::invalid_argument("evaluation point arity mismatch");
  double sum = 0;
  for (const auto& [e, c] : terms_) {
    double term = c.get_d();
    for (std::size_t i = 0; i < e.size(); ++i) {
      for (unsigned k = 0; k < e[i]; ++k) term *= point[i];
    }
    sum += term;
  }
  return sum;
}

Polynomial Polynomial::substitute(std::span<const Polynomial> images) const {
  if (images.size() != arity_) throw std::invalid_argument("substitution arity mismatch");
  std::size_t target = images.empty() ? 0 : images.front().arity();
  Polynomial result(target);
  // Cache powers of each image.
  std::vector<std::vector<Polynomial>> powers(arity_);
  for (const auto& [e, c] : terms_) {
    Polynomial term = constant(target, c);
    for (std::size_t i = 0; i < arity_; ++i) {
      if (e[i] == 0) continue;
      auto& cache = powers[i];
      if (cache.empty()) cache.push_back(constant(target, 1));
      while (cache.size() <= e[i]) cache.push_back(cache.back() * images[i]);
      term = term * cache[e[i]];
    }
    result += term;
  }
  return result;
}

Polynomial Polynomial::relabel(std::size_t arity, std::span<const std::size_t> mapping) const {
  if (mapping.size() != arity_) throw std::invalid_argument("relabel arity mismatch");
  Polynomial result(arity);
  Exponents ne(arity);
  for (const auto& [e, c] : terms_) {
    std::fill(ne.begin(), ne.end(), 0u);
    for (std::size_t i = 0; i < arity_; ++i) {
      if (e[i] == 0) continue;
      if (mapping[i] >= arity) throw std::out_of_range("relabel target out of range");
      ne[mapping[i]] += e[i];
    }
    result.add_term(ne, c);
  }
  return result;
}

Polynomial Polynomial::derivative(std::size_t index) const {
  Polynomial result(arity_);
  for (const auto& [e, c] : terms_) {
    if (e[index] == 0) continue;
    Exponents ne = e;
    ne[index] -= 1;
    result.add_term(ne, c * e[index]);
  }
  return result;
}

Polynomial Polynomial::homogeneous_part(int degree, std::size_t first, std::size_t last) const {
  Polynomial result(arity_);
  for (const auto& [e, c] : terms_) {
    int d = 0;
    for (std::size_t i = first; i < last; ++i) d += static_cast<int>(e[i]);
    if (d == degree) result.add_term(e, c);
  }
  return result;
}

std::map<Exponents, Polynomial> Polynomial::split_leading(std::size_t count) const {
  std::map<Exponents, Polynomial> groups;
  for (const auto& [e, c] : terms_) {
    Exponents head(e.begin(), e.begin() + static_cast<long>(count));
    Exponents tail(e.begin() + static_cast<long>(count), e.end());
    auto it = groups.try_emplace(head, Polynomial(arity_ - count)).first;
    it->second.add_term(tail, c);
  }
  return groups;
}

bool print_order_less(const Exponents& a, const Exponents& b) {
  unsigned ta = total(a), tb = total(b);
  if (ta != tb) return ta > tb;
  return a > b;
}

std::string monomial_string(const Exponents& exps, std::span<const std::string> names,
                            Polynomial::PowerStyle powers) {
  std::string out;
  for (std::size_t i = 0; i < exps.size(); ++i) {
    if (exps[i] == 0) continue;
    if (powers == Polynomial::PowerStyle::Product) {
      for (unsigned k = 0; k < exps[i]; ++k) {
        if (!out.empty()) out += "*";
        out += names[i];
      }
    } else {
      if (!out.empty()) out += "*";
      out += names[i];
      if (exps[i] > 1) out += "^" + std::to_string(exps[i]);
    }
  }
  return out.empty() ? "1" : out;
}

std::string Polynomial::to_string(std::span<const std::string> names, CoefficientStyle coeffs,
                                  PowerStyle powers) const {
  if (names.size() < arity_) throw std::invalid_argument("not enough symbol names");
  if (terms_.empty()) return "0";
  std::vector<std::pair<Exponents, Rational>> ordered(terms_.begin(), terms_.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return print_order_less(a.first, b.first); });
  std::string out;
  bool first = true;
  for (const auto& [e, c] : ordered) {
    bool negative = c < 0;
    Rational mag = negative ? Rational(-c) : c;
    std::string coeff = coeffs == CoefficientStyle::Exact ? to_exact_string(mag)
                                                          : to_decimal_string(mag, 6, -1);
    bool unit = total(e) == 0;
    if (first) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    first = false;
    if (unit) {
      out += coeff;
    } else {
      if (mag != 1) out += coeff + "*";
      out += monomial_string(e, names, powers);
    }
  }
  return out;
}

namespace {

class PolyParser {
 public:
  PolyParser(std::string_view text, std::span<const std::string> names)
      : text_(text), names_(names) {}

  Polynomial parse() {
    Polynomial p = sum();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& why) {
    throw std::invalid_argument("cannot parse polynomial '" + std::string(text_) + "': " + why);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial sum() {
    Polynomial acc(names_.size());
    bool negate = false;
    if (eat('-')) negate = true;
    else eat('+');
    Polynomial t = product();
    acc += negate ? -t : t;
    while (true) {
      if (eat('+')) acc += product();
      else if (eat('-')) acc -= product();
      else break;
    }
    return acc;
  }

  Polynomial product() {
    Polynomial acc = power();
    while (eat('*')) acc = acc * power();
    return acc;
  }

  Polynomial power() {
    Polynomial base = atom();
    if (eat('^')) {
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected exponent");
      base = base.pow(static_cast<unsigned>(std::stoul(std::string(text_.substr(start, pos_ - start)))));
    }
    return base;
  }

  Polynomial atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Polynomial inner = sum();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    if (c == '-') {
      ++pos_;
      return -atom();
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < text_.size()) {
        char d = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(d)) || d == '.' || d == '/') {
          ++pos_;
        } else if ((d == 'e' || d == 'E') && pos_ + 1 < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) || text_[pos_ + 1] == '-')) {
          pos_ += 2;
        } else {
          break;
        }
      }
      return Polynomial::constant(names_.size(), parse_rational(text_.substr(start, pos_ - start)));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      std::string_view id = text_.substr(start, pos_ - start);
      for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == id) return Polynomial::symbol(names_.size(), i);
      }
      fail("unknown symbol '" + std::string(id) + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  std::span<const std::string> names_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial parse_polynomial(std::string_view text, std::span<const std::string> names) {
  return PolyParser(text, names).parse();
}

}  // namespace pilat
