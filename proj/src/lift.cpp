#include "pilat/lift.hpp"

#include <json.hpp>

#include <functional>
#include <numeric>

#include "pilat/error.hpp"

namespace pilat {

MonomialBasis::MonomialBasis(std::vector<std::string> vars, std::vector<Exponents> monomials)
    : vars_(std::move(vars)), monomials_(std::move(monomials)) {
  for (std::size_t i = 0; i < monomials_.size(); ++i) {
    if (monomials_[i].size() != vars_.size()) throw std::invalid_argument("monomial arity mismatch");
    index_.emplace(monomials_[i], i);
  }
}

int MonomialBasis::degree() const {
  int d = 0;
  for (const auto& m : monomials_) d = std::max(d, static_cast<int>(std::accumulate(m.begin(), m.end(), 0u)));
  return d;
}

std::size_t MonomialBasis::index_of(const Exponents& e) const {
  auto it = index_.find(e);
  return it == index_.end() ? monomials_.size() : it->second;
}

std::string MonomialBasis::name(std::size_t i, Polynomial::PowerStyle style) const {
  return monomial_string(monomials_.at(i), vars_, style);
}

std::vector<Rational> MonomialBasis::lift_state(std::span<const Rational> state) const {
  if (state.size() != vars_.size()) throw Error(ErrorKind::DimensionMismatch, "state length mismatch");
  std::vector<Rational> out;
  out.reserve(monomials_.size());
  for (const auto& m : monomials_) {
    Rational v = 1;
    for (std::size_t i = 0; i < m.size(); ++i)
      for (unsigned k = 0; k < m[i]; ++k) v *= state[i];
    out.push_back(std::move(v));
  }
  return out;
}

Polynomial MonomialBasis::covector_polynomial(std::span<const Rational> phi) const {
  if (phi.size() != monomials_.size()) throw Error(ErrorKind::DimensionMismatch, "covector length mismatch");
  Polynomial p(vars_.size());
  for (std::size_t i = 0; i < phi.size(); ++i) p.add_term(monomials_[i], phi[i]);
  return p;
}

MonomialBasis monomial_basis(const std::vector<std::string>& vars, int degree, std::size_t cap) {
  if (degree < 1) throw Error(ErrorKind::Precondition, "monomial degree must be at least 1");
  const std::size_t n = vars.size();
  Integer count;
  mpz_bin_uiui(count.get_mpz_t(), n + static_cast<unsigned long>(degree), static_cast<unsigned long>(degree));
  if (count > cap)
    throw Error(ErrorKind::DimensionTooLarge, "monomial basis of dimension " + count.get_str() +
                                                  " exceeds the cap of " + std::to_string(cap));
  std::vector<Exponents> monos;
  Exponents e(n, 0);
  // Lex-descending enumeration of exponent vectors with a fixed total.
  std::function<void(std::size_t, unsigned)> fill = [&](std::size_t pos, unsigned left) {
    if (pos + 1 >= n) {
      if (n > 0) e[n - 1] = left;
      if (n > 0 || left == 0) monos.push_back(e);
      return;
    }
    for (unsigned k = left + 1; k-- > 0;) {
      e[pos] = k;
      fill(pos + 1, left - k);
    }
    e[pos] = 0;
  };
  for (int d = 0; d <= degree; ++d) {
    if (n == 0 && d > 0) break;
    fill(0, static_cast<unsigned>(d));
  }
  return MonomialBasis(vars, std::move(monos));
}

AbstractMatrix::AbstractMatrix(MonomialBasis basis, std::vector<ParamDecl> params, std::vector<Polynomial> entries)
    : basis_(std::move(basis)), params_(std::move(params)), entries_(std::move(entries)) {
  if (entries_.size() != basis_.size() * basis_.size())
    throw Error(ErrorKind::DimensionMismatch, "abstract matrix entry count mismatch");
}

bool AbstractMatrix::parameter_free() const {
  for (const auto& e : entries_)
    if (!e.is_constant()) return false;
  return true;
}

std::vector<std::string> AbstractMatrix::param_names() const {
  std::vector<std::string> names;
  for (const auto& p : params_) names.push_back(p.name);
  return names;
}

RationalMatrix AbstractMatrix::instantiate(std::span<const Rational> values) const {
  if (values.size() != params_.size()) throw Error(ErrorKind::DimensionMismatch, "parameter tuple length mismatch");
  const std::size_t n = dim();
  RationalMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = at(i, j).evaluate(values);
  return m;
}

AbstractMatrix lift_to_abstract_matrix(const SimultaneousMap& map, const SolvablePartition& partition, int degree,
                                       std::size_t cap) {
  std::size_t covered = 0;
  for (const auto& b : partition.blocks) covered += b.size();
  if (covered != map.vars.size())
    throw Error(ErrorKind::Precondition, "solvable partition does not cover the program variables");
  MonomialBasis basis = monomial_basis(map.vars, degree, cap);
  const std::size_t n = basis.size();
  const std::size_t nv = map.vars.size();
  const std::size_t np = map.params.size();
  std::vector<Polynomial> entries(n * n, Polynomial(np));
  std::vector<std::vector<Polynomial>> powers(nv);
  for (std::size_t row = 0; row < n; ++row) {
    const Exponents& m = basis.monomials()[row];
    Polynomial image = Polynomial::constant(nv + np, 1);
    for (std::size_t v = 0; v < nv; ++v) {
      if (m[v] == 0) continue;
      auto& cache = powers[v];
      if (cache.empty()) cache.push_back(Polynomial::constant(nv + np, 1));
      while (cache.size() <= m[v]) cache.push_back(cache.back() * map.updates[v]);
      image = image * cache[m[v]];
    }
    for (auto& [var_part, coeff] : image.split_leading(nv)) {
      std::size_t col = basis.index_of(var_part);
      if (col == n)
        throw Error(ErrorKind::DegreeOverflow, "image of monomial " + basis.name(row) + " contains " +
                                                   monomial_string(var_part, map.vars) + ", beyond degree " +
                                                   std::to_string(degree));
      entries[row * n + col] = std::move(coeff);
    }
  }
  return AbstractMatrix(std::move(basis), map.params, std::move(entries));
}

RationalMatrix instantiate_at_zero(const AbstractMatrix& a) {
  std::vector<Rational> zeros(a.params().size());
  return a.instantiate(zeros);
}

std::vector<Polynomial> noise_covector(std::span<const Rational> e, const AbstractMatrix& a) {
  const std::size_t n = a.dim();
  if (e.size() != n) throw Error(ErrorKind::DimensionMismatch, "covector length does not match the basis");
  const std::size_t np = a.params().size();
  std::vector<Polynomial> delta(n, Polynomial(np));
  for (std::size_t i = 0; i < n; ++i) {
    if (e[i] == 0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      Polynomial noise = a.at(i, j);
      noise.add_term(Exponents(np, 0), -noise.constant_term());
      if (!noise.is_zero()) delta[j] += e[i] * noise;
    }
  }
  return delta;
}

Polynomial pair_with_state(std::span<const Polynomial> delta, const AbstractMatrix& a) {
  const auto& basis = a.basis();
  const std::size_t nv = basis.vars().size();
  const std::size_t np = a.params().size();
  if (delta.size() != basis.size()) throw Error(ErrorKind::DimensionMismatch, "covector length does not match the basis");
  Polynomial out(nv + np);
  for (std::size_t j = 0; j < delta.size(); ++j) {
    for (const auto& [pe, c] : delta[j].terms()) {
      Exponents e = basis.monomials()[j];
      e.insert(e.end(), pe.begin(), pe.end());
      out.add_term(e, c);
    }
  }
  return out;
}

std::string to_json(const AbstractMatrix& a) {
  nlohmann::ordered_json j;
  auto& basis = j["basis"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < a.dim(); ++i) basis.push_back(a.basis().name(i));
  auto& vars = j["vars"] = nlohmann::ordered_json::array();
  for (const auto& v : a.basis().vars()) vars.push_back(v);
  auto& params = j["params"] = nlohmann::ordered_json::array();
  for (const auto& p : a.params())
    params.push_back({{"name", p.name}, {"lo", to_fraction_string(p.lower)}, {"hi", to_fraction_string(p.upper)}});
  auto names = a.param_names();
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < a.dim(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < a.dim(); ++c) row.push_back(a.at(r, c).to_string(names));
    rows.push_back(std::move(row));
  }
  return j.dump(2);
}

AbstractMatrix abstract_matrix_from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text);
  std::vector<std::string> vars = j.at("vars").get<std::vector<std::string>>();
  std::vector<Exponents> monos;
  for (const auto& m : j.at("basis")) {
    Polynomial p = parse_polynomial(m.get<std::string>(), vars);
    if (p.terms().size() != 1 || p.terms().begin()->second != 1)
      throw Error(ErrorKind::Syntax, "basis entry is not a monomial: " + m.get<std::string>());
    monos.push_back(p.terms().begin()->first);
  }
  std::vector<ParamDecl> params;
  for (const auto& p : j.at("params"))
    params.push_back({p.at("name").get<std::string>(), parse_rational(p.at("lo").get<std::string>()),
                      parse_rational(p.at("hi").get<std::string>()), ParamOrigin::Declared});
  std::vector<std::string> names;
  for (const auto& p : params) names.push_back(p.name);
  std::vector<Polynomial> entries;
  for (const auto& row : j.at("rows"))
    for (const auto& cell : row) {
      Polynomial p = parse_polynomial(cell.get<std::string>(), names);
      entries.push_back(p.is_zero() ? Polynomial(names.size()) : p);
    }
  return AbstractMatrix(MonomialBasis(std::move(vars), std::move(monos)), std::move(params), std::move(entries));
}

}  // namespace pilat
