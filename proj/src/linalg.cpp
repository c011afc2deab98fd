#include "pilat/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pilat/error.hpp"

namespace pilat {

RationalMatrix::RationalMatrix(std::initializer_list<std::initializer_list<Rational>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

RationalMatrix RationalMatrix::identity(std::size_t n) {
  RationalMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

RationalMatrix RationalMatrix::transpose() const {
  RationalMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.cols_ != b.rows_) throw Error(ErrorKind::DimensionMismatch, "matrix product shape mismatch");
  RationalMatrix r(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Rational& aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

RationalMatrix operator-(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
    throw Error(ErrorKind::DimensionMismatch, "matrix difference shape mismatch");
  RationalMatrix r = a;
  for (std::size_t i = 0; i < r.data_.size(); ++i) r.data_[i] -= b.data_[i];
  return r;
}

RationalMatrix operator+(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
    throw Error(ErrorKind::DimensionMismatch, "matrix sum shape mismatch");
  RationalMatrix r = a;
  for (std::size_t i = 0; i < r.data_.size(); ++i) r.data_[i] += b.data_[i];
  return r;
}

RationalMatrix operator*(const Rational& s, const RationalMatrix& a) {
  RationalMatrix r = a;
  for (auto& v : r.data_) v *= s;
  return r;
}

RowVector RationalMatrix::left_multiply(std::span<const Rational> v) const {
  if (v.size() != rows_) throw Error(ErrorKind::DimensionMismatch, "row vector length mismatch");
  RowVector out(cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    if (v[i] == 0) continue;
    for (std::size_t j = 0; j < cols_; ++j) out[j] += v[i] * (*this)(i, j);
  }
  return out;
}

RowVector RationalMatrix::right_multiply(std::span<const Rational> v) const {
  if (v.size() != cols_) throw Error(ErrorKind::DimensionMismatch, "column vector length mismatch");
  RowVector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out[i] += (*this)(i, j) * v[j];
  return out;
}

// ---------------------------------------------------------------------------
// UniPoly

UniPoly::UniPoly(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

UniPoly UniPoly::monomial(std::size_t degree, const Rational& c) {
  std::vector<Rational> v(degree + 1);
  v[degree] = c;
  return UniPoly(std::move(v));
}

void UniPoly::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

Rational UniPoly::evaluate(const Rational& x) const {
  Rational acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

UniPoly UniPoly::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<Rational> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<unsigned long>(i);
  return UniPoly(std::move(d));
}

UniPoly UniPoly::primitive() const {
  if (coeffs_.empty()) return {};
  Integer den_lcm = 1;
  for (const auto& c : coeffs_) mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.get_den_mpz_t());
  std::vector<Integer> ints;
  ints.reserve(coeffs_.size());
  Integer g = 0;
  for (const auto& c : coeffs_) {
    Integer v = c.get_num() * (den_lcm / c.get_den());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
    ints.push_back(std::move(v));
  }
  std::vector<Rational> out;
  out.reserve(ints.size());
  for (auto& v : ints) out.emplace_back(v / g);
  return UniPoly(std::move(out));
}

UniPoly operator+(const UniPoly& a, const UniPoly& b) {
  std::vector<Rational> v(std::max(a.coeffs_.size(), b.coeffs_.size()));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.coeff(i) + b.coeff(i);
  return UniPoly(std::move(v));
}

UniPoly operator-(const UniPoly& a, const UniPoly& b) {
  std::vector<Rational> v(std::max(a.coeffs_.size(), b.coeffs_.size()));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.coeff(i) - b.coeff(i);
  return UniPoly(std::move(v));
}

UniPoly operator*(const UniPoly& a, const UniPoly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<Rational> v(a.coeffs_.size() + b.coeffs_.size() - 1);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) v[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return UniPoly(std::move(v));
}

UniPoly operator*(const Rational& s, const UniPoly& a) {
  std::vector<Rational> v = a.coeffs_;
  for (auto& c : v) c *= s;
  return UniPoly(std::move(v));
}

void UniPoly::divmod(const UniPoly& a, const UniPoly& b, UniPoly& quotient, UniPoly& remainder) {
  if (b.is_zero()) throw std::domain_error("polynomial division by zero");
  std::vector<Rational> rem = a.coeffs_;
  int db = b.degree();
  std::vector<Rational> quo(a.degree() >= db ? static_cast<std::size_t>(a.degree() - db + 1) : 0);
  const Rational& lead = b.coeffs_.back();
  for (int k = a.degree(); k >= db; --k) {
    Rational f = rem[static_cast<std::size_t>(k)] / lead;
    quo[static_cast<std::size_t>(k - db)] = f;
    if (f == 0) continue;
    for (int j = 0; j <= db; ++j) rem[static_cast<std::size_t>(k - db + j)] -= f * b.coeffs_[static_cast<std::size_t>(j)];
  }
  quotient = UniPoly(std::move(quo));
  remainder = UniPoly(std::move(rem));
}

UniPoly UniPoly::gcd(UniPoly a, UniPoly b) {
  while (!b.is_zero()) {
    UniPoly q, r;
    divmod(a, b, q, r);
    a = std::move(b);
    b = r.primitive();
  }
  if (a.is_zero()) return a;
  return (1 / a.leading()) * a;
}

std::string UniPoly::to_string(const std::string& var) const {
  if (coeffs_.empty()) return "0";
  std::string out;
  for (int i = degree(); i >= 0; --i) {
    const Rational& c = coeffs_[static_cast<std::size_t>(i)];
    if (c == 0) continue;
    Rational mag = abs(c);
    if (!out.empty()) out += c < 0 ? " - " : " + ";
    else if (c < 0) out += "-";
    std::string mono = i == 0 ? "" : (i == 1 ? var : var + "^" + std::to_string(i));
    if (mono.empty()) out += to_fraction_string(mag);
    else if (mag == 1) out += mono;
    else out += to_fraction_string(mag) + "*" + mono;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Characteristic polynomial

UniPoly char_poly(const RationalMatrix& a) {
  if (!a.square()) throw Error(ErrorKind::DimensionMismatch, "char_poly needs a square matrix");
  const std::size_t n = a.rows();
  RationalMatrix h = a;
  // Similarity reduction to upper Hessenberg form.
  for (std::size_t j = 0; j + 2 < n; ++j) {
    std::size_t pivot = n;
    for (std::size_t i = j + 1; i < n; ++i) {
      if (h(i, j) != 0) {
        pivot = i;
        break;
      }
    }
    if (pivot == n) continue;
    const std::size_t p = j + 1;
    if (pivot != p) {
      for (std::size_t c = 0; c < n; ++c) std::swap(h(pivot, c), h(p, c));
      for (std::size_t r = 0; r < n; ++r) std::swap(h(r, pivot), h(r, p));
    }
    for (std::size_t r = p + 1; r < n; ++r) {
      if (h(r, j) == 0) continue;
      Rational u = h(r, j) / h(p, j);
      for (std::size_t c = 0; c < n; ++c) h(r, c) -= u * h(p, c);
      for (std::size_t rr = 0; rr < n; ++rr) h(rr, p) += u * h(rr, r);
    }
  }
  // Recurrence on leading principal submatrices.
  std::vector<UniPoly> p(n + 1);
  p[0] = UniPoly({Rational(1)});
  const UniPoly t = UniPoly::monomial(1);
  for (std::size_t m = 1; m <= n; ++m) {
    p[m] = (t - UniPoly({h(m - 1, m - 1)})) * p[m - 1];
    Rational prod = 1;
    for (std::size_t i = m - 1; i >= 1; --i) {
      prod *= h(i, i - 1);
      if (prod == 0) break;
      Rational f = h(i - 1, m - 1) * prod;
      if (f != 0) p[m] = p[m] - f * p[i - 1];
    }
  }
  return p[n];
}

// ---------------------------------------------------------------------------
// Rational roots: real-root isolation by Sturm sequences, then a lattice
// test. Every rational root of a primitive integer polynomial with leading
// coefficient a_n lies on the grid (1/|a_n|)·Z.

namespace {

int sign_variations(const std::vector<UniPoly>& chain, const Rational& x) {
  int variations = 0;
  int last = 0;
  for (const auto& q : chain) {
    int s = q.sign_at(x);
    if (s == 0) continue;
    if (last != 0 && s != last) ++variations;
    last = s;
  }
  return variations;
}

std::vector<UniPoly> sturm_chain(const UniPoly& f) {
  std::vector<UniPoly> chain{f, f.derivative().primitive()};
  while (chain.back().degree() > 0) {
    UniPoly q, r;
    UniPoly::divmod(chain[chain.size() - 2], chain.back(), q, r);
    if (r.is_zero()) break;
    chain.push_back((Rational(-1) * r).primitive());
  }
  return chain;
}

// Exactly one root of squarefree f in (lo, hi]; returns it when rational.
std::optional<Rational> rational_root_in(const UniPoly& f, Rational lo, Rational hi,
                                         const Integer& grid) {
  if (f.sign_at(hi) == 0) return hi;
  int s_hi = f.sign_at(hi);
  const Rational width_goal(Integer(1), grid);
  while (hi - lo >= width_goal) {
    Rational mid = (lo + hi) / 2;
    int s = f.sign_at(mid);
    if (s == 0) return mid;
    if (s == s_hi) hi = mid;
    else lo = mid;
  }
  // At most one grid point j/grid in (lo, hi].
  Rational scaled = hi * grid;
  Integer j;
  mpz_fdiv_q(j.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  Rational candidate(j, grid);
  candidate.canonicalize();
  if (candidate > lo && candidate <= hi && f.evaluate(candidate) == 0) return candidate;
  return std::nullopt;
}

}  // namespace

std::vector<Rational> rational_roots(const UniPoly& p) {
  std::vector<Rational> roots;
  if (p.degree() <= 0) return roots;
  std::vector<Rational> c = p.coeffs();
  if (c[0] == 0) {
    roots.emplace_back(0);
    std::size_t shift = 0;
    while (c[shift] == 0) ++shift;
    c.erase(c.begin(), c.begin() + static_cast<long>(shift));
  }
  UniPoly f(std::move(c));
  if (f.degree() >= 1) {
    UniPoly g = UniPoly::gcd(f, f.derivative());
    UniPoly q, r;
    UniPoly::divmod(f, g, q, r);
    f = q.primitive();
  }
  if (f.degree() >= 1) {
    Integer grid = abs(f.leading()).get_num();
    // Cauchy bound.
    Rational bound = 0;
    for (int i = 0; i < f.degree(); ++i) bound = std::max<Rational>(bound, abs(f.coeff(static_cast<std::size_t>(i)) / f.leading()));
    bound += 1;
    std::vector<UniPoly> chain = sturm_chain(f);
    struct Range {
      Rational lo, hi;
      int v_lo, v_hi;
    };
    std::vector<Range> work{{-bound, bound, sign_variations(chain, -bound), sign_variations(chain, bound)}};
    while (!work.empty()) {
      Range range = work.back();
      work.pop_back();
      int count = range.v_lo - range.v_hi;
      if (count <= 0) continue;
      if (count == 1) {
        if (auto root = rational_root_in(f, range.lo, range.hi, grid)) roots.push_back(*root);
        continue;
      }
      Rational mid = (range.lo + range.hi) / 2;
      int v_mid = sign_variations(chain, mid);
      work.push_back({range.lo, mid, range.v_lo, v_mid});
      work.push_back({mid, range.hi, v_mid, range.v_hi});
    }
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots;
}

namespace {

// Strongly connected components of the graph i -> j for a(i, j) != 0. A
// simultaneous permutation makes the matrix block triangular with these
// components as diagonal blocks.
std::vector<std::vector<std::size_t>> diagonal_blocks(const RationalMatrix& a) {
  const std::size_t n = a.rows();
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> blocks;
  int counter = 0;
  // Iterative Tarjan: (vertex, next column to scan).
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<std::pair<std::size_t, std::size_t>> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, next] = call.back();
      bool descended = false;
      while (next < n) {
        std::size_t u = next++;
        if (u == v || a(v, u) == 0) continue;
        if (index[u] < 0) {
          index[u] = low[u] = counter++;
          stack.push_back(u);
          on_stack[u] = true;
          call.push_back({u, 0});
          descended = true;
          break;
        }
        if (on_stack[u]) low[v] = std::min(low[v], index[u]);
      }
      if (descended) continue;
      const std::size_t done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<std::size_t> block;
        while (true) {
          std::size_t w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          block.push_back(w);
          if (w == done) break;
        }
        std::sort(block.begin(), block.end());
        blocks.push_back(std::move(block));
      }
    }
  }
  return blocks;
}

}  // namespace

std::vector<Rational> rational_eigenvalues(const RationalMatrix& a) {
  if (!a.square()) throw Error(ErrorKind::DimensionMismatch, "eigenvalues need a square matrix");
  std::vector<Rational> out;
  for (const auto& block : diagonal_blocks(a)) {
    RationalMatrix sub(block.size(), block.size());
    for (std::size_t i = 0; i < block.size(); ++i)
      for (std::size_t j = 0; j < block.size(); ++j) sub(i, j) = a(block[i], block[j]);
    for (const Rational& r : rational_roots(char_poly(sub))) out.push_back(r);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Kernels

namespace {

// Reduced row echelon form in place; returns pivot columns.
std::vector<std::size_t> rref(RationalMatrix& m) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
    std::size_t sel = m.rows();
    for (std::size_t r = row; r < m.rows(); ++r) {
      if (m(r, col) != 0) {
        sel = r;
        break;
      }
    }
    if (sel == m.rows()) continue;
    if (sel != row)
      for (std::size_t c = 0; c < m.cols(); ++c) std::swap(m(sel, c), m(row, c));
    Rational inv = 1 / m(row, col);
    for (std::size_t c = col; c < m.cols(); ++c) m(row, c) *= inv;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (r == row || m(r, col) == 0) continue;
      Rational f = m(r, col);
      for (std::size_t c = col; c < m.cols(); ++c) m(r, c) -= f * m(row, c);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

}  // namespace

std::vector<RowVector> kernel_basis(const RationalMatrix& a) {
  RationalMatrix m = a;
  std::vector<std::size_t> pivots = rref(m);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto p : pivots) is_pivot[p] = true;
  std::vector<RowVector> basis;
  for (std::size_t free = 0; free < m.cols(); ++free) {
    if (is_pivot[free]) continue;
    RowVector v(m.cols());
    v[free] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -m(r, free);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::size_t rank(const RationalMatrix& a) {
  RationalMatrix m = a;
  return rref(m).size();
}

RowVector normalize_first_nonzero(RowVector v) {
  auto it = std::find_if(v.begin(), v.end(), [](const Rational& x) { return x != 0; });
  if (it == v.end()) return v;
  Rational s = 1 / *it;
  for (auto& x : v) x *= s;
  return v;
}

std::vector<Eigenpair> left_eigenpairs(const RationalMatrix& a) {
  std::vector<Eigenpair> pairs;
  const RationalMatrix at = a.transpose();
  const RationalMatrix id = RationalMatrix::identity(a.rows());
  for (const Rational& lambda : rational_eigenvalues(a)) {
    if (lambda == 0) continue;
    std::vector<RowVector> space = kernel_basis(at - lambda * id);
    if (space.empty()) continue;
    for (auto& v : space) v = normalize_first_nonzero(std::move(v));
    pairs.push_back({lambda, std::move(space)});
  }
  return pairs;
}

std::vector<ApproxEigenpair> approximate_left_eigenpairs(const RationalMatrix& a,
                                                         std::span<const Rational> exact) {
  const auto n = static_cast<Eigen::Index>(a.rows());
  Eigen::MatrixXd at(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) at(i, j) = a(static_cast<std::size_t>(j), static_cast<std::size_t>(i)).get_d();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(at, true);
  std::vector<ApproxEigenpair> out;
  if (solver.info() != Eigen::Success) return out;
  const auto values = solver.eigenvalues();
  const auto vectors = solver.eigenvectors();
  for (Eigen::Index k = 0; k < n; ++k) {
    double re = values(k).real();
    double im = values(k).imag();
    if (std::abs(re) < 1e-12 && std::abs(im) < 1e-12) continue;
    bool known = std::abs(im) < 1e-9 && std::any_of(exact.begin(), exact.end(), [&](const Rational& q) {
                   return std::abs(q.get_d() - re) <= 1e-9 * std::max(1.0, std::abs(re));
                 });
    if (known) continue;
    if (im < -1e-9) continue;  // report each conjugate pair once
    ApproxEigenpair pair{re, std::abs(im) < 1e-9 ? 0.0 : im, {}};
    if (pair.imag == 0.0) {
      std::vector<double> v(static_cast<std::size_t>(n));
      double scale = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = vectors(i, k).real();
        if (scale == 0 && std::abs(v[static_cast<std::size_t>(i)]) > 1e-12) scale = v[static_cast<std::size_t>(i)];
      }
      if (scale != 0)
        for (auto& x : v) x /= scale;
      pair.left_vector = std::move(v);
    }
    out.push_back(std::move(pair));
  }
  return out;
}

}  // namespace pilat
