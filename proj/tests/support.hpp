#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pilat/linalg.hpp"
#include "pilat/rational.hpp"

namespace pilat::test {

inline std::filesystem::path corpus_dir() { return PILAT_CORPUS_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string corpus_source(const std::string& name) { return read_file(corpus_dir() / name); }

inline std::vector<std::filesystem::path> corpus_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(corpus_dir()))
    if (e.path().extension() == ".loop") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

/// The N of a leading "// expect-exit: N" line, or -1.
inline int expected_exit(const std::string& source) {
  const std::string tag = "// expect-exit:";
  if (source.rfind(tag, 0) != 0) return -1;
  return std::stoi(source.substr(tag.size()));
}

/// Random rational with numerator in [-span, span] and denominator in [1, den].
inline Rational random_rational(std::mt19937_64& rng, long span = 20, long den = 9) {
  std::uniform_int_distribution<long> num(-span, span), d(1, den);
  Rational q(num(rng), d(rng));
  q.canonicalize();
  return q;
}

/// Uniform rational in [lo, hi] on a grid of 1/1024 of the width.
inline Rational random_in(std::mt19937_64& rng, const Rational& lo, const Rational& hi) {
  std::uniform_int_distribution<long> step(0, 1024);
  Rational t(step(rng), 1024);
  t.canonicalize();
  return lo + (hi - lo) * t;
}

/// det(A) by cofactor expansion along the first row.
inline Rational cofactor_det(const std::vector<std::vector<Rational>>& a) {
  const std::size_t n = a.size();
  if (n == 0) return 1;
  if (n == 1) return a[0][0];
  Rational det = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (a[0][j] == 0) continue;
    std::vector<std::vector<Rational>> minor;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<Rational> row;
      for (std::size_t c = 0; c < n; ++c)
        if (c != j) row.push_back(a[i][c]);
      minor.push_back(std::move(row));
    }
    Rational term = a[0][j] * cofactor_det(minor);
    det += (j % 2 == 0) ? term : Rational(-term);
  }
  return det;
}

/// det(t·Id - A) at a rational point t.
inline Rational char_poly_at(const RationalMatrix& a, const Rational& t) {
  std::vector<std::vector<Rational>> m(a.rows(), std::vector<Rational>(a.cols()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m[i][j] = (i == j ? t : Rational(0)) - a(i, j);
  return cofactor_det(m);
}

}  // namespace pilat::test
