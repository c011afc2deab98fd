#include <gtest/gtest.h>

#include <random>
#include <set>

#include "pilat/linalg.hpp"
#include "support.hpp"

namespace pilat {
namespace {

using test::char_poly_at;

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

RationalMatrix fig6_block() { return {{q(9, 4), q(-21, 10), q(49, 100)}, {q(3, 2), q(-7, 10), 0}, {1, 0, 0}}; }

RationalMatrix random_matrix(std::mt19937_64& rng, std::size_t n, long span, long den) {
  RationalMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = test::random_rational(rng, span, den);
  return a;
}

RationalMatrix inverse(const RationalMatrix& a) {
  const std::size_t n = a.rows();
  RationalMatrix m = a, inv = RationalMatrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (m(p, c) == 0) ++p;
    for (std::size_t j = 0; j < n; ++j) {
      std::swap(m(p, j), m(c, j));
      std::swap(inv(p, j), inv(c, j));
    }
    Rational s = m(c, c);
    for (std::size_t j = 0; j < n; ++j) {
      m(c, j) /= s;
      inv(c, j) /= s;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m(r, c) == 0) continue;
      Rational f = m(r, c);
      for (std::size_t j = 0; j < n; ++j) {
        m(r, j) -= f * m(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

TEST(CharPoly, IdentityIsCubeOfLinearFactor) {
  UniPoly p = char_poly(RationalMatrix::identity(3));
  EXPECT_EQ(p, UniPoly({-1, 3, -3, 1}));
}

TEST(CharPoly, RotationContraction) {
  RationalMatrix a{{q(17, 25), q(-17, 25)}, {q(17, 25), q(17, 25)}};
  EXPECT_EQ(char_poly(a), UniPoly({q(578, 625), q(-34, 25), 1}));
}

TEST(CharPoly, FilterBlockMatchesCofactorOracle) {
  RationalMatrix a = fig6_block();
  UniPoly p = char_poly(a);
  ASSERT_EQ(p.degree(), 3);
  for (long t = -4; t <= 4; ++t) EXPECT_EQ(p.evaluate(q(t, 3)), char_poly_at(a, q(t, 3)));
  // Eigenvalues are the products of the roots of t^2 - 3/2 t + 7/10.
  EXPECT_EQ(p, UniPoly({q(-343, 1000), q(217, 200), q(-31, 20), 1}));
  EXPECT_EQ(p.evaluate(q(7, 10)), 0);
}

TEST(CharPoly, RandomMatricesMatchCofactorOracle) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 5);
    RationalMatrix a = random_matrix(rng, n, 6, 4);
    UniPoly p = char_poly(a);
    ASSERT_EQ(p.degree(), static_cast<int>(n));
    EXPECT_EQ(p.leading(), 1);
    // n + 1 evaluations pin a degree-n polynomial.
    for (std::size_t k = 0; k <= n; ++k) {
      Rational t = test::random_rational(rng, 5, 3);
      EXPECT_EQ(p.evaluate(t), char_poly_at(a, t));
    }
  }
}

TEST(CharPoly, SparseMatricesWithZeroPivots) {
  RationalMatrix a{{0, 0, 1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}, {0, 2, 0, 0}};
  UniPoly p = char_poly(a);
  for (long t = -3; t <= 3; ++t) EXPECT_EQ(p.evaluate(t), char_poly_at(a, t));
}

TEST(RationalRoots, PlantedRootsAreRecovered) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Rational> roots;
    UniPoly p({1});
    for (int i = 0; i < 4; ++i) {
      Rational r = test::random_rational(rng, 12, 7);
      roots.push_back(r);
      p = p * UniPoly({-r, 1});
    }
    p = p * UniPoly({1, 0, 1});  // irreducible factor without real roots
    std::set<Rational> expect(roots.begin(), roots.end());
    std::vector<Rational> got = rational_roots(p);
    EXPECT_EQ(std::set<Rational>(got.begin(), got.end()), expect);
  }
}

TEST(RationalRoots, IrrationalRootsAreIgnored) {
  EXPECT_TRUE(rational_roots(UniPoly({-2, 0, 1})).empty());
  EXPECT_EQ(rational_roots(UniPoly({0, -2, 0, 1})), std::vector<Rational>{0});
}

// Oracle: every rational root of a monic integer polynomial is an integer
// dividing the constant term; enumerate the divisors.
std::set<Rational> divisor_oracle(const RationalMatrix& a) {
  std::set<Rational> out;
  const long c0 = test::char_poly_at(a, 0).get_num().get_si();
  if (c0 == 0) out.insert(0);
  const long m = std::labs(c0 == 0 ? 0 : c0);
  auto check = [&](long d) {
    if (test::char_poly_at(a, d) == 0) out.insert(d);
  };
  if (c0 == 0) {
    for (long d = -60; d <= 60; ++d) check(d);
  } else {
    for (long d = 1; d <= m; ++d)
      if (m % d == 0) {
        check(d);
        check(-d);
      }
  }
  return out;
}

TEST(RationalEigenvalues, IntegerMatricesMatchDivisorOracle) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<long> e(-4, 4);
  for (int trial = 0; trial < 60; ++trial) {
    RationalMatrix a(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) a(i, j) = e(rng);
    std::vector<Rational> got = rational_eigenvalues(a);
    EXPECT_EQ(std::set<Rational>(got.begin(), got.end()), divisor_oracle(a)) << "trial " << trial;
  }
}

TEST(RationalEigenvalues, PlantedSimilarityTransforms) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<long> e(-3, 3);
  for (int trial = 0; trial < 40; ++trial) {
    RationalMatrix t(3, 3), l = RationalMatrix::identity(3);
    std::set<Rational> planted;
    for (std::size_t i = 0; i < 3; ++i) {
      t(i, i) = test::random_rational(rng, 9, 5);
      planted.insert(t(i, i));
      for (std::size_t j = i + 1; j < 3; ++j) t(i, j) = e(rng);
      for (std::size_t j = 0; j < i; ++j) l(i, j) = e(rng);
    }
    RationalMatrix a = l * t * inverse(l);
    std::vector<Rational> got = rational_eigenvalues(a);
    EXPECT_EQ(std::set<Rational>(got.begin(), got.end()), planted);
  }
}

TEST(RationalEigenvalues, BlockTriangularAgreesWithWholePolynomial) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    RationalMatrix a(6, 6);
    // Two coupled 3x3 diagonal blocks and a random upper coupling.
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j)
        if ((i < 3) == (j < 3) || (i < 3 && j >= 3)) a(i, j) = test::random_rational(rng, 4, 2);
    std::vector<Rational> got = rational_eigenvalues(a);
    EXPECT_EQ(got, rational_roots(char_poly(a)));
  }
}

TEST(Kernel, ZeroMatrixHasFullKernel) { EXPECT_EQ(kernel_basis(RationalMatrix(2, 2)).size(), 2u); }

TEST(Kernel, VectorsAreIndependentAndAnnihilated) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    // Rank-deficient product of a 5x2 and a 2x5 factor.
    RationalMatrix u = random_matrix(rng, 5, 5, 3), v = random_matrix(rng, 5, 5, 3);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 2; j < 5; ++j) {
        u(i, j) = 0;
        v(j, i) = 0;
      }
    RationalMatrix a = u * v;
    auto ker = kernel_basis(a);
    EXPECT_EQ(ker.size() + rank(a), 5u);
    for (const auto& x : ker) EXPECT_EQ(a.right_multiply(x), RowVector(5, 0));
    RationalMatrix stack(ker.size(), 5);
    for (std::size_t i = 0; i < ker.size(); ++i)
      for (std::size_t j = 0; j < 5; ++j) stack(i, j) = ker[i][j];
    EXPECT_EQ(rank(stack), ker.size());
  }
}

TEST(Kernel, TranslationFixesOnlyTheUnit) {
  // x -> x + 1 over (x, 1): rows are images of x and of 1.
  RationalMatrix a{{1, 1}, {0, 1}};
  auto ker = kernel_basis(a.transpose() - RationalMatrix::identity(2));
  ASSERT_EQ(ker.size(), 1u);
  EXPECT_EQ(normalize_first_nonzero(ker[0]), (RowVector{0, 1}));
}

TEST(LeftEigenpairs, IdentityGivesFullSpace) {
  auto pairs = left_eigenpairs(RationalMatrix::identity(3));
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].value, 1);
  EXPECT_EQ(pairs[0].left_space.size(), 3u);
}

TEST(LeftEigenpairs, FilterBlockEigenvector) {
  bool found = false;
  for (const auto& ep : left_eigenpairs(fig6_block())) {
    if (ep.value != q(7, 10)) continue;
    ASSERT_EQ(ep.left_space.size(), 1u);
    EXPECT_EQ(ep.left_space[0], (RowVector{1, q(-3, 2), q(7, 10)}));
    found = true;
  }
  EXPECT_TRUE(found);
}

TEST(LeftEigenpairs, ResidualIsExactlyZero) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    RationalMatrix t(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = i; j < 4; ++j) t(i, j) = test::random_rational(rng, 3, 2);
    t(3, 3) = t(0, 0);  // repeated eigenvalue
    for (const auto& ep : left_eigenpairs(t)) {
      EXPECT_NE(ep.value, 0);
      EXPECT_EQ(char_poly(t).evaluate(ep.value), 0);
      ASSERT_FALSE(ep.left_space.empty());
      for (const auto& phi : ep.left_space) {
        RowVector lhs = t.left_multiply(phi);
        for (std::size_t i = 0; i < phi.size(); ++i) EXPECT_EQ(lhs[i], ep.value * phi[i]);
      }
    }
  }
}

TEST(ApproximateEigenpairs, ReportsOnlyNonRationalEigenvalues) {
  RationalMatrix a{{0, 2, 0}, {1, 0, 0}, {0, 0, q(1, 2)}};
  auto exact = rational_eigenvalues(a);
  EXPECT_EQ(exact, std::vector<Rational>{q(1, 2)});
  auto approx = approximate_left_eigenpairs(a, exact);
  ASSERT_EQ(approx.size(), 2u);
  for (const auto& e : approx) EXPECT_NEAR(std::abs(e.real), std::sqrt(2.0), 1e-9);
}

}  // namespace
}  // namespace pilat
