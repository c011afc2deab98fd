#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pilat/poly_opt.hpp"
#include "support.hpp"

namespace pilat {
namespace {

const std::vector<std::string> kXYN{"x", "y", "N"};
const std::vector<std::string> kXY{"x", "y"};

Polynomial poly(std::string_view text, const std::vector<std::string>& names) { return parse_polynomial(text, names); }

std::vector<ParamDecl> noise(const Rational& lo, const Rational& hi) { return {ParamDecl{"N", lo, hi}}; }

const Rational kTenth(1, 10);

// Largest k with 0.0752 k <= 0.272 sqrt(k) + 0.02: a quadratic in sqrt(k).
double analytic_min_k(double slack, double a, double b) {
  double r = (a + std::sqrt(a * a + 4 * slack * b)) / (2 * slack);
  return r * r;
}

TEST(MinOracle, NoisyRotationAtReferenceBound) {
  OptProblem prob{2, poly("2.72*x*N + 2*N^2", kXYN), poly("x^2 + y^2", kXY), parse_rational("14.9"),
                  noise(-kTenth, kTenth), std::nullopt};
  OptResult r = min_oracle(prob);
  const double eps = 1e-4;
  // Analytic optimum: 0.272 sqrt(14.9) + 0.02 and its mirror with -0.02.
  const double hi = 0.272 * std::sqrt(14.9) + 0.02, lo = -(0.272 * std::sqrt(14.9) - 0.02);
  EXPECT_GE(to_double(r.max_upper), hi);
  EXPECT_LE(to_double(r.max_upper), 1.0700 + eps);
  EXPECT_GE(to_double(r.max_upper), 1.0699);
  EXPECT_LE(to_double(r.min_lower), lo);
  EXPECT_GE(to_double(r.min_lower), -1.0300 - eps);
  EXPECT_LE(to_double(r.min_lower), -1.0299);
  EXPECT_NEAR(to_double(r.max_inner), hi, eps * std::max(1.0, hi));
  EXPECT_NEAR(to_double(r.min_inner), lo, eps * std::max(1.0, -lo));
}

TEST(MinOracle, DenseGridNeverExceedsOuterBounds) {
  OptProblem prob{2, poly("2.72*x*N + 2*N^2", kXYN), poly("x^2 + y^2", kXY), parse_rational("14.9"),
                  noise(-kTenth, kTenth), std::nullopt};
  OptResult r = min_oracle(prob);
  const double up = to_double(r.max_upper), down = to_double(r.min_lower);
  const double rad = std::sqrt(14.9);
  for (int i = 0; i <= 1000; ++i) {
    const double x = -rad + 2 * rad * i / 1000.0;
    for (int j = 0; j <= 20; ++j) {
      const double n = -0.1 + 0.2 * j / 20.0;
      const double v = 2.72 * x * n + 2 * n * n;
      EXPECT_LE(v, up);
      EXPECT_GE(v, down);
    }
  }
}

TEST(MinOracle, ConstantObjective) {
  OptProblem prob{2, Polynomial::constant(3, 5), poly("x^2 + y^2", kXY), 3, noise(-kTenth, kTenth), std::nullopt};
  OptResult r = min_oracle(prob);
  EXPECT_EQ(r.min_lower, 5);
  EXPECT_EQ(r.max_upper, 5);
}

TEST(MinOracle, BoundAboveK) {
  for (int k : {1, 4, 9}) {
    OptProblem prob{2, poly("x^2 + y^2 + 1", kXYN), poly("x^2 + y^2", kXY), k, noise(-kTenth, kTenth),
                    std::nullopt};
    OptResult r = min_oracle(prob);
    EXPECT_GE(to_double(r.max_upper), k + 1);
    EXPECT_NEAR(to_double(r.max_upper), k + 1, 1e-4 * (k + 1));
    EXPECT_LE(to_double(r.min_lower), 1);
  }
}

TEST(MinOracle, NonCoerciveSublevelIsRejected) {
  OptProblem prob{2, poly("x", kXYN), poly("x*y", kXY), 1, noise(-kTenth, kTenth), std::nullopt};
  try {
    min_oracle(prob);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnboundedSublevel);
  }
}

// Linear objective over an ellipsoid times a box: max c.x = sqrt(k c^T H^-1 c),
// attained; parameter terms contribute sum |b_j| * max|N_j| independently.
TEST(MinOracle, ClosedFormEllipsoidOptima) {
  std::mt19937_64 rng(31);
  const std::vector<std::string> names{"x", "y", "N"};
  for (int trial = 0; trial < 25; ++trial) {
    Rational a = 1 + abs(test::random_rational(rng, 6, 3)), d = 1 + abs(test::random_rational(rng, 6, 3));
    Rational b = test::random_rational(rng, 4, 4) / 4;  // keeps ad - b^2 > 0
    Rational c1 = test::random_rational(rng, 5, 2), c2 = test::random_rational(rng, 5, 2);
    Rational bn = test::random_rational(rng, 5, 2);
    Rational k = 1 + abs(test::random_rational(rng, 8, 2));
    // P = a x^2 + 2 b x y + d y^2, H = [[a, b], [b, d]].
    Polynomial p = poly(to_fraction_string(a) + "*x^2 + " + to_fraction_string(2 * b) + "*x*y + " +
                            to_fraction_string(d) + "*y^2",
                        kXY);
    Polynomial q = poly(to_fraction_string(c1) + "*x + " + to_fraction_string(c2) + "*y + " +
                            to_fraction_string(bn) + "*N",
                        names);
    Rational det = a * d - b * b;
    ASSERT_GT(det, 0);
    Rational quad = (d * c1 * c1 - 2 * b * c1 * c2 + a * c2 * c2) / det;  // c^T H^-1 c
    const double opt = std::sqrt(to_double(k * quad)) + std::fabs(to_double(bn)) * 0.5;
    OptProblem prob{2, q, p, k, noise(Rational(-1, 2), Rational(1, 2)), std::nullopt};
    OptResult r = min_oracle(prob);
    const double tol = 1e-4 * std::max(1.0, opt);
    EXPECT_GE(to_double(r.max_upper), opt - 1e-12);
    EXPECT_LE(to_double(r.min_lower), -opt + 1e-12);
    EXPECT_NEAR(to_double(r.max_inner), opt, tol) << trial;
    EXPECT_NEAR(to_double(r.min_inner), -opt, tol) << trial;
    EXPECT_LE(to_double(r.max_upper) - opt, tol) << trial;
  }
}

TEST(SublevelBox, QuadraticClosedForm) {
  IBox box = sublevel_box(poly("x^2 + y^2", kXY), 4);
  EXPECT_LE(box[0].lo, -2);
  EXPECT_GE(box[0].hi, 2);
  EXPECT_NEAR(box[0].hi, 2, 1e-9);
  // 10/7 s0^2 - 15/7 s0 s1 + s1^2 <= k: extents sqrt(k (H^-1)_ii).
  IBox f = sublevel_box(poly("10/7*x^2 - 15/7*x*y + y^2", kXY), 1);
  EXPECT_NEAR(f[0].hi, std::sqrt(196.0 / 55.0), 1e-9);
  EXPECT_NEAR(f[1].hi, std::sqrt(280.0 / 55.0), 1e-9);
}

TEST(SublevelBox, QuarticContainsSublevelSet) {
  Polynomial p = poly("x^4 + y^4 - x*y", kXY);
  IBox box = sublevel_box(p, 2);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 20000; ++i) {
    std::vector<double> pt{u(rng), u(rng)};
    if (p.evaluate(std::span<const double>(pt)) <= 2) {
      EXPECT_TRUE(box[0].contains(pt[0]) && box[1].contains(pt[1]));
    }
  }
  EXPECT_LT(box[0].hi, 2.0);
}

TEST(SublevelBox, RejectsNonCoercive) {
  for (const char* text : {"x*y", "x^3 + y^2", "x^2"}) {
    try {
      sublevel_box(poly(text, kXY), 1);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::UnboundedSublevel) << text;
    }
  }
}

TEST(Precheck, LowerDegreeObjectivePasses) {
  PrecheckReport r = degree_precheck(poly("x^2 + y^2", kXY), poly("2.72*x*N + 2*N^2", kXYN), 2,
                                     Rational(578, 625), noise(-kTenth, kTenth));
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.degree_p, 2);
  EXPECT_EQ(r.degree_q, 1);
}

TEST(Precheck, RatioReachingSlackFails) {
  PrecheckReport r = degree_precheck(poly("x^2 + y^2", kXY), poly("10*N*x^2 + 10*N*y^2 + 10*N", kXYN), 2,
                                     Rational(578, 625), noise(-kTenth, kTenth));
  EXPECT_FALSE(r.pass);
  ASSERT_TRUE(r.ratio.has_value());
  EXPECT_GE(*r.ratio, 1.0);
  EXPECT_EQ(r.slack, Rational(47, 625));
}

TEST(Precheck, ZeroObjectivePasses) {
  EXPECT_TRUE(degree_precheck(poly("x^2 + y^2", kXY), Polynomial(3), 2, Rational(1, 2), noise(-kTenth, kTenth)).pass);
}

TEST(Precheck, SmallTiedRatioPasses) {
  PrecheckReport r = degree_precheck(poly("x^2 + y^2", kXY), poly("N*x^2", kXYN), 2, Rational(1, 2),
                                     noise(-kTenth, kTenth));
  EXPECT_TRUE(r.pass);
  ASSERT_TRUE(r.ratio.has_value());
  EXPECT_NEAR(*r.ratio, 0.1, 1e-3);
}

TEST(Precheck, HigherDegreeObjectiveFails) {
  EXPECT_FALSE(
      degree_precheck(poly("x^2 + y^2", kXY), poly("N*x^3", kXYN), 2, Rational(1, 2), noise(-kTenth, kTenth)).pass);
}

// Replays the trace: every bisection step lies strictly inside the current
// bracket, the floor never decreases and the ceiling never increases.
void expect_monotone_bracketing(const DichotomyResult& r) {
  std::optional<Rational> low, up;
  for (const auto& s : r.trace) {
    if (s.phase == "init") {
      if (!s.accepted) low = s.k;
      continue;
    }
    if (s.phase == "bisect") {
      ASSERT_TRUE(up.has_value());
      if (low) EXPECT_GT(s.k, *low);
      EXPECT_LT(s.k, *up);
    }
    if (s.accepted) {
      if (up) EXPECT_LE(s.k, *up);
      up = s.k;
    } else {
      if (low) EXPECT_GE(s.k, *low);
      low = s.k;
    }
    if (low && up) EXPECT_LT(*low, *up);
  }
}

TEST(Dichotomy, NoisyRotation) {
  const Rational lambda(578, 625);
  Polynomial p = poly("x^2 + y^2", kXY), q = poly("2.72*x*N + 2*N^2", kXYN);
  DichotomyResult r = dichotomy_search(lambda, p, q, 2, noise(-kTenth, kTenth), std::nullopt);
  ASSERT_TRUE(r.k.has_value());
  const double kmin = analytic_min_k(0.0752, 0.272, 0.02);
  EXPECT_NEAR(kmin, 13.61, 0.01);
  EXPECT_GE(to_double(*r.k), kmin);
  EXPECT_LE(to_double(*r.k), 14.9 + 50.0 / 1024);
  EXPECT_EQ(r.trace.front().k, 50);
  expect_monotone_bracketing(r);
  EXPECT_TRUE(test_bound(lambda, p, q, 2, noise(-kTenth, kTenth), parse_rational("14.9"), 1e-4).accepted);
}

TEST(Dichotomy, ReturnedBoundReverifiesIndependently) {
  const Rational lambda(578, 625);
  Polynomial p = poly("x^2 + y^2", kXY), q = poly("2.72*x*N + 2*N^2", kXYN);
  DichotomyResult r = dichotomy_search(lambda, p, q, 2, noise(-kTenth, kTenth), std::nullopt);
  ASSERT_TRUE(r.k.has_value());
  OptResult o = min_oracle(OptProblem{2, q, p, *r.k, noise(-kTenth, kTenth), std::nullopt});
  const Rational slack = 1 - lambda;
  EXPECT_GT(o.min_lower, -slack * *r.k);
  EXPECT_LT(o.max_upper, slack * *r.k);
}

TEST(Dichotomy, ZeroObjectiveHalvesToResolution) {
  DichotomyResult r = dichotomy_search(Rational(1, 2), poly("x^2 + y^2", kXY), Polynomial(3),
                                       2, noise(-kTenth, kTenth), std::nullopt);
  ASSERT_TRUE(r.k.has_value());
  EXPECT_TRUE(r.trace.front().accepted);
  EXPECT_EQ(*r.k, Rational(25, 256));
  expect_monotone_bracketing(r);
}

TEST(Dichotomy, Filter) {
  const std::vector<std::string> names{"s0", "s1", "N"};
  Polynomial p = poly("10/7*s0^2 - 15/7*s0*s1 + s1^2", {"s0", "s1"});
  Polynomial q = poly("15/7*s0*N - 2*s1*N + 10/7*N^2", names);
  const Rational lambda(7, 10);
  DichotomyResult r = dichotomy_search(lambda, p, q, 2, noise(-kTenth, kTenth), std::nullopt);
  ASSERT_TRUE(r.k.has_value());
  // 0.3 k = 0.2 sqrt(k) + 1/70 at the minimal k.
  const double kmin = analytic_min_k(0.3, 0.2, 1.0 / 70);
  EXPECT_NEAR(kmin, 0.5355, 1e-4);
  EXPECT_GE(to_double(*r.k), kmin);
  EXPECT_LE(to_double(*r.k), 0.87891);
  expect_monotone_bracketing(r);
  EXPECT_TRUE(test_bound(lambda, p, q, 2, noise(-kTenth, kTenth), parse_rational("0.87891"), 1e-4).accepted);
}

TEST(Dichotomy, InitialFloorAcceptedDirectly) {
  Polynomial p = poly("10/7*s0^2 - 15/7*s0*s1 + s1^2", {"s0", "s1"});
  Polynomial q = poly("15/7*s0*N - 2*s1*N + 10/7*N^2", {"s0", "s1", "N"});
  DichotomyResult r = dichotomy_search(Rational(7, 10), p, q, 2, noise(-kTenth, kTenth), Rational(17, 7));
  ASSERT_TRUE(r.k.has_value());
  EXPECT_EQ(*r.k, Rational(17, 7));
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.trace[0].phase, "init");
}

TEST(Dichotomy, DoublingFindsBoundFromTinyStart) {
  Polynomial p = poly("x^2 + y^2", kXY), q = poly("2.72*x*N + 2*N^2", kXYN);
  DichotomyConfig cfg;
  cfg.iterations = 40;
  cfg.k_init = Rational(1, 1000);
  DichotomyResult r = dichotomy_search(Rational(578, 625), p, q, 2, noise(-kTenth, kTenth), std::nullopt, cfg);
  ASSERT_TRUE(r.k.has_value());
  EXPECT_GE(to_double(*r.k), analytic_min_k(0.0752, 0.272, 0.02));
  expect_monotone_bracketing(r);
}

TEST(Dichotomy, NoAcceptanceRaisesNoInductiveBound) {
  // The objective grows like the invariant itself: no k survives.
  Polynomial p = poly("x^2 + y^2", kXY), q = poly("10*N*x^2 + 10*N*y^2 + 10*N", kXYN);
  DichotomyConfig cfg;
  cfg.iterations = 4;
  try {
    dichotomy_search(Rational(578, 625), p, q, 2, noise(-kTenth, kTenth), std::nullopt, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoInductiveBound);
  }
}

TEST(BoxRange, QuadraticIsExact) {
  Polynomial p = poly("10/7*x^2 - 15/7*x*y + y^2", kXY);
  std::vector<RationalRange> box{{-1, 1}, {-1, 1}};
  BoxRange r = polynomial_box_range(p, box);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.max, Rational(10, 7) + Rational(15, 7) + 1);
  EXPECT_EQ(r.min, 0);
  std::vector<RationalRange> pt{{2, 2}, {1, 1}};
  BoxRange v = polynomial_box_range(p, pt);
  EXPECT_EQ(v.min, Rational(17, 7));
  EXPECT_EQ(v.max, Rational(17, 7));
}

TEST(BoxRange, GridAgreesOnQuadratics) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Polynomial p(2);
    for (Exponents e : {Exponents{2, 0}, Exponents{1, 1}, Exponents{0, 2}, Exponents{1, 0}, Exponents{0, 1}})
      p.add_term(e, test::random_rational(rng, 5, 3));
    std::vector<RationalRange> box{{-1, 2}, {Rational(-1, 2), 1}};
    BoxRange r = polynomial_box_range(p, box);
    Rational lo = p.evaluate(std::vector<Rational>{-1, Rational(-1, 2)}), hi = lo;
    for (int i = 0; i <= 60; ++i)
      for (int j = 0; j <= 60; ++j) {
        Rational x = -1 + Rational(3 * i, 60), y = Rational(-1, 2) + Rational(3 * j, 120);
        x.canonicalize();
        y.canonicalize();
        Rational v = p.evaluate(std::vector<Rational>{x, y});
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    EXPECT_LE(r.min, lo);
    EXPECT_GE(r.max, hi);
    EXPECT_NEAR(to_double(r.min), to_double(lo), 0.05);
    EXPECT_NEAR(to_double(r.max), to_double(hi), 0.05);
  }
}

}  // namespace
}  // namespace pilat
