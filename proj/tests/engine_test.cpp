#include <gtest/gtest.h>

#include "pilat/invariant_engine.hpp"
#include "support.hpp"

namespace pilat {
namespace {

struct Lifted {
  Program prog;
  AbstractMatrix a;
};

Lifted lift(const std::string& src, int d) {
  Lifted l;
  l.prog = parse_program(src);
  SimultaneousMap m = compose(l.prog);
  l.a = lift_to_abstract_matrix(m, validate_solvable(m), d);
  return l;
}

std::string text(const SemiInvariant& s, const MonomialBasis& b) {
  return b.covector_polynomial(s.covector).to_string(b.vars());
}

TEST(Classify, ByModulus) {
  using C = InvariantClass;
  EXPECT_EQ(classify_eigenpair(Rational(578, 625)), (std::vector<C>{C::Exact, C::Convergent}));
  EXPECT_EQ(classify_eigenpair(1), std::vector<C>{C::Exact});
  EXPECT_EQ(classify_eigenpair(Rational(3, 2)), (std::vector<C>{C::Exact, C::Divergent}));
  EXPECT_EQ(classify_eigenpair(-1), (std::vector<C>{C::Exact, C::Convergent, C::Divergent}));
  EXPECT_THROW(classify_eigenpair(0), Error);
}

TEST(Normalize, LastNonzeroBecomesOne) {
  std::vector<Rational> v{2, -4, 8, 0};
  EXPECT_EQ(normalize_last_nonzero(v), (std::vector<Rational>{Rational(1, 4), Rational(-1, 2), 1, 0}));
}

TEST(Deterministic, RotationContractionWithInitBox) {
  Lifted l = lift(test::corpus_source("fig1.loop"), 2);
  auto invs = deterministic_invariants(instantiate_at_zero(l.a), l.a.basis(), InitialRegion::from_program(l.prog));
  std::vector<const SemiInvariant*> conv;
  for (const auto& s : invs)
    if (s.cls == InvariantClass::Convergent) conv.push_back(&s);
  ASSERT_EQ(conv.size(), 1u);
  EXPECT_EQ(text(*conv[0], l.a.basis()), "x^2 + y^2");
  EXPECT_EQ(conv[0]->lambda, Rational(578, 625));
  ASSERT_TRUE(conv[0]->bound.has_value());
  EXPECT_EQ(*conv[0]->bound, 2);
}

TEST(Deterministic, IdentityGivesOnlyExactRelations) {
  Lifted l = lift("var x, y\nwhile * do skip; done", 2);
  auto invs = deterministic_invariants(instantiate_at_zero(l.a), l.a.basis(), std::nullopt);
  EXPECT_EQ(invs.size(), 5u);  // every non-unit monomial is preserved
  for (const auto& s : invs) {
    EXPECT_EQ(s.cls, InvariantClass::Exact);
    EXPECT_TRUE(s.symbolic);
  }
}

TEST(Deterministic, TranslationHasNoBoundedRelation) {
  Lifted l = lift("var x\nwhile * do x := x - 1; done", 2);
  for (const auto& s : deterministic_invariants(instantiate_at_zero(l.a), l.a.basis(), std::nullopt))
    EXPECT_EQ(s.cls, InvariantClass::Exact);
}

TEST(Deterministic, EigenRelationHoldsExactly) {
  for (const char* name : {"fig1.loop", "dampened_oscillator.loop", "harmonic_oscillator.loop"}) {
    Lifted l = lift(test::corpus_source(name), 2);
    RationalMatrix m = instantiate_at_zero(l.a);
    for (const auto& s : deterministic_invariants(m, l.a.basis(), std::nullopt)) {
      if (s.symbolic || s.cls != InvariantClass::Exact) continue;
      RowVector lhs = m.left_multiply(s.covector);
      for (std::size_t i = 0; i < lhs.size(); ++i) EXPECT_EQ(lhs[i], s.lambda * s.covector[i]) << name;
    }
  }
}

TEST(Candidates, NoisyRotation) {
  Lifted l = lift(test::corpus_source("fig4.loop"), 2);
  auto cs = nd_candidates(l.a);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs[0].lambda0, Rational(578, 625));
  const std::vector<std::string> xy{"x", "y"}, xyn{"x", "y", "N"};
  EXPECT_EQ(l.a.basis().covector_polynomial(cs[0].e0).to_string(xy), "x^2 + y^2");
  EXPECT_EQ(cs[0].objective.to_string(xyn), "2.72*x*N + 2*N^2");
}

TEST(Candidates, FilterNormalizedByLastCoordinate) {
  Lifted l = lift(test::corpus_source("fig6.loop"), 2);
  auto cs = nd_candidates(l.a);
  bool found = false;
  for (const auto& c : cs) {
    if (c.lambda0 != Rational(7, 10)) continue;
    found = true;
    const std::vector<std::string> names{"s0", "s1"};
    EXPECT_EQ(l.a.basis().covector_polynomial(c.e0), parse_polynomial("10/7*s0^2 - 15/7*s0*s1 + s1^2", names));
  }
  EXPECT_TRUE(found);
  for (const auto& c : cs) {
    EXPECT_GT(abs(c.lambda0), 0);
    EXPECT_LT(abs(c.lambda0), 1);
  }
}

TEST(Candidates, ParameterFreeMatrixIsAPreconditionError) {
  Lifted l = lift(test::corpus_source("fig1.loop"), 2);
  try {
    nd_candidates(l.a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Precondition);
  }
}

CandidateInvariant filter_candidate(const AbstractMatrix& a) {
  for (auto& c : nd_candidates(a))
    if (c.lambda0 == Rational(7, 10)) return c;
  throw std::runtime_error("no filter candidate");
}

TEST(Synthesis, FilterWithoutInit) {
  Lifted l = lift(test::corpus_source("fig6.loop"), 2);
  SemiInvariant s = synthesize_nd_invariant(filter_candidate(l.a), l.a.basis(), l.a.params(), std::nullopt);
  ASSERT_TRUE(s.bound.has_value());
  EXPECT_EQ(s.cls, InvariantClass::Convergent);
  EXPECT_LE(to_double(*s.bound), 0.87891);
  EXPECT_FALSE(s.trace.empty());
}

TEST(Synthesis, InitPointFloorIsAccepted) {
  Lifted l = lift(test::corpus_source("fig6.loop"), 2);
  InitialRegion init;
  init.values["s0"] = {2, 2};
  init.values["s1"] = {1, 1};
  SemiInvariant s = synthesize_nd_invariant(filter_candidate(l.a), l.a.basis(), l.a.params(), init);
  ASSERT_TRUE(s.bound.has_value());
  EXPECT_EQ(*s.bound, Rational(17, 7));  // P(2, 1) = 40/7 - 30/7 + 1
  ASSERT_EQ(s.trace.size(), 1u);
  EXPECT_EQ(s.trace[0].phase, "init");
}

TEST(Synthesis, PrecheckFailureUnlessOverridden) {
  Lifted l = lift(test::corpus_source("multiplicative_noise.loop"), 2);
  auto cs = nd_candidates(l.a);
  ASSERT_FALSE(cs.empty());
  try {
    synthesize_nd_invariant(cs[0], l.a.basis(), l.a.params(), std::nullopt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PrecheckFailed);
  }
}

SemiInvariant convergent(std::vector<Rational> e, Rational lambda, Rational k) {
  SemiInvariant s;
  s.covector = std::move(e);
  s.lambda = std::move(lambda);
  s.cls = InvariantClass::Convergent;
  s.bound = std::move(k);
  return s;
}

TEST(Simulation, ReferenceNoisyRotationBoundHolds) {
  Lifted l = lift(test::corpus_source("fig4.loop"), 2);
  auto c = nd_candidates(l.a).at(0);
  Verification v =
      verify_inductive_simulation(l.prog, l.a.basis(), convergent(c.e0, c.lambda0, parse_rational("14.9")), 100000);
  EXPECT_EQ(v.status, VerificationStatus::Verified);
  EXPECT_EQ(v.trials, 100000u);
}

TEST(Simulation, TooSmallBoundHasCounterexample) {
  Lifted l = lift(test::corpus_source("fig4.loop"), 2);
  auto c = nd_candidates(l.a).at(0);
  Verification v = verify_inductive_simulation(l.prog, l.a.basis(), convergent(c.e0, c.lambda0, 1), 100000);
  ASSERT_EQ(v.status, VerificationStatus::CounterExample);
  // Replay the counterexample independently.
  Polynomial p = l.a.basis().covector_polynomial(c.e0);
  EXPECT_LE(abs(p.evaluate(v.state)), 1);
  std::vector<Rational> next = execute(l.prog, v.state, v.params);
  EXPECT_GT(abs(p.evaluate(next)), 1);
}

TEST(Simulation, SynthesizedBoundsSurviveOneHundredThousandTrials) {
  for (const char* name : {"fig4.loop", "fig6.loop", "lead_lag.loop", "gaussian_regulator.loop"}) {
    Lifted l = lift(test::corpus_source(name), 2);
    for (const auto& c : nd_candidates(l.a)) {
      SemiInvariant s;
      try {
        s = synthesize_nd_invariant(c, l.a.basis(), l.a.params(), std::nullopt);
      } catch (const Error&) {
        continue;
      }
      Verification v = verify_inductive_simulation(l.prog, l.a.basis(), s, 100000, 5);
      EXPECT_EQ(v.status, VerificationStatus::Verified) << name;
    }
  }
}

TEST(Simulation, ExactRelationsAreNeverRefuted) {
  Lifted l = lift(test::corpus_source("harmonic_oscillator.loop"), 2);
  auto invs = deterministic_invariants(instantiate_at_zero(l.a), l.a.basis(), std::nullopt);
  ASSERT_FALSE(invs.empty());
  for (const auto& s : invs)
    EXPECT_EQ(verify_inductive_simulation(l.prog, l.a.basis(), s, 2000).status, VerificationStatus::Verified);
}

}  // namespace
}  // namespace pilat
