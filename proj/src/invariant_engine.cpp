#include "pilat/invariant_engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "pilat/error.hpp"

namespace pilat {

const char* to_string(InvariantClass c) {
  switch (c) {
    case InvariantClass::Exact: return "exact";
    case InvariantClass::Convergent: return "convergent";
    case InvariantClass::Divergent: return "divergent";
  }
  return "?";
}

InvariantClass invariant_class_from_string(std::string_view s) {
  if (s == "exact") return InvariantClass::Exact;
  if (s == "convergent") return InvariantClass::Convergent;
  if (s == "divergent") return InvariantClass::Divergent;
  throw Error(ErrorKind::Syntax, "unknown invariant class '" + std::string(s) + "'");
}

const char* to_string(VerificationStatus s) {
  switch (s) {
    case VerificationStatus::Unchecked: return "unchecked";
    case VerificationStatus::Verified: return "verified";
    case VerificationStatus::CounterExample: return "counterexample";
  }
  return "?";
}

VerificationStatus verification_status_from_string(std::string_view s) {
  if (s == "unchecked") return VerificationStatus::Unchecked;
  if (s == "verified") return VerificationStatus::Verified;
  if (s == "counterexample") return VerificationStatus::CounterExample;
  throw Error(ErrorKind::Syntax, "unknown verification status '" + std::string(s) + "'");
}

std::vector<InvariantClass> classify_eigenpair(const Rational& lambda) {
  if (lambda == 0) throw Error(ErrorKind::Precondition, "classification needs a nonzero eigenvalue");
  Rational m = abs(lambda);
  if (lambda == 1) return {InvariantClass::Exact};
  if (m < 1) return {InvariantClass::Exact, InvariantClass::Convergent};
  if (m > 1) return {InvariantClass::Exact, InvariantClass::Divergent};
  return {InvariantClass::Exact, InvariantClass::Convergent, InvariantClass::Divergent};
}

InitialRegion InitialRegion::from_program(const Program& p) {
  InitialRegion r;
  for (const auto& c : p.init) r.values[c.var] = {c.lower, c.upper};
  return r;
}

bool InitialRegion::covers(const std::vector<std::string>& vars) const {
  return std::all_of(vars.begin(), vars.end(), [&](const std::string& v) { return values.count(v) > 0; });
}

std::vector<RationalRange> InitialRegion::box(const std::vector<std::string>& vars) const {
  std::vector<RationalRange> out;
  for (const auto& v : vars) out.push_back(values.at(v));
  return out;
}

std::optional<std::vector<Rational>> InitialRegion::point(const std::vector<std::string>& vars) const {
  std::vector<Rational> out;
  for (const auto& v : vars) {
    auto it = values.find(v);
    if (it == values.end() || it->second.lower != it->second.upper) return std::nullopt;
    out.push_back(it->second.lower);
  }
  return out;
}

std::vector<Rational> normalize_last_nonzero(std::vector<Rational> v) {
  auto it = std::find_if(v.rbegin(), v.rend(), [](const Rational& x) { return x != 0; });
  if (it == v.rend()) return v;
  Rational s = 1 / *it;
  for (auto& x : v) x *= s;
  return v;
}

namespace {

struct AbsRange {
  Rational max;  // >= max |P|
  Rational min;  // <= min |P|
};

AbsRange abs_range(const Polynomial& p, const std::vector<RationalRange>& box) {
  BoxRange r = polynomial_box_range(p, box);
  AbsRange out;
  out.max = std::max<Rational>(abs(r.min), abs(r.max));
  out.min = (r.min <= 0 && r.max >= 0) ? Rational(0) : std::min<Rational>(abs(r.min), abs(r.max));
  return out;
}

bool is_unit(const std::vector<Rational>& v, std::size_t unit) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] != (i == unit ? 1 : 0)) return false;
  return true;
}

bool bounded_below(const Polynomial& p) { return certified_coercive(p); }

}  // namespace

std::vector<SemiInvariant> deterministic_invariants(const RationalMatrix& a, const MonomialBasis& basis,
                                                    const std::optional<InitialRegion>& init) {
  std::vector<SemiInvariant> out;
  const std::size_t unit = basis.unit_index();
  const bool have_box = init && init->covers(basis.vars());
  const auto point = have_box ? init->point(basis.vars()) : std::nullopt;
  const auto box = have_box ? init->box(basis.vars()) : std::vector<RationalRange>{};

  for (const Eigenpair& ep : left_eigenpairs(a)) {
    const auto classes = classify_eigenpair(ep.value);
    for (const RowVector& raw : ep.left_space) {
      std::vector<Rational> phi = normalize_last_nonzero(raw);
      if (is_unit(phi, unit)) continue;  // the constant 1 carries no information
      Polynomial p = basis.covector_polynomial(phi);
      SemiInvariant base;
      base.lambda = ep.value;
      base.provenance = "eigenpair";

      if (ep.value == 1) {
        SemiInvariant s = base;
        s.cls = InvariantClass::Exact;
        if (point && unit < basis.size()) {
          s.covector = phi;
          s.covector[unit] -= p.evaluate(*point);
          if (std::all_of(s.covector.begin(), s.covector.end(), [](const Rational& x) { return x == 0; })) continue;
        } else {
          s.covector = phi;
          s.symbolic = true;
        }
        out.push_back(std::move(s));
        continue;
      }

      if (point && p.evaluate(*point) == 0) {
        SemiInvariant s = base;
        s.cls = InvariantClass::Exact;
        s.covector = phi;
        out.push_back(std::move(s));
        continue;
      }

      std::optional<AbsRange> range;
      if (have_box) range = abs_range(p, box);
      for (InvariantClass c : classes) {
        if (c == InvariantClass::Exact) continue;
        SemiInvariant s = base;
        s.cls = c;
        s.covector = phi;
        if (!range) {
          s.symbolic = true;
        } else if (c == InvariantClass::Convergent) {
          s.bound = range->max;
        } else {
          if (range->min <= 0) continue;  // |P| >= 0 is vacuous
          s.bound = range->min;
        }
        out.push_back(std::move(s));
      }
    }
  }
  sort_invariants(out, basis);
  return out;
}

std::vector<CandidateInvariant> nd_candidates(const AbstractMatrix& a) {
  if (a.params().empty()) throw Error(ErrorKind::Precondition, "candidate generation needs a parameterized matrix");
  const MonomialBasis& basis = a.basis();
  std::vector<CandidateInvariant> out;
  for (const Eigenpair& ep : left_eigenpairs(instantiate_at_zero(a))) {
    if (abs(ep.value) >= 1) continue;
    for (const RowVector& raw : ep.left_space) {
      CandidateInvariant c;
      c.lambda0 = ep.value;
      c.e0 = normalize_last_nonzero(raw);
      Polynomial p = basis.covector_polynomial(c.e0);
      if (!bounded_below(p) && bounded_below(-p))
        for (auto& x : c.e0) x = -x;
      c.delta = noise_covector(c.e0, a);
      c.objective = pair_with_state(c.delta, a);
      out.push_back(std::move(c));
    }
  }
  return out;
}

SemiInvariant synthesize_nd_invariant(const CandidateInvariant& c, const MonomialBasis& basis,
                                      const std::vector<ParamDecl>& params, const std::optional<InitialRegion>& init,
                                      const SynthesisOptions& opts) {
  const std::size_t nv = basis.vars().size();
  Polynomial p = basis.covector_polynomial(c.e0);
  PrecheckReport pre = degree_precheck(p, c.objective, nv, c.lambda0, params);
  if (!pre.pass && !opts.override_precheck)
    throw Error(ErrorKind::PrecheckFailed, "convergence precheck failed: " + pre.message);

  std::optional<Rational> floor;
  if (init && init->covers(basis.vars())) {
    BoxRange r = polynomial_box_range(p, init->box(basis.vars()));
    floor = std::max<Rational>(r.max, -r.min);
  }
  DichotomyResult d = dichotomy_search(c.lambda0, p, c.objective, nv, params, floor, opts.dichotomy);
  SemiInvariant s;
  s.covector = c.e0;
  s.lambda = c.lambda0;
  s.cls = InvariantClass::Convergent;
  s.bound = d.k;
  s.provenance = "candidate";
  s.trace = std::move(d.trace);
  return s;
}

namespace {

// Random rationals on a dyadic grid keep exact arithmetic cheap.
constexpr long kGridBits = 30;

Rational on_grid(double v) {
  double scaled = std::round(std::ldexp(v, kGridBits));
  mpz_class num;
  mpz_set_d(num.get_mpz_t(), scaled);
  Rational q(num, mpz_class(1) << kGridBits);
  q.canonicalize();
  return q;
}

struct Sampler {
  std::mt19937_64 rng;
  IBox box;

  double uniform(const Interval& iv) {
    if (iv.width() <= 0) return iv.lo;
    return std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng);
  }

  std::vector<double> point() {
    std::vector<double> x(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) x[i] = uniform(box[i]);
    return x;
  }

  Rational param(const ParamDecl& d) {
    int pick = std::uniform_int_distribution<int>(0, 2)(rng);
    if (pick == 0 || d.lower == d.upper) return d.lower;
    if (pick == 1) return d.upper;
    Rational t = on_grid(std::uniform_real_distribution<double>(0, 1)(rng));
    return d.lower + t * (d.upper - d.lower);
  }
};

IBox fallback_box(std::size_t n, const std::optional<InitialRegion>& init, const std::vector<std::string>& vars) {
  IBox box(n, Interval{-10, 10});
  if (init && init->covers(vars)) {
    auto b = init->box(vars);
    for (std::size_t i = 0; i < n; ++i) {
      double lo = b[i].lower.get_d(), hi = b[i].upper.get_d();
      double r = std::max({1.0, std::fabs(lo), std::fabs(hi)}) * 4;
      box[i] = {-r, r};
    }
  }
  return box;
}

}  // namespace

Verification verify_inductive_simulation(const Program& prog, const MonomialBasis& basis, const SemiInvariant& s,
                                         std::size_t trials, std::uint64_t seed,
                                         const std::optional<InitialRegion>& init) {
  Verification out;
  const std::size_t nv = basis.vars().size();
  if (prog.vars != basis.vars()) throw Error(ErrorKind::DimensionMismatch, "program and basis variables differ");
  if (s.cls != InvariantClass::Exact && !s.bound && !s.symbolic)
    throw Error(ErrorKind::Precondition, "bounded invariant without a bound");

  const Polynomial p = basis.covector_polynomial(s.covector);
  const CompiledPoly pd(p, false);
  const Rational k = s.bound.value_or(0);
  const double kd = k.get_d();

  // Relation membership (exact) and a signed margin (double, >= 0 inside).
  std::function<bool(const std::vector<Rational>&)> inside;
  std::function<double(const std::vector<double>&)> margin;
  std::function<bool(const std::vector<Rational>&, const std::vector<Rational>&)> holds_after;
  if (s.cls == InvariantClass::Exact) {
    inside = [](const std::vector<Rational>&) { return true; };
    margin = [](const std::vector<double>&) { return 1.0; };
    // Eigen relation P(f(X)) = lambda P(X) implies the level set is preserved.
    holds_after = [&](const std::vector<Rational>& x, const std::vector<Rational>& y) {
      return p.evaluate(y) == s.lambda * p.evaluate(x);
    };
  } else if (s.symbolic) {
    inside = [](const std::vector<Rational>&) { return true; };
    margin = [](const std::vector<double>&) { return 1.0; };
    holds_after = [&](const std::vector<Rational>& x, const std::vector<Rational>& y) {
      Rational before = abs(p.evaluate(x)), after = abs(p.evaluate(y));
      return s.cls == InvariantClass::Convergent ? after <= before : after >= before;
    };
  } else if (s.cls == InvariantClass::Convergent) {
    inside = [&](const std::vector<Rational>& x) { return abs(p.evaluate(x)) <= k; };
    margin = [&](const std::vector<double>& x) { return kd - std::fabs(pd.value(x)); };
    holds_after = [&](const std::vector<Rational>&, const std::vector<Rational>& y) {
      return abs(p.evaluate(y)) <= k;
    };
  } else {
    inside = [&](const std::vector<Rational>& x) { return abs(p.evaluate(x)) >= k; };
    margin = [&](const std::vector<double>& x) { return std::fabs(pd.value(x)) - kd; };
    holds_after = [&](const std::vector<Rational>&, const std::vector<Rational>& y) {
      return abs(p.evaluate(y)) >= k;
    };
  }

  Sampler smp{std::mt19937_64(seed), fallback_box(nv, init, basis.vars())};
  if (s.cls == InvariantClass::Convergent && s.bound) {
    for (const Polynomial& q : {p, -p}) {
      try {
        smp.box = sublevel_box(q, k);
        break;
      } catch (const Error&) {
      }
    }
  } else if (s.cls == InvariantClass::Divergent && s.bound) {
    for (auto& iv : smp.box) iv = {iv.lo * 2, iv.hi * 2};
  }

  auto to_rational_state = [](const std::vector<double>& x) {
    std::vector<Rational> r;
    for (double v : x) r.push_back(on_grid(v));
    return r;
  };

  // A point of the relation, half of the time pushed onto its boundary.
  auto sample_state = [&]() -> std::optional<std::vector<Rational>> {
    std::optional<std::vector<double>> in, outside;
    for (int attempt = 0; attempt < 200 && (!in || !outside); ++attempt) {
      auto x = smp.point();
      if (margin(x) >= 0) {
        if (!in) in = x;
      } else if (!outside) {
        outside = x;
      }
      if (in && std::uniform_int_distribution<int>(0, 1)(smp.rng) == 0) break;
    }
    if (!in) return std::nullopt;
    std::vector<double> x = *in;
    if (outside) {
      double lo = 0, hi = 1;
      std::vector<double> y(nv);
      for (int it = 0; it < 50; ++it) {
        double t = 0.5 * (lo + hi);
        for (std::size_t i = 0; i < nv; ++i) y[i] = (*in)[i] + t * ((*outside)[i] - (*in)[i]);
        if (margin(y) >= 0) lo = t;
        else hi = t;
      }
      for (std::size_t i = 0; i < nv; ++i) x[i] = (*in)[i] + lo * ((*outside)[i] - (*in)[i]);
    }
    auto r = to_rational_state(x);
    if (inside(r)) return r;
    r = to_rational_state(*in);
    if (inside(r)) return r;
    return std::nullopt;
  };

  std::size_t misses = 0;
  while (out.trials < trials && misses < trials + 1000) {
    auto x = sample_state();
    if (!x) {
      ++misses;
      continue;
    }
    std::vector<Rational> n;
    for (const auto& d : prog.params) n.push_back(smp.param(d));
    bool admissible = true;
    std::vector<Rational> y = execute(prog, *x, n, &admissible);
    if (!admissible) {
      ++misses;
      continue;
    }
    ++out.trials;
    if (!holds_after(*x, y)) {
      out.status = VerificationStatus::CounterExample;
      out.state = *x;
      out.params = n;
      return out;
    }
  }
  out.status = out.trials > 0 ? VerificationStatus::Verified : VerificationStatus::Unchecked;
  return out;
}

void sort_invariants(std::vector<SemiInvariant>& invs, const MonomialBasis& basis) {
  std::vector<std::pair<std::string, std::size_t>> keys;
  for (std::size_t i = 0; i < invs.size(); ++i)
    keys.emplace_back(basis.covector_polynomial(invs[i].covector).to_string(basis.vars()), i);
  std::vector<std::size_t> order(invs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    Rational la = abs(invs[a].lambda), lb = abs(invs[b].lambda);
    if (la != lb) return la > lb;
    if (keys[a].first != keys[b].first) return keys[a].first < keys[b].first;
    return static_cast<int>(invs[a].cls) < static_cast<int>(invs[b].cls);
  });
  std::vector<SemiInvariant> sorted;
  for (std::size_t i : order) sorted.push_back(std::move(invs[i]));
  invs = std::move(sorted);
}

}  // namespace pilat
