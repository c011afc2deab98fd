#include "pilat/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "pilat/error.hpp"
#include "pilat/report.hpp"

namespace pilat {

Mode mode_from_string(std::string_view s) {
  if (s == "exact") return Mode::Exact;
  if (s == "convergent") return Mode::Convergent;
  if (s == "divergent") return Mode::Divergent;
  if (s == "all") return Mode::All;
  throw Error(ErrorKind::Precondition, "unknown mode '" + std::string(s) + "'");
}

OutputFormat output_format_from_string(std::string_view s) {
  if (s == "acsl") return OutputFormat::Acsl;
  if (s == "json") return OutputFormat::Json;
  if (s == "both") return OutputFormat::Both;
  throw Error(ErrorKind::Precondition, "unknown output format '" + std::string(s) + "'");
}

InitConstraint parse_init_assignment(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
  };
  std::size_t eq = text.find('=');
  if (eq == std::string_view::npos) throw Error(ErrorKind::Syntax, "expected var=value or var=[lo,hi]: " + std::string(text));
  InitConstraint c;
  c.var = std::string(trim(text.substr(0, eq)));
  std::string_view rhs = trim(text.substr(eq + 1));
  if (c.var.empty() || rhs.empty()) throw Error(ErrorKind::Syntax, "malformed initial value: " + std::string(text));
  if (rhs.front() == '[') {
    std::size_t comma = rhs.find(',');
    if (rhs.back() != ']' || comma == std::string_view::npos)
      throw Error(ErrorKind::Syntax, "malformed initial interval: " + std::string(text));
    c.lower = parse_rational(trim(rhs.substr(1, comma - 1)));
    c.upper = parse_rational(trim(rhs.substr(comma + 1, rhs.size() - comma - 2)));
  } else {
    c.lower = c.upper = parse_rational(rhs);
  }
  if (c.lower > c.upper) throw Error(ErrorKind::Precondition, "empty initial interval for " + c.var);
  return c;
}

namespace {

bool selected(Mode m, InvariantClass c) {
  switch (m) {
    case Mode::All: return true;
    case Mode::Exact: return c == InvariantClass::Exact;
    case Mode::Convergent: return c == InvariantClass::Convergent;
    case Mode::Divergent: return c == InvariantClass::Divergent;
  }
  return true;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

AnalysisResult analyze_source(const Config& cfg, std::string_view source) {
  AnalysisResult res;
  try {
    if (cfg.degree < 1) throw Error(ErrorKind::Precondition, "--degree must be at least 1");
    const auto t0 = std::chrono::steady_clock::now();
    Program prog = parse_program(source);
    for (const auto& c : cfg.init) {
      if (!prog.var_index(c.var)) throw Error(ErrorKind::UndeclaredVariable, "initial value for unknown variable '" + c.var + "'");
      auto it = std::find_if(prog.init.begin(), prog.init.end(), [&](const InitConstraint& x) { return x.var == c.var; });
      if (it != prog.init.end()) *it = c;
      else prog.init.push_back(c);
    }
    MagnitudeConfig mags;
    mags.default_bound = cfg.magnitude_bound;
    prog = inject_rounding_noise(prog, cfg.float_model, mags);

    SimultaneousMap map = compose(prog);
    SolvablePartition partition = validate_solvable(map);
    AbstractMatrix lifted = lift_to_abstract_matrix(map, partition, cfg.degree, cfg.monomial_cap);
    const MonomialBasis& basis = lifted.basis();

    InvariantReport& rep = res.report;
    rep.program = program_digest(prog);
    rep.degree = cfg.degree;
    rep.vars = basis.vars();
    for (std::size_t i = 0; i < basis.size(); ++i) rep.basis.push_back(basis.name(i));

    std::optional<InitialRegion> init;
    if (!prog.init.empty()) {
      init = InitialRegion::from_program(prog);
      if (!init->covers(prog.vars)) {
        rep.diagnostics.push_back("initial region does not cover every variable; bounds are symbolic");
        init.reset();
      }
    }

    if (cfg.approximate_eigenpairs) {
      RationalMatrix m0 = instantiate_at_zero(lifted);
      std::vector<Rational> exact = rational_eigenvalues(m0);
      for (const ApproxEigenpair& e : approximate_left_eigenpairs(m0, exact)) {
        std::ostringstream msg;
        msg << "unverified approximate eigenvalue " << e.real;
        if (e.imag != 0) msg << (e.imag > 0 ? " + " : " - ") << std::fabs(e.imag) << "i";
        if (!e.left_vector.empty()) {
          msg << ", left vector (";
          for (std::size_t i = 0; i < e.left_vector.size(); ++i) msg << (i ? ", " : "") << e.left_vector[i];
          msg << ")";
        }
        rep.diagnostics.push_back(msg.str());
      }
    }

    std::vector<SemiInvariant> invs;
    if (lifted.parameter_free()) {
      invs = deterministic_invariants(instantiate_at_zero(lifted), basis, init);
      rep.candidate_generation_ms = elapsed_ms(t0);
    } else {
      std::vector<CandidateInvariant> cands = nd_candidates(lifted);
      rep.candidate_generation_ms = elapsed_ms(t0);
      if (cands.empty()) rep.diagnostics.push_back("no rational eigenvalue with 0 < |lambda| < 1 in the noise-free matrix");
      const auto t1 = std::chrono::steady_clock::now();
      SynthesisOptions so{cfg.dichotomy, cfg.override_precheck};
      for (const auto& c : cands) {
        try {
          invs.push_back(synthesize_nd_invariant(c, basis, lifted.params(), init, so));
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::PrecheckFailed && e.kind() != ErrorKind::NoInductiveBound &&
              e.kind() != ErrorKind::UnboundedSublevel)
            throw;
          rep.diagnostics.push_back("candidate " + basis.covector_polynomial(c.e0).to_string(basis.vars()) +
                                    " (lambda = " + to_fraction_string(c.lambda0) + "): " + e.render());
        }
      }
      rep.optimization_s = elapsed_ms(t1) / 1000.0;
      sort_invariants(invs, basis);
    }

    std::uint64_t seed = cfg.seed;
    for (auto& inv : invs) {
      if (!selected(cfg.mode, inv.cls)) continue;
      inv.verified = verify_inductive_simulation(prog, basis, inv, cfg.trials, seed++, init);
      if (inv.verified.status == VerificationStatus::CounterExample)
        rep.diagnostics.push_back("simulation refuted " + acsl_relation(inv, rep.vars, rep.basis));
      rep.invariants.push_back(std::move(inv));
    }

    res.acsl = emit_acsl(rep);
    res.json = emit_json(rep);
    bool any = std::any_of(rep.invariants.begin(), rep.invariants.end(), [](const SemiInvariant& s) {
      return s.verified.status == VerificationStatus::Verified;
    });
    res.exit_code = any ? 0 : 2;
  } catch (const Error& e) {
    res.exit_code = 1;
    res.error = e.render();
  } catch (const std::exception& e) {
    res.exit_code = 1;
    res.error = std::string("InternalError: ") + e.what();
  }
  return res;
}

int run_analysis(const Config& cfg, const std::string& path, std::ostream& out, std::ostream& err) {
  std::ifstream in(path);
  if (!in) {
    err << "pilat: " << Error(ErrorKind::Io, "cannot read " + path).render() << "\n";
    return 1;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  AnalysisResult r = analyze_source(cfg, buf.str());
  if (r.exit_code == 1) {
    bool located = !r.error.empty() && std::isdigit(static_cast<unsigned char>(r.error.front()));
    err << path << (located ? ":" : ": ") << r.error << "\n";
    return 1;
  }
  if (cfg.output != OutputFormat::Json) out << r.acsl;
  if (cfg.output != OutputFormat::Acsl) out << r.json;
  for (const auto& d : r.report.diagnostics) err << "pilat: " << d << "\n";
  return r.exit_code;
}

}  // namespace pilat
