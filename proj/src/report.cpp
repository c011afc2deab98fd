#include "pilat/report.hpp"

#include <json.hpp>

#include <cctype>
#include <sstream>

#include "pilat/error.hpp"

namespace pilat {

namespace {

using ojson = nlohmann::ordered_json;

MonomialBasis basis_from_names(const std::vector<std::string>& vars, const std::vector<std::string>& names) {
  std::vector<Exponents> monos;
  for (const auto& n : names) {
    Polynomial p = parse_polynomial(n, vars);
    if (p.terms().size() != 1 || p.terms().begin()->second != 1)
      throw Error(ErrorKind::Syntax, "basis entry is not a monomial: " + n);
    monos.push_back(p.terms().begin()->first);
  }
  return MonomialBasis(vars, std::move(monos));
}

// Homogeneous quadratic with a positive semidefinite form: |P| = P.
bool homogeneous_psd_quadratic(const Polynomial& p) {
  const std::size_t n = p.arity();
  std::vector<std::vector<Rational>> h(n, std::vector<Rational>(n));
  for (const auto& [e, c] : p.terms()) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      for (unsigned k = 0; k < e[i]; ++k) idx.push_back(i);
    if (idx.size() != 2) return false;
    if (idx[0] == idx[1]) {
      h[idx[0]][idx[0]] += c;
    } else {
      h[idx[0]][idx[1]] += c / 2;
      h[idx[1]][idx[0]] += c / 2;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (h[k][k] < 0) return false;
    if (h[k][k] == 0) {
      for (std::size_t j = k; j < n; ++j)
        if (h[k][j] != 0) return false;
      continue;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      Rational f = h[i][k] / h[k][k];
      for (std::size_t j = k; j < n; ++j) h[i][j] -= f * h[k][j];
    }
  }
  return true;
}

const char* relation_op(const SemiInvariant& inv) {
  switch (inv.cls) {
    case InvariantClass::Exact: return "==";
    case InvariantClass::Convergent: return "<=";
    case InvariantClass::Divergent: return ">=";
  }
  return "?";
}

std::string exact_statement(const SemiInvariant& inv, const Polynomial& p, const std::vector<std::string>& vars) {
  std::string text = p.to_string(vars);
  std::string lhs = inv.cls == InvariantClass::Exact ? text : "|" + text + "|";
  std::string rhs;
  if (inv.symbolic) rhs = "(" + lhs + " at loop entry)";
  else if (inv.bound) rhs = to_exact_string(*inv.bound);
  else rhs = "0";
  return lhs + " " + relation_op(inv) + " " + rhs;
}

}  // namespace

std::string acsl_relation(const SemiInvariant& inv, const std::vector<std::string>& vars,
                          const std::vector<std::string>& basis_names) {
  MonomialBasis basis = basis_from_names(vars, basis_names);
  Polynomial p = basis.covector_polynomial(inv.covector);
  std::string text = p.to_string(vars, Polynomial::CoefficientStyle::Decimal6, Polynomial::PowerStyle::Product);
  if (inv.cls == InvariantClass::Exact) {
    if (inv.symbolic) return text + " == \\at(" + text + ", LoopEntry)";
    return text + " == 0";
  }
  std::string lhs = homogeneous_psd_quadratic(p) ? text : "\\abs(" + text + ")";
  if (inv.symbolic) return lhs + " " + relation_op(inv) + " \\at(" + lhs + ", LoopEntry)";
  // Bounds round outward so the printed relation is implied by the exact one.
  int direction = inv.cls == InvariantClass::Convergent ? 1 : -1;
  return lhs + " " + relation_op(inv) + " " + to_decimal_string(*inv.bound, 6, direction);
}

std::string emit_acsl(const InvariantReport& report) {
  std::ostringstream out;
  MonomialBasis basis = basis_from_names(report.vars, report.basis);
  std::size_t emitted = 0;
  for (const auto& inv : report.invariants) {
    if (inv.verified.status != VerificationStatus::Verified) continue;
    Polynomial p = basis.covector_polynomial(inv.covector);
    out << "/*@ loop invariant " << acsl_relation(inv, report.vars, report.basis) << "; */ // "
        << exact_statement(inv, p, report.vars) << ", lambda = " << to_fraction_string(inv.lambda) << "\n";
    ++emitted;
  }
  if (emitted == 0) out << "/* no verified loop invariants at degree " << report.degree << " */\n";
  return out.str();
}

std::string emit_json(const InvariantReport& report) {
  MonomialBasis basis = basis_from_names(report.vars, report.basis);
  ojson j;
  j["program"] = report.program;
  j["degree"] = report.degree;
  j["vars"] = report.vars;
  j["basis"] = report.basis;
  j["invariants"] = ojson::array();
  for (const auto& inv : report.invariants) {
    ojson e;
    e["polynomial"] = basis.covector_polynomial(inv.covector).to_string(report.vars);
    e["covector"] = ojson::array();
    for (const auto& c : inv.covector) e["covector"].push_back(to_fraction_string(c));
    e["class"] = to_string(inv.cls);
    e["lambda"] = to_fraction_string(inv.lambda);
    e["bound"] = inv.bound ? ojson(to_fraction_string(*inv.bound)) : ojson(nullptr);
    e["symbolic"] = inv.symbolic;
    ojson v;
    v["status"] = to_string(inv.verified.status);
    v["trials"] = inv.verified.trials;
    if (inv.verified.status == VerificationStatus::CounterExample) {
      ojson cx;
      cx["state"] = ojson::array();
      for (const auto& x : inv.verified.state) cx["state"].push_back(to_fraction_string(x));
      cx["params"] = ojson::array();
      for (const auto& x : inv.verified.params) cx["params"].push_back(to_fraction_string(x));
      v["counterexample"] = cx;
    } else {
      v["counterexample"] = nullptr;
    }
    e["verified"] = v;
    e["provenance"] = inv.provenance;
    e["trace"] = ojson::array();
    for (const auto& s : inv.trace)
      e["trace"].push_back({{"k", to_fraction_string(s.k)},
                            {"min_lower", to_fraction_string(s.min_lower)},
                            {"max_upper", to_fraction_string(s.max_upper)},
                            {"accepted", s.accepted},
                            {"phase", s.phase}});
    j["invariants"].push_back(std::move(e));
  }
  j["diagnostics"] = report.diagnostics;
  j["timings"] = {{"candidate_generation_ms", report.candidate_generation_ms},
                  {"optimization_s", report.optimization_s}};
  return j.dump(2) + "\n";
}

InvariantReport parse_json(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Syntax, std::string("malformed report: ") + e.what());
  }
  auto rationals = [](const ojson& arr) {
    std::vector<Rational> out;
    for (const auto& x : arr) out.push_back(parse_rational(x.get<std::string>()));
    return out;
  };
  InvariantReport r;
  try {
    r.program = j.at("program").get<std::string>();
    r.degree = j.at("degree").get<int>();
    r.vars = j.at("vars").get<std::vector<std::string>>();
    r.basis = j.at("basis").get<std::vector<std::string>>();
    for (const auto& e : j.at("invariants")) {
      SemiInvariant s;
      s.covector = rationals(e.at("covector"));
      s.cls = invariant_class_from_string(e.at("class").get<std::string>());
      s.lambda = parse_rational(e.at("lambda").get<std::string>());
      if (!e.at("bound").is_null()) s.bound = parse_rational(e.at("bound").get<std::string>());
      s.symbolic = e.at("symbolic").get<bool>();
      const auto& v = e.at("verified");
      s.verified.status = verification_status_from_string(v.at("status").get<std::string>());
      s.verified.trials = v.at("trials").get<std::size_t>();
      if (!v.at("counterexample").is_null()) {
        s.verified.state = rationals(v.at("counterexample").at("state"));
        s.verified.params = rationals(v.at("counterexample").at("params"));
      }
      s.provenance = e.at("provenance").get<std::string>();
      for (const auto& t : e.at("trace")) {
        DichotomyStep st;
        st.k = parse_rational(t.at("k").get<std::string>());
        st.min_lower = parse_rational(t.at("min_lower").get<std::string>());
        st.max_upper = parse_rational(t.at("max_upper").get<std::string>());
        st.accepted = t.at("accepted").get<bool>();
        st.phase = t.at("phase").get<std::string>();
        s.trace.push_back(std::move(st));
      }
      r.invariants.push_back(std::move(s));
    }
    r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    r.candidate_generation_ms = j.at("timings").at("candidate_generation_ms").get<double>();
    r.optimization_s = j.at("timings").at("optimization_s").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Syntax, std::string("malformed report: ") + e.what());
  }
  return r;
}

namespace {

class AcslChecker {
 public:
  explicit AcslChecker(std::string_view s) : s_(s) {}

  std::string relation() {
    try {
      sum();
      skip_ws();
      static const char* ops[] = {"<=", ">=", "==", "!=", "<", ">"};
      bool found = false;
      for (const char* op : ops)
        if (accept(op)) {
          found = true;
          break;
        }
      if (!found) return fail("expected a relational operator");
      sum();
      skip_ws();
      if (pos_ != s_.size()) return fail("trailing input");
    } catch (const std::string& e) {
      return e;
    }
    return {};
  }

 private:
  std::string fail(const std::string& what) const { return what + " at offset " + std::to_string(pos_); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip_ws();
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view tok) {
    if (!accept(tok)) throw fail("expected '" + std::string(tok) + "'");
  }

  void sum() {
    product();
    while (accept("+") || accept("-")) product();
  }

  void product() {
    unary();
    while (accept("*")) unary();
  }

  void unary() {
    if (accept("-")) return unary();
    atom();
  }

  void atom() {
    skip_ws();
    if (accept("\\abs")) {
      expect("(");
      sum();
      expect(")");
      return;
    }
    if (accept("\\at")) {
      expect("(");
      sum();
      expect(",");
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string_view label = s_.substr(start, pos_ - start);
      if (label != "LoopEntry" && label != "Pre" && label != "Here" && label != "Init")
        throw fail("unknown label '" + std::string(label) + "'");
      expect(")");
      return;
    }
    if (accept("(")) {
      sum();
      expect(")");
      return;
    }
    if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ < s_.size() && s_[pos_] == '.') {
        ++pos_;
        if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
          throw fail("malformed number");
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
      if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
        ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
        if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
          throw fail("malformed exponent");
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
      return;
    }
    if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      return;
    }
    throw fail("expected a term");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string validate_acsl(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    auto where = [&](const std::string& msg) { return "line " + std::to_string(line_no) + ": " + msg; };
    if (line.empty()) continue;
    if (line.rfind("/*@", 0) == 0) {
      std::size_t close = line.find("*/");
      if (close == std::string_view::npos) return where("unterminated annotation");
      std::string_view rest = line.substr(close + 2);
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      if (!rest.empty() && rest.rfind("//", 0) != 0) return where("unexpected text after annotation");
      std::string_view body = line.substr(3, close - 3);
      while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      while (!body.empty() && body.back() == ' ') body.remove_suffix(1);
      const std::string_view kw = "loop invariant ";
      if (body.rfind(kw, 0) != 0) return where("expected 'loop invariant'");
      body.remove_prefix(kw.size());
      if (body.empty() || body.back() != ';') return where("clause must end with ';'");
      body.remove_suffix(1);
      std::string err = AcslChecker(body).relation();
      if (!err.empty()) return where(err);
      continue;
    }
    if (line.rfind("/*", 0) == 0 && line.find("*/") != std::string_view::npos) continue;
    if (line.rfind("//", 0) == 0) continue;
    return where("not an annotation or comment");
  }
  return {};
}

}  // namespace pilat
