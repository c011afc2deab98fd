#include "pilat/loop_ir.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <functional>
#include <set>
#include <sstream>

namespace pilat {

Expr Expr::constant(Rational v, SourceLoc loc) {
  Expr e;
  e.kind = Kind::Constant;
  e.value = std::move(v);
  e.loc = loc;
  return e;
}

Expr Expr::variable(std::string name, SourceLoc loc) {
  Expr e;
  e.kind = Kind::Variable;
  e.name = std::move(name);
  e.loc = loc;
  return e;
}

Expr Expr::parameter(std::string name, SourceLoc loc) {
  Expr e;
  e.kind = Kind::Parameter;
  e.name = std::move(name);
  e.loc = loc;
  return e;
}

Expr Expr::add(Expr a, Expr b, SourceLoc loc) {
  Expr e;
  e.kind = Kind::Add;
  e.args.push_back(std::move(a));
  e.args.push_back(std::move(b));
  e.loc = loc;
  return e;
}

Expr Expr::mul(Expr a, Expr b, SourceLoc loc) {
  Expr e;
  e.kind = Kind::Mul;
  e.args.push_back(std::move(a));
  e.args.push_back(std::move(b));
  e.loc = loc;
  return e;
}

std::optional<std::size_t> Program::var_index(std::string_view name) const {
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (vars[i] == name) return i;
  return std::nullopt;
}

const ParamDecl* Program::find_param(std::string_view name) const {
  for (const auto& p : params)
    if (p.name == name) return &p;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { Ident, Number, Sym, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    SourceLoc loc{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), loc});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      out.push_back({Tok::Number, std::string(src.substr(i, j - i)), loc});
      advance(j - i);
      continue;
    }
    if (c == ':' && i + 1 < src.size() && src[i + 1] == '=') {
      out.push_back({Tok::Sym, ":=", loc});
      advance(2);
      continue;
    }
    if (std::string_view("()[],;+-*=").find(c) != std::string_view::npos) {
      out.push_back({Tok::Sym, std::string(1, c), loc});
      advance(1);
      continue;
    }
    throw Error(ErrorKind::Syntax, std::string("unexpected character '") + c + "'", loc);
  }
  out.push_back({Tok::End, "", {line, col}});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::string_view src, const ParseOptions& options) : toks_(lex(src)), options_(options) {}

  Program run() {
    parse_headers();
    expect_ident("while");
    expect_sym("*");
    expect_ident("do");
    while (!peek_ident("done")) {
      if (peek().kind == Tok::End) fail(peek(), "expected 'done'");
      parse_statement();
    }
    expect_ident("done");
    if (peek_ident("while")) throw Error(ErrorKind::Unsupported, "only a single loop is supported", peek().loc);
    if (peek().kind != Tok::End) fail(peek(), "unexpected input after 'done'");
    classify_variables();
    bind_nondet();
    return std::move(prog_);
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  [[noreturn]] void fail(const Token& t, const std::string& what) {
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw Error(ErrorKind::Syntax, what + ", got " + got, t.loc);
  }

  bool peek_ident(std::string_view word) const { return peek().kind == Tok::Ident && peek().text == word; }
  bool peek_sym(std::string_view s) const { return peek().kind == Tok::Sym && peek().text == s; }
  bool accept_sym(std::string_view s) {
    if (!peek_sym(s)) return false;
    ++pos_;
    return true;
  }
  void expect_sym(std::string_view s) {
    if (!accept_sym(s)) fail(peek(), "expected '" + std::string(s) + "'");
  }
  void expect_ident(std::string_view word) {
    if (!peek_ident(word)) fail(peek(), "expected '" + std::string(word) + "'");
    ++pos_;
  }

  static bool is_keyword(std::string_view s) {
    static const std::set<std::string_view> kw{"while", "do", "done", "skip", "init", "in", "param",
                                               "var", "non_det", "int", "if", "then", "else"};
    return kw.count(s) > 0;
  }

  std::string expect_name() {
    const Token& t = peek();
    if (t.kind != Tok::Ident || is_keyword(t.text)) fail(t, "expected identifier");
    ++pos_;
    return t.text;
  }

  Rational number() {
    bool negative = accept_sym("-");
    const Token& t = peek();
    if (t.kind != Tok::Number) fail(t, "expected number");
    ++pos_;
    Rational v = parse_rational(t.text);
    return negative ? Rational(-v) : v;
  }

  void declare_var(const std::string& name, SourceLoc loc) {
    if (prog_.find_param(name)) throw Error(ErrorKind::Syntax, "'" + name + "' is already a parameter", loc);
    if (!prog_.var_index(name)) prog_.vars.push_back(name);
  }

  void parse_headers() {
    while (true) {
      if (peek_ident("var")) {
        ++pos_;
        do {
          SourceLoc loc = peek().loc;
          declare_var(expect_name(), loc);
        } while (accept_sym(","));
      } else if (peek_ident("param")) {
        ++pos_;
        SourceLoc loc = peek().loc;
        std::string name = expect_name();
        if (prog_.find_param(name) || prog_.var_index(name))
          throw Error(ErrorKind::Syntax, "duplicate declaration of '" + name + "'", loc);
        expect_ident("in");
        auto [lo, hi] = interval(loc);
        prog_.params.push_back({name, lo, hi, ParamOrigin::Declared});
      } else if (peek_ident("init")) {
        ++pos_;
        SourceLoc loc = peek().loc;
        std::string name = expect_name();
        declare_var(name, loc);
        InitConstraint c{name, 0, 0};
        if (accept_sym("=")) {
          c.lower = c.upper = number();
        } else {
          expect_ident("in");
          std::tie(c.lower, c.upper) = interval(loc);
        }
        auto it = std::find_if(prog_.init.begin(), prog_.init.end(), [&](const auto& x) { return x.var == name; });
        if (it != prog_.init.end()) *it = c;
        else prog_.init.push_back(c);
      } else {
        return;
      }
      accept_sym(";");
    }
  }

  std::pair<Rational, Rational> interval(SourceLoc loc) {
    expect_sym("[");
    Rational lo = number();
    expect_sym(",");
    Rational hi = number();
    expect_sym("]");
    if (lo > hi) throw Error(ErrorKind::Syntax, "empty interval [" + to_exact_string(lo) + ", " + to_exact_string(hi) + "]", loc);
    return {lo, hi};
  }

  void parse_statement() {
    const Token& t = peek();
    if (peek_ident("while")) throw Error(ErrorKind::Unsupported, "nested loops are not supported", t.loc);
    if (peek_ident("if")) throw Error(ErrorKind::Unsupported, "conditional statements are not supported", t.loc);
    Assignment a;
    a.loc = t.loc;
    if (peek_ident("skip")) {
      ++pos_;
      expect_sym(";");
      prog_.body.push_back(std::move(a));
      return;
    }
    if (accept_sym("(")) {
      do a.targets.push_back(expect_name());
      while (accept_sym(","));
      expect_sym(")");
      expect_sym(":=");
      expect_sym("(");
      do a.rhs.push_back(expr());
      while (accept_sym(","));
      expect_sym(")");
      if (a.rhs.size() != a.targets.size())
        throw Error(ErrorKind::Syntax, "assignment has " + std::to_string(a.targets.size()) + " targets but " +
                                           std::to_string(a.rhs.size()) + " expressions", a.loc);
    } else {
      a.targets.push_back(expect_name());
      expect_sym(":=");
      a.rhs.push_back(expr());
    }
    expect_sym(";");
    std::set<std::string> seen;
    for (const auto& target : a.targets) {
      if (!seen.insert(target).second) throw Error(ErrorKind::Syntax, "'" + target + "' assigned twice", a.loc);
      if (prog_.find_param(target)) throw Error(ErrorKind::Syntax, "cannot assign parameter '" + target + "'", a.loc);
    }
    prog_.body.push_back(std::move(a));
  }

  Expr expr() {
    Expr acc = term();
    while (true) {
      SourceLoc loc = peek().loc;
      if (accept_sym("+")) {
        acc = Expr::add(std::move(acc), term(), loc);
      } else if (accept_sym("-")) {
        Expr rhs = negate(term(), loc);
        acc = Expr::add(std::move(acc), std::move(rhs), loc);
        acc.subtraction = true;
      } else {
        return acc;
      }
    }
  }

  static Expr negate(Expr e, SourceLoc loc) {
    Expr n = Expr::mul(Expr::constant(-1, loc), std::move(e), loc);
    n.negation = true;
    return n;
  }

  Expr term() {
    Expr acc = unary();
    while (true) {
      SourceLoc loc = peek().loc;
      if (!accept_sym("*")) return acc;
      acc = Expr::mul(std::move(acc), unary(), loc);
    }
  }

  Expr unary() {
    SourceLoc loc = peek().loc;
    if (accept_sym("-")) {
      if (peek().kind == Tok::Number) {
        Rational v = parse_rational(next().text);
        return Expr::constant(-v, loc);
      }
      return negate(unary(), loc);
    }
    return primary();
  }

  Expr primary() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      ++pos_;
      return Expr::constant(parse_rational(t.text), t.loc);
    }
    if (accept_sym("(")) {
      Expr inner = expr();
      expect_sym(")");
      return inner;
    }
    if (peek_ident("non_det")) {
      ++pos_;
      expect_sym("(");
      Expr e;
      e.kind = Expr::Kind::NonDet;
      e.loc = t.loc;
      e.args.push_back(expr());
      expect_sym(",");
      e.args.push_back(expr());
      expect_sym(")");
      return e;
    }
    if (peek_ident("int")) {
      ++pos_;
      expect_sym("(");
      Expr e;
      e.kind = Expr::Kind::Cast;
      e.loc = t.loc;
      e.args.push_back(expr());
      expect_sym(")");
      return e;
    }
    if (t.kind == Tok::Ident && !is_keyword(t.text)) {
      ++pos_;
      if (prog_.find_param(t.text)) return Expr::parameter(t.text, t.loc);
      return Expr::variable(t.text, t.loc);
    }
    fail(t, "expected expression");
  }

  // State variables: declared ones, plus those read before being written.
  // Temporaries: assigned, undeclared, first access is a write.
  void classify_variables() {
    std::set<std::string> declared(prog_.vars.begin(), prog_.vars.end());
    std::set<std::string> assigned;
    for (const auto& a : prog_.body) assigned.insert(a.targets.begin(), a.targets.end());
    std::set<std::string> written;
    std::set<std::string> temps;
    std::function<void(const Expr&)> reads = [&](const Expr& e) {
      if (e.kind == Expr::Kind::Variable) {
        if (declared.count(e.name) || written.count(e.name)) return;
        if (!assigned.count(e.name))
          throw Error(ErrorKind::UndeclaredVariable, "use of undeclared variable '" + e.name + "'", e.loc);
        declared.insert(e.name);
        prog_.vars.push_back(e.name);
      }
      for (const auto& c : e.args) reads(c);
    };
    for (const auto& a : prog_.body) {
      for (const auto& e : a.rhs) reads(e);
      for (const auto& target : a.targets) {
        if (!declared.count(target) && !written.count(target)) temps.insert(target);
        written.insert(target);
      }
    }
    for (const auto& a : prog_.body)
      for (const auto& target : a.targets)
        if (temps.count(target) && !declared.count(target) &&
            std::find(prog_.temporaries.begin(), prog_.temporaries.end(), target) == prog_.temporaries.end())
          prog_.temporaries.push_back(target);
  }

  static std::optional<Rational> const_eval(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Constant: return e.value;
      case Expr::Kind::Add: {
        auto a = const_eval(e.args[0]), b = const_eval(e.args[1]);
        if (a && b) return *a + *b;
        return std::nullopt;
      }
      case Expr::Kind::Mul: {
        auto a = const_eval(e.args[0]), b = const_eval(e.args[1]);
        if (a && b) return *a * *b;
        return std::nullopt;
      }
      default: return std::nullopt;
    }
  }

  void bind_nondet() {
    std::set<std::string> taken(prog_.vars.begin(), prog_.vars.end());
    taken.insert(prog_.temporaries.begin(), prog_.temporaries.end());
    for (const auto& p : prog_.params) taken.insert(p.name);
    std::set<std::string> temps(prog_.temporaries.begin(), prog_.temporaries.end());
    std::size_t site = 0;
    int fresh = 0;
    auto fresh_name = [&]() {
      while (true) {
        std::string name = fresh == 0 ? "N" : "N" + std::to_string(fresh);
        ++fresh;
        if (taken.insert(name).second) return name;
      }
    };
    std::set<std::string> temp_named;
    std::function<void(Expr&, const std::string*)> visit = [&](Expr& e, const std::string* owner) {
      for (auto& c : e.args) visit(c, nullptr);
      if (e.kind != Expr::Kind::NonDet) return;
      const std::size_t this_site = site++;
      auto lo = const_eval(e.args[0]);
      auto hi = const_eval(e.args[1]);
      if (!lo || !hi) {
        auto it = options_.envelopes.find(this_site);
        if (it == options_.envelopes.end())
          throw Error(ErrorKind::Unsupported,
                      "non_det call #" + std::to_string(this_site) +
                          " has non-constant arguments; configure a constant envelope for it",
                      e.loc);
        lo = it->second.first;
        hi = it->second.second;
      }
      if (*lo > *hi) throw Error(ErrorKind::Syntax, "non_det lower bound exceeds upper bound", e.loc);
      std::string name;
      if (owner && temps.count(*owner) && temp_named.insert(*owner).second) {
        name = *owner;
      } else {
        name = fresh_name();
      }
      e.name = name;
      prog_.params.push_back({name, *lo, *hi, ParamOrigin::NonDet});
    };
    for (auto& a : prog_.body)
      for (std::size_t i = 0; i < a.rhs.size(); ++i) {
        const std::string* owner = a.targets.size() == 1 && a.rhs[i].kind == Expr::Kind::NonDet ? &a.targets[i] : nullptr;
        visit(a.rhs[i], owner);
      }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const ParseOptions& options_;
  Program prog_;
};

// ---------------------------------------------------------------------------
// Printing

int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Add: return 1;
    case Expr::Kind::Mul: return e.negation ? 3 : 2;
    case Expr::Kind::Constant: return e.value < 0 ? 3 : 4;
    default: return 4;
  }
}

std::string print(const Expr& e) {
  auto wrap = [](const Expr& child, bool parens) {
    std::string s = print(child);
    return parens ? "(" + s + ")" : s;
  };
  switch (e.kind) {
    case Expr::Kind::Constant: return to_exact_string(e.value);
    case Expr::Kind::Variable:
    case Expr::Kind::Parameter: return e.name;
    case Expr::Kind::NonDet: return "non_det(" + print(e.args[0]) + ", " + print(e.args[1]) + ")";
    case Expr::Kind::Cast: return "int(" + print(e.args[0]) + ")";
    case Expr::Kind::Mul:
      if (e.negation) return "-" + wrap(e.args[1], precedence(e.args[1]) < 3);
      return wrap(e.args[0], precedence(e.args[0]) < 2) + "*" + wrap(e.args[1], precedence(e.args[1]) <= 2);
    case Expr::Kind::Add:
      if (e.subtraction && e.args[1].kind == Expr::Kind::Mul && e.args[1].negation) {
        const Expr& b = e.args[1].args[1];
        return print(e.args[0]) + " - " + wrap(b, precedence(b) <= 1);
      }
      return print(e.args[0]) + " + " + wrap(e.args[1], precedence(e.args[1]) <= 1);
  }
  return "";
}

}  // namespace

Program parse_program(std::string_view source, const ParseOptions& options) {
  return Parser(source, options).run();
}

std::string to_source(const Expr& e) { return print(e); }

std::string to_source(const Program& p) {
  std::ostringstream out;
  if (!p.vars.empty()) {
    out << "var ";
    for (std::size_t i = 0; i < p.vars.size(); ++i) out << (i ? ", " : "") << p.vars[i];
    out << "\n";
  }
  for (const auto& param : p.params) {
    if (param.origin == ParamOrigin::NonDet) continue;
    out << "param " << param.name << " in [" << to_exact_string(param.lower) << ", " << to_exact_string(param.upper)
        << "]\n";
  }
  for (const auto& c : p.init) {
    if (c.is_point()) out << "init " << c.var << " = " << to_exact_string(c.lower) << "\n";
    else out << "init " << c.var << " in [" << to_exact_string(c.lower) << ", " << to_exact_string(c.upper) << "]\n";
  }
  out << "while * do\n";
  for (const auto& a : p.body) {
    out << "  ";
    if (a.is_skip()) {
      out << "skip;\n";
      continue;
    }
    if (a.targets.size() == 1) {
      out << a.targets[0] << " := " << print(a.rhs[0]) << ";\n";
      continue;
    }
    out << "(";
    for (std::size_t i = 0; i < a.targets.size(); ++i) out << (i ? ", " : "") << a.targets[i];
    out << ") := (";
    for (std::size_t i = 0; i < a.rhs.size(); ++i) out << (i ? ", " : "") << print(a.rhs[i]);
    out << ");\n";
  }
  out << "done\n";
  return out.str();
}

std::string program_digest(const Program& p) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : to_source(p)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

// ---------------------------------------------------------------------------
// Composition and interpretation

std::vector<std::string> SimultaneousMap::symbol_names() const {
  std::vector<std::string> names = vars;
  for (const auto& p : params) names.push_back(p.name);
  return names;
}

std::vector<Rational> SimultaneousMap::apply(std::span<const Rational> state, std::span<const Rational> param_values) const {
  std::vector<Rational> point(state.begin(), state.end());
  point.insert(point.end(), param_values.begin(), param_values.end());
  std::vector<Rational> out;
  out.reserve(updates.size());
  for (const auto& u : updates) out.push_back(u.evaluate(point));
  return out;
}

namespace {

template <typename Value, typename Ops>
Value eval_expr(const Expr& e, const std::map<std::string, Value>& env, const Ops& ops) {
  switch (e.kind) {
    case Expr::Kind::Constant: return ops.constant(e.value);
    case Expr::Kind::Variable: {
      auto it = env.find(e.name);
      if (it == env.end()) throw Error(ErrorKind::UndeclaredVariable, "variable '" + e.name + "' has no value", e.loc);
      return it->second;
    }
    case Expr::Kind::Parameter: return ops.param(e.name);
    case Expr::Kind::NonDet: return ops.nondet(e, env);
    case Expr::Kind::Cast: return eval_expr(e.args[0], env, ops);
    case Expr::Kind::Add: return eval_expr(e.args[0], env, ops) + eval_expr(e.args[1], env, ops);
    case Expr::Kind::Mul: return eval_expr(e.args[0], env, ops) * eval_expr(e.args[1], env, ops);
  }
  throw std::logic_error("unhandled expression kind");
}

template <typename Value, typename Ops>
std::map<std::string, Value> run_body(const Program& p, std::map<std::string, Value> env, const Ops& ops) {
  for (const auto& a : p.body) {
    std::vector<Value> values;
    values.reserve(a.rhs.size());
    for (const auto& e : a.rhs) values.push_back(eval_expr(e, env, ops));
    for (std::size_t i = 0; i < a.targets.size(); ++i) env.insert_or_assign(a.targets[i], std::move(values[i]));
  }
  return env;
}

std::size_t param_position(const Program& p, std::string_view name) {
  for (std::size_t i = 0; i < p.params.size(); ++i)
    if (p.params[i].name == name) return i;
  throw Error(ErrorKind::UndeclaredVariable, "unknown parameter '" + std::string(name) + "'");
}

}  // namespace

SimultaneousMap compose(const Program& p) {
  SimultaneousMap m;
  m.vars = p.vars;
  m.params = p.params;
  const std::size_t n = m.arity();
  std::map<std::string, Polynomial> env;
  for (std::size_t i = 0; i < p.vars.size(); ++i) env.emplace(p.vars[i], Polynomial::symbol(n, i));
  struct Ops {
    const Program& p;
    std::size_t n;
    Polynomial constant(const Rational& v) const { return Polynomial::constant(n, v); }
    Polynomial param(const std::string& name) const {
      return Polynomial::symbol(n, p.vars.size() + param_position(p, name));
    }
    Polynomial nondet(const Expr& e, const std::map<std::string, Polynomial>&) const { return param(e.name); }
  } ops{p, n};
  env = run_body(p, std::move(env), ops);
  for (const auto& v : p.vars) m.updates.push_back(env.at(v));
  return m;
}

std::vector<Rational> execute(const Program& p, std::span<const Rational> state,
                              std::span<const Rational> param_values, bool* admissible) {
  if (state.size() != p.vars.size() || param_values.size() != p.params.size())
    throw Error(ErrorKind::DimensionMismatch, "execute: state or parameter tuple has the wrong length");
  std::map<std::string, Rational> env;
  for (std::size_t i = 0; i < p.vars.size(); ++i) env.emplace(p.vars[i], state[i]);
  struct Ops {
    const Program& p;
    std::span<const Rational> values;
    bool* admissible;
    Rational constant(const Rational& v) const { return v; }
    Rational param(const std::string& name) const { return values[param_position(p, name)]; }
    Rational nondet(const Expr& e, const std::map<std::string, Rational>& env) const {
      Rational v = param(e.name);
      if (admissible) {
        const ParamDecl& decl = p.params[param_position(p, e.name)];
        Rational lo = decl.lower, hi = decl.upper;
        try {
          lo = eval_expr(e.args[0], env, *this);
          hi = eval_expr(e.args[1], env, *this);
        } catch (const Error&) {
        }
        if (v < lo || v > hi) *admissible = false;
      }
      return v;
    }
  } ops{p, param_values, admissible};
  env = run_body(p, std::move(env), ops);
  std::vector<Rational> out;
  out.reserve(p.vars.size());
  for (const auto& v : p.vars) out.push_back(env.at(v));
  return out;
}

// ---------------------------------------------------------------------------
// Solvability

namespace {

// Checks the block form for one variable's update; returns false on violation.
bool block_form_ok(const Polynomial& update, std::size_t nvars, const std::vector<int>& block_of, int block) {
  for (const auto& [e, c] : update.terms()) {
    unsigned in_block = 0;
    bool others = false;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      if (i < nvars && block_of[i] == block) in_block += e[i];
      else if (i < nvars && block_of[i] > block) return false;
      else if (i < nvars) others = true;  // parameter factors only scale the linear part
    }
    if (in_block >= 2) return false;
    if (in_block == 1 && others) return false;
  }
  return true;
}

std::string assignment_text(const SimultaneousMap& map, std::size_t v) {
  auto names = map.symbol_names();
  return map.vars[v] + " := " + map.updates[v].to_string(names);
}

}  // namespace

SolvablePartition validate_solvable(const SimultaneousMap& map) {
  const std::size_t n = map.vars.size();
  SolvablePartition part;
  if (n == 0) return part;
  // Affine maps with constant linear coefficients form a single block.
  std::vector<int> single(n, 0);
  bool affine = true;
  for (std::size_t v = 0; v < n && affine; ++v) affine = block_form_ok(map.updates[v], n, single, 0);
  if (affine) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    part.blocks.push_back(std::move(all));
    return part;
  }
  // Dependency graph v -> u when u occurs in v's update; Tarjan emits SCCs
  // after everything they depend on.
  std::vector<std::vector<std::size_t>> deps(n);
  for (std::size_t v = 0; v < n; ++v)
    for (const auto& [e, c] : map.updates[v].terms())
      for (std::size_t u = 0; u < n; ++u)
        if (e[u] > 0 && std::find(deps[v].begin(), deps[v].end(), u) == deps[v].end()) deps[v].push_back(u);
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  int counter = 0;
  std::function<void(std::size_t)> strong = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t u : deps[v]) {
      if (index[u] < 0) {
        strong(u);
        low[v] = std::min(low[v], low[u]);
      } else if (on_stack[u]) {
        low[v] = std::min(low[v], index[u]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> block;
      while (true) {
        std::size_t w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        block.push_back(w);
        if (w == v) break;
      }
      std::sort(block.begin(), block.end());
      part.blocks.push_back(std::move(block));
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] < 0) strong(v);
  std::vector<int> block_of(n, 0);
  for (std::size_t b = 0; b < part.blocks.size(); ++b)
    for (std::size_t v : part.blocks[b]) block_of[v] = static_cast<int>(b);
  for (std::size_t b = 0; b < part.blocks.size(); ++b)
    for (std::size_t v : part.blocks[b])
      if (!block_form_ok(map.updates[v], n, block_of, static_cast<int>(b)))
        throw Error(ErrorKind::NotSolvable,
                    "assignment is not solvable (no admissible variable ordering): " + assignment_text(map, v));
  return part;
}

// ---------------------------------------------------------------------------
// Rounding noise

FloatModel FloatModel::real() { return {FloatKind::Real, 0}; }

FloatModel FloatModel::single_precision() {
  Rational eps(Integer(1), Integer(1) << 23);
  return {FloatKind::Single, eps};
}

FloatModel FloatModel::double_precision() {
  Rational eps(Integer(1), Integer(1) << 52);
  return {FloatKind::Double, eps};
}

FloatModel float_model_from_string(std::string_view name) {
  if (name == "real") return FloatModel::real();
  if (name == "single" || name == "float") return FloatModel::single_precision();
  if (name == "double") return FloatModel::double_precision();
  throw Error(ErrorKind::Syntax, "unknown float model '" + std::string(name) + "'");
}

const char* to_string(FloatKind kind) {
  switch (kind) {
    case FloatKind::Real: return "real";
    case FloatKind::Single: return "single";
    case FloatKind::Double: return "double";
  }
  return "real";
}

namespace {

struct RatInterval {
  Rational lo, hi;
  Rational magnitude() const { return std::max(abs(lo), abs(hi)); }
  friend RatInterval operator+(const RatInterval& a, const RatInterval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
  friend RatInterval operator*(const RatInterval& a, const RatInterval& b) {
    Rational c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
  }
};

class NoiseInjector {
 public:
  NoiseInjector(Program& p, const FloatModel& model, const MagnitudeConfig& cfg) : p_(p), model_(model), cfg_(cfg) {
    for (const auto& param : p_.params) taken_.insert(param.name);
    taken_.insert(p_.vars.begin(), p_.vars.end());
    taken_.insert(p_.temporaries.begin(), p_.temporaries.end());
  }

  void run() {
    std::map<std::string, RatInterval> env;
    for (const auto& c : p_.init) env[c.var] = {c.lower, c.upper};
    for (auto& a : p_.body) {
      std::vector<std::optional<RatInterval>> values;
      for (auto& e : a.rhs) values.push_back(wrap(e, env));
      for (std::size_t i = 0; i < a.targets.size(); ++i) {
        if (values[i]) env[a.targets[i]] = *values[i];
        else env.erase(a.targets[i]);
      }
    }
  }

 private:
  std::optional<RatInterval> param_interval(const std::string& name) const {
    if (const ParamDecl* d = p_.find_param(name)) return RatInterval{d->lower, d->upper};
    return std::nullopt;
  }

  std::optional<RatInterval> wrap(Expr& e, const std::map<std::string, RatInterval>& env) {
    std::optional<RatInterval> value;
    switch (e.kind) {
      case Expr::Kind::Constant: return RatInterval{e.value, e.value};
      case Expr::Kind::Variable: {
        auto it = env.find(e.name);
        if (it == env.end()) return std::nullopt;
        return it->second;
      }
      case Expr::Kind::Parameter:
      case Expr::Kind::NonDet: return param_interval(e.name);
      case Expr::Kind::Cast: value = wrap(e.args[0], env); break;
      case Expr::Kind::Add:
      case Expr::Kind::Mul: {
        auto a = wrap(e.args[0], env);
        auto b = wrap(e.args[1], env);
        if (a && b) value = e.kind == Expr::Kind::Add ? *a + *b : *a * *b;
        if (e.kind == Expr::Kind::Mul && e.negation) return value;
        break;
      }
    }
    const std::size_t site = site_++;
    Rational lo, hi;
    if (e.kind == Expr::Kind::Cast) {
      lo = -1;
      hi = 1;
    } else {
      Rational bound;
      if (auto it = cfg_.per_site.find(site); it != cfg_.per_site.end()) bound = it->second;
      else if (cfg_.default_bound) bound = *cfg_.default_bound;
      else if (value) bound = value->magnitude();
      else
        throw Error(ErrorKind::MissingMagnitudeBound,
                    "no magnitude bound for rounding site #" + std::to_string(site) + " (" + to_source(e) +
                        "); configure one or give an initial region",
                    e.loc);
      hi = model_.epsilon * bound;
      lo = -hi;
    }
    std::string name = fresh();
    p_.params.push_back({name, lo, hi, ParamOrigin::Rounding});
    SourceLoc loc = e.loc;
    e = Expr::add(std::move(e), Expr::parameter(name, loc), loc);
    if (value) value = *value + RatInterval{lo, hi};
    return value;
  }

  std::string fresh() {
    while (true) {
      std::string name = "rnd" + std::to_string(counter_++);
      if (taken_.insert(name).second) return name;
    }
  }

  Program& p_;
  const FloatModel& model_;
  const MagnitudeConfig& cfg_;
  std::set<std::string> taken_;
  std::size_t site_ = 0;
  int counter_ = 0;
};

}  // namespace

Program inject_rounding_noise(const Program& p, const FloatModel& model, const MagnitudeConfig& cfg) {
  if (model.kind == FloatKind::Real) return p;
  Program out = p;
  NoiseInjector(out, model, cfg).run();
  return out;
}

}  // namespace pilat
