#pragma once

// parse -> solvability -> rounding noise -> lift -> invariants -> simulation -> emit

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pilat/invariant_engine.hpp"
#include "pilat/lift.hpp"
#include "pilat/loop_ir.hpp"
#include "pilat/poly_opt.hpp"

namespace pilat {

enum class Mode { Exact, Convergent, Divergent, All };
enum class OutputFormat { Acsl, Json, Both };

Mode mode_from_string(std::string_view s);
OutputFormat output_format_from_string(std::string_view s);

/// "x=1.5" or "x=[-1,1]".
InitConstraint parse_init_assignment(std::string_view text);

struct Config {
  int degree = 1;
  FloatModel float_model = FloatModel::real();
  DichotomyConfig dichotomy;
  std::vector<InitConstraint> init;  // overrides the program's init lines per variable
  Mode mode = Mode::All;
  OutputFormat output = OutputFormat::Acsl;
  std::size_t trials = 100000;
  std::uint64_t seed = 1;
  std::optional<Rational> magnitude_bound;
  std::size_t monomial_cap = kDefaultMonomialCap;
  bool override_precheck = false;
  /// Lists floating-point eigenpairs the exact path skips, as diagnostics only.
  bool approximate_eigenpairs = false;
};

struct AnalysisResult {
  int exit_code = 1;
  InvariantReport report;
  std::string acsl;
  std::string json;
  std::string error;  // rendered, for exit code 1
};

/// Never throws for analysis errors; they become exit code 1.
AnalysisResult analyze_source(const Config& cfg, std::string_view source);

/// Reads `path`, writes the requested artifacts to `out` and errors to `err`.
int run_analysis(const Config& cfg, const std::string& path, std::ostream& out, std::ostream& err);

}  // namespace pilat
