#pragma once

// ACSL annotations and the JSON report.

#include <string>
#include <string_view>

#include "pilat/invariant_engine.hpp"

namespace pilat {

/// One `/*@ loop invariant ...; */` line per verified invariant, each
/// followed by a comment with the exact rational statement.
std::string emit_acsl(const InvariantReport& report);

/// The ACSL relation for one invariant, without the annotation wrapper.
std::string acsl_relation(const SemiInvariant& inv, const std::vector<std::string>& vars,
                          const std::vector<std::string>& basis_names);

std::string emit_json(const InvariantReport& report);
InvariantReport parse_json(std::string_view text);

/// Grammar check for the annotation lines produced by emit_acsl. Returns an
/// empty string when valid, else a description of the first problem.
std::string validate_acsl(std::string_view text);

}  // namespace pilat
