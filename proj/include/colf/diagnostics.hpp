#pragma once

// Diagnostics shared by the parser, elaborator, validity checker and the
// depth-indexed checker. Rendering (text and JSON) is deterministic: items are
// sorted by source position, then code, then message.

#include <string>
#include <vector>

#include "colf/syntax.hpp"

namespace colf {

enum class Severity : std::uint8_t { Error, Warning, Note };

const char* severity_label(Severity s);

// Stable diagnostic codes. Free-form codes are allowed; these cover the ones
// tests pin down.
namespace code {
inline constexpr const char* syntax = "syntax";
inline constexpr const char* duplicate_declaration = "duplicate-declaration";
inline constexpr const char* undeclared_identifier = "undeclared-identifier";
inline constexpr const char* namespace_misuse = "namespace-misuse";
inline constexpr const char* cannot_infer_implicit = "cannot-infer-implicit";
inline constexpr const char* unification_mismatch = "unification-mismatch";
inline constexpr const char* occurs_check = "occurs-check";
inline constexpr const char* unsolved_hole = "unsolved-hole";
inline constexpr const char* implicit_shadowing = "implicit-shadowing";
inline constexpr const char* family_underapplied = "family-underapplied";
inline constexpr const char* family_overapplied = "family-overapplied";
inline constexpr const char* spine_arity = "spine-arity";
inline constexpr const char* neutral_against_pi = "neutral-against-pi";
inline constexpr const char* lambda_against_atomic = "lambda-against-atomic";
inline constexpr const char* type_mismatch = "type-mismatch";
inline constexpr const char* kind_mismatch = "kind-mismatch";
inline constexpr const char* undefined_substitution = "undefined-substitution";
inline constexpr const char* noncontractive_definition = "noncontractive-definition";
inline constexpr const char* invalid_cycle = "invalid-cycle";
inline constexpr const char* unbound_recursion = "unbound-recursion";
inline constexpr const char* internal_expansion = "internal-expansion";
}  // namespace code

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  SourceSpan span;
  // Judgment trail, outermost first; empty when not kernel-originated.
  std::vector<std::string> judgments;

  static Diagnostic error(std::string code, std::string message, SourceSpan span = {}) {
    return Diagnostic{Severity::Error, std::move(code), std::move(message), span, {}};
  }
};

bool any_errors(const std::vector<Diagnostic>& diags);

// Stable order: position, severity, code, message.
void sort_diagnostics(std::vector<Diagnostic>& diags);

// One line per diagnostic: "file:line:col: severity: message [code]". Color
// applies ANSI severity tints.
std::string render_text(const std::vector<Diagnostic>& diags, const std::string& file,
                        bool color);

// {"version": 1, "file": ..., "items": [{severity, code, line, col, endLine,
// endCol, message, judgment?}]}
std::string render_json(const std::vector<Diagnostic>& diags, const std::string& file);

}  // namespace colf
