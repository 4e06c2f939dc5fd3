#pragma once

// Depth-indexed checking of expanded declarations. Lambda terms check against
// Pi telescopes, neutral terms synthesize a type from their head, and spine
// elements are checked at the depth dictated by the head class: variable
// heads continue at the same depth, constant heads guard their arguments one
// level lower. Depth 0 accepts everything.

#include <optional>
#include <string>
#include <vector>

#include "colf/diagnostics.hpp"
#include "colf/syntax.hpp"

namespace colf {

class Checker {
 public:
  // `sig` must hold expanded declarations; term heads resolve against it.
  Checker(const Signature& sig, std::vector<Diagnostic>& diags);

  // Source position attached to diagnostics from subsequent judgments.
  void set_span(SourceSpan s) { span_ = s; }

  bool check_term(const Context& G, const CanTerm& m, const CanType& a, Depth k);
  // Type synthesis for a neutral term; nullopt after reporting a diagnostic.
  std::optional<AtomType> infer_neutral(const Context& G, const NeutTerm& r, Depth k);
  bool check_type(const Context& G, const CanType& a, Depth k);
  bool check_kind(const Context& G, const Kind& kd, Depth k);

 private:
  friend struct TrailFrame;

  bool fail(const char* code_, std::string msg);
  std::optional<CanType> spine_step(const Context& G, const CanType& pi, const CanTerm& elem,
                                    Depth elem_depth, Depth node_depth, const Name& head);

  const Signature& sig_;
  std::vector<Diagnostic>& diags_;
  std::vector<std::string> trail_;
  SourceSpan span_{};
};

// Expands every declaration to depth k and checks it, recovering per
// declaration. Definition bodies are expanded and checked against their
// expanded declared types. The result is empty iff the signature checks
// cleanly at depth k.
std::vector<Diagnostic> check_signature(const Signature& sig, Depth k,
                                        std::size_t max_memo_entries = std::size_t{1} << 20);

}  // namespace colf
