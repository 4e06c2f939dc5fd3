#pragma once

// Depth-bounded expansion of recursive definitions, and depth-indexed
// equality over expanded terms. Expansion maps finitary terms (surface
// spines, recursion-constant heads allowed) to canonical depth-k terms in
// which every recursion constant has been unfolded away and every spine is
// tagged continuing or suspended.

#include <cstddef>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

#include "colf/syntax.hpp"

namespace colf {

// Raised when expansion cannot proceed; `code` is a diagnostic code from
// diagnostics.hpp and `subject` names the definition involved when known.
struct ExpandError : std::runtime_error {
  ExpandError(const char* code_, std::string subject_, const std::string& what_)
      : std::runtime_error(what_), code(code_), subject(std::move(subject_)) {}
  const char* code;
  std::string subject;
};

class Expander {
 public:
  explicit Expander(const Signature& sig, std::size_t max_memo_entries = 1 << 20);

  // exp_k. Unfolds recursion constants by contracting their bodies; the head
  // reached after one contraction must be a constant (contractive bodies),
  // otherwise this throws.
  CanTerm expand_term(const CanTerm& m, Depth k);

  // Pi domains expand at the node depth; atomic-type index terms one lower.
  CanType expand_type(const CanType& a, Depth k);
  Kind expand_kind(const Kind& kd, Depth k);

  // Sigma(k): every family and constant with its kind/type expanded at k,
  // definitions dropped (their unfoldings are no longer mentionable).
  Signature expand_signature(Depth k);

  const Signature& signature() const { return sig_; }

  std::size_t memo_size() const;

 private:
  CanTerm contract(const Name& rec, const Spine& spine);
  // `unfolds` counts consecutive unfoldings with no constant in between;
  // exceeding the number of definitions means the chain loops.
  CanTerm expand_go(const CanTerm& m, Depth k, std::size_t unfolds);
  CanTerm expand_unfold(const NeutTerm& r, Depth k, std::size_t unfolds);

  const Signature& sig_;
  std::size_t max_memo_;
  std::size_t defs_count_ = 0;
  mutable std::mutex mu_;
  // Keyed by nullary recursion constant and depth; applied occurrences are
  // recontracted each time.
  std::unordered_map<std::string, std::unordered_map<Depth, CanTerm>> memo_;
};

// Depth-indexed equality of expanded terms: everything is equal at depth 0,
// the stub only matches itself above it, continuing elements compare at the
// same depth and suspended ones one lower.
bool eq_at_depth(const CanTerm& a, const CanTerm& b, Depth k);
bool eq_types_at_depth(const CanType& a, const CanType& b, Depth k);
bool eq_kinds_at_depth(const Kind& a, const Kind& b, Depth k);

}  // namespace colf
