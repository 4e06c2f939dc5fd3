#pragma once

// Erasure to simple types, simple typing at a depth, and hereditary
// substitution. Substitution is typing-agnostic: on inputs where no clause
// applies it returns nullopt (Undefined) instead of failing, and it terminates
// on all inputs by lexicographic induction on (simple type, depth, structure).

#include <optional>

#include "colf/syntax.hpp"

namespace colf {

// Simple-type assignment for heads (variables and constants).
struct SimpleContext {
  std::unordered_map<Name, SimpleType, NameHash> bind;

  const SimpleType* lookup(const Name& n) const {
    auto it = bind.find(n);
    return it == bind.end() ? nullptr : &it->second;
  }
  void add(Name n, SimpleType t) { bind.emplace(std::move(n), std::move(t)); }
};

// (Pi x:A. B)^o = A^o -> B^o, atomic ^o = *.
SimpleType erase(const CanType& a);

// Depth-indexed simple typing. Four rules: depth 0 accepts anything; lambdas
// split arrows; variable heads check spine elements at the same depth;
// constant heads check them one depth lower.
bool simple_type_check(const SimpleContext& ctx, const CanTerm& m, const SimpleType& tau,
                       Depth k);

// [n/x]^tau m at depth k. Surface spines are treated like continuing ones
// (their elements carry no depth discipline yet); callers contracting
// finitary terms pass a depth large enough that truncation never fires.
std::optional<CanTerm> subst_canonical(const CanTerm& n, const Name& x, const SimpleType& tau,
                                       const CanTerm& m, Depth k);

// Substitution into a neutral term. The result is canonical when the head is
// x (the spine collapses onto n); otherwise neutral with the same head.
std::optional<CanTerm> subst_neutral(const CanTerm& n, const Name& x, const SimpleType& tau,
                                     const NeutTerm& r, Depth k);

// Pointwise at depth k (continuing: elements at k).
std::optional<Spine> subst_spine_continuing(const CanTerm& n, const Name& x,
                                            const SimpleType& tau, const Spine& s, Depth k);

// Elements substituted at depth k-1 with n truncated to k-1; k >= 1.
std::optional<Spine> subst_spine_suspended(const CanTerm& n, const Name& x,
                                           const SimpleType& tau, const Spine& s, Depth k);

// t |>^tau n: apply a continuing spine to a term. Empty spine requires tau = *
// and a neutral target; each element consumes one arrow of tau.
std::optional<CanTerm> spine_apply(const Spine& t, const SimpleType& tau, const CanTerm& n,
                                   Depth k);

// Substitution into types, kinds and contexts. The node sits at `depth`; n is
// already truncated to depth-1. Embedded atomic-type spines behave like
// suspended spines (elements at depth-1).
std::optional<CanType> subst_cantype(const CanTerm& n, const Name& x, const SimpleType& tau,
                                     const CanType& a, Depth depth);
std::optional<AtomType> subst_atomtype(const CanTerm& n, const Name& x, const SimpleType& tau,
                                       const AtomType& p, Depth depth);
std::optional<Kind> subst_kind(const CanTerm& n, const Name& x, const SimpleType& tau,
                               const Kind& kd, Depth depth);
std::optional<Context> subst_context(const CanTerm& n, const Name& x, const SimpleType& tau,
                                     const Context& g, Depth depth);

}  // namespace colf
