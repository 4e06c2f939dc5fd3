#include <sstream>

#include "colf/substitution.hpp"
#include "colf/typecheck.hpp"
#include "colf/unfolding.hpp"

namespace colf {

namespace {

struct TrailFrame {
  std::vector<std::string>& trail;
  TrailFrame(std::vector<std::string>& t, std::string s) : trail(t) {
    trail.push_back(std::move(s));
  }
  ~TrailFrame() { trail.pop_back(); }
};

NameSet context_names(const Context& G) {
  NameSet out;
  for (const auto& [x, a] : G.entries) out.insert(x);
  return out;
}

std::string at_depth(Depth k) { return " at depth " + std::to_string(k); }

}  // namespace

Checker::Checker(const Signature& sig, std::vector<Diagnostic>& diags)
    : sig_(sig), diags_(diags) {}

bool Checker::fail(const char* code_, std::string msg) {
  Diagnostic d = Diagnostic::error(code_, std::move(msg), span_);
  d.judgments = trail_;
  diags_.push_back(std::move(d));
  return false;
}

bool Checker::check_term(const Context& G, const CanTerm& m, const CanType& a, Depth k) {
  if (k == 0) return true;
  if (m.is_stub()) {
    return fail(code::type_mismatch,
                "unobservable term where depth " + std::to_string(k) + " demands structure");
  }
  if (m.is_lambda()) {
    if (!a.is_pi()) {
      return fail(code::lambda_against_atomic,
                  "abstraction checked against the atomic type '" + show_type(a) + "'");
    }
    const Name& x = m.binders().front();
    NameSupply supply(all_names(m));
    supply.avoid_all(all_names_type(a));
    supply.avoid_all(context_names(G));
    Name z = supply.fresh(x.text);
    std::vector<Name> rest(m.binders().begin() + 1, m.binders().end());
    CanTerm body = rename_free_var(CanTerm::make(std::move(rest), m.neutral()), x, z);
    CanType cod = rename_free_var_type(a.codomain(), a.binder(), z);
    TrailFrame f(trail_, "under the binder '" + z.text + "'" + at_depth(k));
    return check_term(G.extended(z, a.domain()), body, cod, k);
  }
  if (a.is_pi()) {
    return fail(code::neutral_against_pi,
                "neutral term '" + show_neut(m.neutral()) + "' checked against the function type '" +
                    show_type(a) + "'");
  }
  auto got = infer_neutral(G, m.neutral(), k);
  if (!got) return false;
  if (!eq_types_at_depth(CanType::atom(*got), a, k)) {
    return fail(code::type_mismatch, "'" + show_neut(m.neutral()) + "' has type '" +
                                         show_type(CanType::atom(*got)) + "' but '" + show_type(a) +
                                         "' is expected" + at_depth(k));
  }
  return true;
}

std::optional<CanType> Checker::spine_step(const Context& G, const CanType& pi,
                                           const CanTerm& elem, Depth elem_depth,
                                           Depth node_depth, const Name& head) {
  if (!check_term(G, elem, pi.domain(), elem_depth)) return std::nullopt;
  CanTerm n = truncate(elem, elem_depth, node_depth == 0 ? 0 : node_depth - 1);
  auto r = subst_cantype(n, pi.binder(), erase(pi.domain()), pi.codomain(), node_depth);
  if (!r) {
    fail(code::undefined_substitution,
         "substituting an argument of '" + head.text + "' into its result type is undefined");
    return std::nullopt;
  }
  return *r;
}

std::optional<AtomType> Checker::infer_neutral(const Context& G, const NeutTerm& r, Depth k) {
  TrailFrame f(trail_, "synthesizing a type for '" + r.head.text + "'" + at_depth(k));

  CanType ty;
  Depth elem_depth = k;
  switch (r.head.kind) {
    case NameKind::Variable: {
      const CanType* a = G.lookup(r.head);
      if (!a) {
        fail(code::undeclared_identifier, "variable '" + r.head.text + "' is not in scope");
        return std::nullopt;
      }
      if (r.spine.kind != SpineKind::Continuing && !r.spine.elems.empty()) {
        fail(code::internal_expansion,
             "variable-headed spine is not in expanded form (tag " +
                 std::string(spine_kind_label(r.spine.kind)) + ")");
        return std::nullopt;
      }
      ty = *a;
      elem_depth = k;
      break;
    }
    case NameKind::Constant: {
      const ConstDecl* c = sig_.find_constant(r.head.text);
      if (!c) {
        fail(code::undeclared_identifier, "constant '" + r.head.text + "' is not declared");
        return std::nullopt;
      }
      if (r.spine.kind != SpineKind::Suspended && !r.spine.elems.empty()) {
        fail(code::internal_expansion,
             "constant-headed spine is not in expanded form (tag " +
                 std::string(spine_kind_label(r.spine.kind)) + ")");
        return std::nullopt;
      }
      ty = c->type;
      elem_depth = k == 0 ? 0 : k - 1;  // the guard: arguments sit one level lower
      break;
    }
    case NameKind::Recursion:
      fail(code::internal_expansion,
           "recursion constant '" + r.head.text + "' survived expansion");
      return std::nullopt;
    case NameKind::Family:
      fail(code::namespace_misuse, "type family '" + r.head.text + "' used as a term head");
      return std::nullopt;
  }

  std::size_t i = 0;
  for (const CanTerm& elem : r.spine.elems) {
    if (!ty.is_pi()) {
      fail(code::spine_arity, "'" + r.head.text + "' is applied to " +
                                  std::to_string(r.spine.elems.size()) +
                                  " argument(s) but takes " + std::to_string(i));
      return std::nullopt;
    }
    TrailFrame g(trail_, "argument " + std::to_string(i + 1) + " of '" + r.head.text + "'");
    auto next = spine_step(G, ty, elem, elem_depth, k, r.head);
    if (!next) return std::nullopt;
    ty = *next;
    ++i;
  }
  if (ty.is_pi()) {
    fail(code::spine_arity,
         "'" + r.head.text + "' is under-applied: a neutral term must reach atomic type");
    return std::nullopt;
  }
  return ty.target();
}

bool Checker::check_type(const Context& G, const CanType& a, Depth k) {
  if (k == 0) return true;
  if (!a.valid()) return fail(code::internal_expansion, "missing type");
  if (a.is_pi()) {
    NameSupply supply(all_names_type(a));
    supply.avoid_all(context_names(G));
    Name z = supply.fresh(a.binder().text);
    TrailFrame f(trail_, "the domain of '{" + z.text + "}'" + at_depth(k));
    if (!check_type(G, a.domain(), k)) return false;
    CanType cod = rename_free_var_type(a.codomain(), a.binder(), z);
    TrailFrame g(trail_, "the codomain of '{" + z.text + "}'" + at_depth(k));
    return check_type(G.extended(z, a.domain()), cod, k);
  }

  const AtomType& at = a.target();
  TrailFrame f(trail_, "the atomic type '" + at.head.text + "'" + at_depth(k));
  const KindDecl* fam = sig_.find_family(at.head.text);
  if (!fam) {
    if (at.head.kind != NameKind::Family) {
      return fail(code::namespace_misuse, "'" + at.head.text + "' is not a type family");
    }
    return fail(code::undeclared_identifier, "type family '" + at.head.text + "' is not declared");
  }
  if (at.spine.kind != SpineKind::Suspended && !at.spine.elems.empty()) {
    return fail(code::internal_expansion,
                "index spine of '" + at.head.text + "' is not in expanded form");
  }

  Kind kd = fam->kind;
  Depth elem_depth = k == 0 ? 0 : k - 1;
  std::size_t i = 0;
  for (const CanTerm& elem : at.spine.elems) {
    if (!kd.is_pi()) {
      return fail(code::family_overapplied,
                  "type family '" + at.head.text + "' is applied to " +
                      std::to_string(at.spine.elems.size()) + " argument(s) but takes " +
                      std::to_string(i));
    }
    TrailFrame g(trail_, "index " + std::to_string(i + 1) + " of '" + at.head.text + "'");
    if (!check_term(G, elem, kd.domain(), elem_depth)) return false;
    auto next = subst_kind(elem, kd.binder(), erase(kd.domain()), kd.codomain(), k);
    if (!next) {
      return fail(code::undefined_substitution,
                  "substituting an index of '" + at.head.text + "' into its kind is undefined");
    }
    kd = *next;
    ++i;
  }
  if (kd.is_pi()) {
    return fail(code::family_underapplied,
                "type family '" + at.head.text + "' needs " + std::to_string(kd.pis().size()) +
                    " more argument(s)");
  }
  return true;
}

bool Checker::check_kind(const Context& G, const Kind& kd, Depth k) {
  if (k == 0) return true;
  if (!kd.valid()) return fail(code::internal_expansion, "missing kind");
  if (!kd.is_pi()) return true;
  NameSupply supply(all_names_kind(kd));
  supply.avoid_all(context_names(G));
  Name z = supply.fresh(kd.binder().text);
  TrailFrame f(trail_, "the domain of '{" + z.text + "}'" + at_depth(k));
  if (!check_type(G, kd.domain(), k)) return false;
  Kind cod = rename_free_var_kind(kd.codomain(), kd.binder(), z);
  return check_kind(G.extended(z, kd.domain()), cod, k);
}

std::vector<Diagnostic> check_signature(const Signature& sig, Depth k,
                                        std::size_t max_memo_entries) {
  std::vector<Diagnostic> diags;
  Expander ex(sig, max_memo_entries);
  Signature expanded;
  Checker check(expanded, diags);

  for (const Declaration& d : sig.decls) {
    check.set_span(d.span);
    try {
      if (const auto* kd = std::get_if<KindDecl>(&d.decl)) {
        Kind ek = ex.expand_kind(kd->kind, k);
        check.check_kind(Context{}, ek, k);
        expanded.push({KindDecl{kd->name, std::move(ek), kd->implicits}, d.span});
      } else if (const auto* cd = std::get_if<ConstDecl>(&d.decl)) {
        CanType et = ex.expand_type(cd->type, k);
        check.check_type(Context{}, et, k);
        expanded.push({ConstDecl{cd->name, std::move(et), cd->implicits}, d.span});
      } else {
        const auto& dd = std::get<DefDecl>(d.decl);
        CanType et = ex.expand_type(dd.type, k);
        bool type_ok = check.check_type(Context{}, et, k);
        CanTerm eb = ex.expand_term(dd.body, k);
        if (type_ok) check.check_term(Context{}, eb, et, k);
        // Definitions are fully expanded away; later declarations never
        // mention them after their own expansion.
      }
    } catch (const ExpandError& e) {
      diags.push_back(Diagnostic::error(e.code, e.what(), d.span));
    }
  }
  return diags;
}

}  // namespace colf
