#include <algorithm>
#include <cctype>
#include <limits>

#include "colf/substitution.hpp"
#include "colf/surface.hpp"

namespace colf {

namespace {

// All elaboration-time substitution is finitary: at this depth no truncation
// ever fires.
constexpr Depth kFin = std::numeric_limits<Depth>::max();

// Metavariables use reserved names ('?' cannot occur in user identifiers):
// term holes "?h<n>" in the constant namespace, type metas "?T<n>" as
// spine-free atomic family heads.
bool is_hole_name(const Name& n) {
  return n.kind == NameKind::Constant && !n.text.empty() && n.text[0] == '?';
}
bool is_tymeta_name(const Name& n) {
  return n.kind == NameKind::Family && !n.text.empty() && n.text[0] == '?';
}

bool capitalized(const std::string& s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

Spine surface_spine(std::vector<CanTerm> elems = {}) {
  return Spine{SpineKind::Surface, std::move(elems)};
}

CanTerm var_term(const Name& x) { return CanTerm::head(x, surface_spine()); }

struct Scope {
  std::vector<std::pair<Name, CanType>> vars;

  const CanType* lookup(const Name& x) const {
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
      if (it->first == x) return &it->second;
    }
    return nullptr;
  }
  Scope extended(Name x, CanType a) const {
    Scope s = *this;
    s.vars.emplace_back(std::move(x), std::move(a));
    return s;
  }
};

void collect_idents(const ExprP& e, NameSet& out) {
  if (!e) return;
  switch (e->tag) {
    case Expr::Tag::Ident:
      out.insert(var(e->name));
      break;
    case Expr::Tag::Lam:
      out.insert(var(e->name));
      collect_idents(e->a, out);
      break;
    case Expr::Tag::Pi:
      if (!e->name.empty()) out.insert(var(e->name));
      collect_idents(e->a, out);
      collect_idents(e->b, out);
      break;
    case Expr::Tag::App:
      collect_idents(e->a, out);
      collect_idents(e->b, out);
      break;
    default:
      break;
  }
}

const Expr* decl_target(const ExprP& e) {
  const Expr* cur = e.get();
  while (cur && cur->tag == Expr::Tag::Pi) cur = cur->b.get();
  return cur;
}

struct Elab {
  Elab(Signature& s, std::vector<Diagnostic>& d) : sig(s), diags(d) {}

  Signature& sig;  // previously elaborated declarations; grown as we go
  std::vector<Diagnostic>& diags;

  // Per-declaration state.
  NameSupply supply;
  std::string decl_name;
  SourceSpan decl_span;
  bool decl_ok = true;
  bool allow_new_ivars = true;

  std::vector<Name> ivars;  // first-occurrence order
  std::unordered_map<Name, CanType, NameHash> ivar_types;  // X -> ?T atom
  std::vector<Name> explicit_binders;

  int next_hole = 0;
  int next_tymeta = 0;
  std::unordered_map<std::string, CanTerm> hole_sol;
  std::unordered_map<std::string, CanType> hole_type;
  std::unordered_map<std::string, std::string> hole_base;
  std::unordered_map<std::string, SourceSpan> hole_span;
  std::unordered_map<std::string, NameSet> hole_scope;
  std::unordered_map<std::string, CanType> tymeta_sol;

  std::vector<std::pair<CanTerm, CanTerm>> pending;

  // The declaration currently being elaborated, once its type is known;
  // lets definition bodies refer to themselves.
  const DefDecl* self = nullptr;

  void err(const char* code_, std::string msg, SourceSpan s) {
    if (!s.known()) s = decl_span;
    diags.push_back(Diagnostic::error(code_, std::move(msg), s));
    decl_ok = false;
  }

  // ------------------------------------------------------------- metas

  CanType fresh_tymeta() {
    Name n = family("?T" + std::to_string(next_tymeta++));
    return CanType::atom(make_atom(n, surface_spine()));
  }

  bool tymeta_of(const CanType& a, std::string* id) const {
    if (a.is_pi()) return false;
    if (!is_tymeta_name(a.target().head)) return false;
    *id = a.target().head.text;
    return true;
  }

  // Fully eta-long occurrence of a head at a simple type.
  CanTerm eta_head(const Name& h, const SimpleType& tau) {
    std::vector<Name> bs;
    std::vector<CanTerm> elems;
    SimpleType cur = tau;
    while (cur.is_arrow()) {
      Name x = supply.fresh("x");
      bs.push_back(x);
      elems.push_back(eta_head(x, cur.dom()));
      cur = cur.cod();
    }
    if (bs.empty()) return CanTerm::head(h, surface_spine());
    return CanTerm::make(std::move(bs), make_neut(h, surface_spine(std::move(elems))));
  }

  // Holes are minted eta-long so substituting them for function-typed
  // binders stays hereditary.
  CanTerm fresh_hole(CanType expected, std::string base, SourceSpan s, const Scope& scope) {
    std::string id = "?h" + std::to_string(next_hole++);
    SimpleType tau = erase(expected);
    hole_type.emplace(id, std::move(expected));
    hole_base.emplace(id, std::move(base));
    hole_span.emplace(id, s);
    NameSet allowed;
    for (const auto& [x, ty] : scope.vars) allowed.insert(x);
    for (const Name& x : ivars) allowed.insert(x);
    hole_scope.emplace(id, std::move(allowed));
    return eta_head(constant(id), tau);
  }

  // ------------------------------------------------------------- zonking

  CanTerm zonk_term(const CanTerm& m) {
    if (m.is_stub()) return m;
    const NeutTerm& r = m.neutral();
    std::vector<CanTerm> elems;
    elems.reserve(r.spine.elems.size());
    for (const CanTerm& e : r.spine.elems) elems.push_back(zonk_term(e));
    if (is_hole_name(r.head)) {
      auto it = hole_sol.find(r.head.text);
      if (it != hole_sol.end()) {
        CanTerm sol = zonk_term(it->second);
        SimpleType tau = erase(zonk_type(hole_type.at(r.head.text)));
        auto applied = spine_apply(surface_spine(elems), tau, sol, kFin);
        if (applied) {
          if (m.binders().empty()) return *applied;
          if (!applied->is_stub()) {
            std::vector<Name> bs(m.binders());
            bs.insert(bs.end(), applied->binders().begin(), applied->binders().end());
            return CanTerm::make(std::move(bs), applied->neutral());
          }
        }
        // Fall through: leave the hole in place; a diagnostic will follow.
      }
    }
    return CanTerm::make(m.binders(), make_neut(r.head, Spine{r.spine.kind, std::move(elems)}));
  }

  CanType zonk_type(const CanType& a) {
    std::string id;
    if (!a.is_pi() && is_tymeta_name(a.target().head)) {
      auto it = tymeta_sol.find(a.target().head.text);
      if (it != tymeta_sol.end()) return zonk_type(it->second);
      return a;
    }
    std::vector<std::pair<Name, CanType>> pis;
    for (const auto& [x, dom] : a.pis()) pis.emplace_back(x, zonk_type(dom));
    // The target may itself be a solved meta once the telescope is stripped.
    CanType target = CanType::atom(a.target());
    if (is_tymeta_name(a.target().head)) {
      auto it = tymeta_sol.find(a.target().head.text);
      if (it != tymeta_sol.end()) target = zonk_type(it->second);
    }
    if (!target.is_pi()) {
      std::vector<CanTerm> elems;
      for (const CanTerm& e : target.target().spine.elems) elems.push_back(zonk_term(e));
      target = CanType::atom(make_atom(target.target().head, surface_spine(std::move(elems))));
    }
    for (auto it = pis.rbegin(); it != pis.rend(); ++it) {
      target = CanType::pi(it->first, it->second, std::move(target));
    }
    return target;
  }

  // ------------------------------------------------------------- occurs/scope

  bool term_mentions(const CanTerm& m, const std::string& hole) const {
    if (m.is_stub()) return false;
    const NeutTerm& r = m.neutral();
    if (is_hole_name(r.head) && r.head.text == hole) return true;
    for (const CanTerm& e : r.spine.elems) {
      if (term_mentions(e, hole)) return true;
    }
    return false;
  }

  // Terms never contain type metas, so only telescope domains and the target
  // head need scanning.
  bool type_mentions_meta(const CanType& a, const std::string& meta) const {
    if (is_tymeta_name(a.target().head) && a.target().head.text == meta) return true;
    for (const auto& [x, dom] : a.pis()) {
      if (type_mentions_meta(dom, meta)) return true;
    }
    return false;
  }

  void collect_unsolved_holes(const CanTerm& m, std::vector<std::string>& out) const {
    if (m.is_stub()) return;
    const NeutTerm& r = m.neutral();
    if (is_hole_name(r.head) && !hole_sol.count(r.head.text)) {
      if (std::find(out.begin(), out.end(), r.head.text) == out.end()) out.push_back(r.head.text);
    }
    for (const CanTerm& e : r.spine.elems) collect_unsolved_holes(e, out);
  }

  void collect_unsolved_holes_type(const CanType& a, std::vector<std::string>& out) const {
    for (const auto& [x, dom] : a.pis()) collect_unsolved_holes_type(dom, out);
    for (const CanTerm& e : a.target().spine.elems) collect_unsolved_holes(e, out);
  }

  // True when an unsolved type meta survives anywhere in a (zonked) type.
  bool has_unsolved_meta(const CanType& a) const {
    if (is_tymeta_name(a.target().head) && !tymeta_sol.count(a.target().head.text)) return true;
    for (const auto& [x, dom] : a.pis()) {
      if (has_unsolved_meta(dom)) return true;
    }
    return false;
  }

  // ----------------------------------------------------------- unification

  enum class U { Ok, Fail, Postpone };

  bool flex(const CanTerm& m) const {
    return !m.is_stub() && is_hole_name(m.neutral().head) && !hole_sol.count(m.neutral().head.text);
  }

  // Try to read a spine as distinct bound variables (the pattern fragment).
  bool pattern_args(const Spine& s, std::vector<Name>* xs) const {
    NameSet seen;
    for (const CanTerm& e : s.elems) {
      if (e.is_stub() || e.is_lambda()) return false;
      const NeutTerm& r = e.neutral();
      if (r.head.kind != NameKind::Variable || !r.spine.elems.empty()) return false;
      if (!seen.insert(r.head).second) return false;
      xs->push_back(r.head);
    }
    return true;
  }

  U solve_hole(const CanTerm& lhs, const CanTerm& rhs) {
    const NeutTerm& h = lhs.neutral();
    const std::string& id = h.head.text;
    if (term_mentions(rhs, id)) {
      err(code::occurs_check, "solution for an implicit argument mentions itself", hole_span.at(id));
      return U::Fail;
    }
    std::vector<Name> xs;
    if (!pattern_args(h.spine, &xs)) return U::Postpone;
    // Every free variable of the solution must be visible where the hole was
    // created or be one of the pattern arguments.
    const NameSet& allowed = hole_scope.at(id);
    for (const Name& v : free_vars(rhs)) {
      bool is_arg = std::find(xs.begin(), xs.end(), v) != xs.end();
      if (!is_arg && !allowed.count(v)) return U::Postpone;
    }
    CanTerm sol = rhs;
    if (!xs.empty()) {
      if (sol.is_stub()) return U::Fail;
      std::vector<Name> bs(xs);
      bs.insert(bs.end(), sol.binders().begin(), sol.binders().end());
      sol = CanTerm::make(std::move(bs), sol.neutral());
    }
    hole_sol.emplace(id, std::move(sol));
    return U::Ok;
  }

  // Unfold one definition layer of a recursion-headed neutral, if possible.
  bool unfold_rec(CanTerm& m) {
    if (m.is_stub() || m.is_lambda()) return false;
    const NeutTerm& r = m.neutral();
    if (r.head.kind != NameKind::Recursion) return false;
    const DefDecl* d = sig.find_definition(r.head.text);
    if (!d && self && self->name.text == r.head.text) d = self;
    if (!d) return false;
    NameSupply local(all_names(d->body));
    for (const CanTerm& e : r.spine.elems) local.avoid_all(all_names(e));
    CanTerm body = alpha_rename(d->body, local);
    auto res = spine_apply(r.spine, erase(d->type), body, kFin);
    if (!res) return false;
    m = *res;
    return true;
  }

  U unify_term(CanTerm a, CanTerm b, int& fuel) {
    a = zonk_term(a);
    b = zonk_term(b);
    if (a.is_stub() || b.is_stub()) return a.is_stub() && b.is_stub() ? U::Ok : U::Fail;

    // Strip binders together, eta-padding a shorter neutral side.
    std::size_t na = a.binders().size(), nb = b.binders().size();
    if (na != nb) {
      CanTerm& shorter = na < nb ? a : b;
      std::size_t missing = na < nb ? nb - na : na - nb;
      std::vector<Name> bs(shorter.binders());
      std::vector<CanTerm> elems = shorter.neutral().spine.elems;
      for (std::size_t i = 0; i < missing; ++i) {
        Name x = supply.fresh("e");
        bs.push_back(x);
        elems.push_back(var_term(x));
      }
      shorter = CanTerm::make(std::move(bs),
                              make_neut(shorter.neutral().head, surface_spine(std::move(elems))));
    }
    if (!a.binders().empty()) {
      std::vector<Name> common;
      for (std::size_t i = 0; i < a.binders().size(); ++i) common.push_back(supply.fresh("u"));
      CanTerm base_a = CanTerm::neut(a.neutral());
      CanTerm base_b = CanTerm::neut(b.neutral());
      // Innermost first, so a repeated binder name maps each occurrence to
      // the binder that actually captures it.
      for (std::size_t i = common.size(); i-- > 0;) {
        base_a = rename_free_var(base_a, a.binders()[i], common[i]);
        base_b = rename_free_var(base_b, b.binders()[i], common[i]);
      }
      return unify_term(base_a, base_b, fuel);
    }

    if (flex(a) && flex(b) && a.neutral().head == b.neutral().head) {
      // Same hole on both sides: identical spines succeed, otherwise postpone.
      if (alpha_equal(a, b)) return U::Ok;
      return U::Postpone;
    }
    if (flex(a)) {
      U r = solve_hole(a, b);
      if (r != U::Postpone) return r;
    }
    if (flex(b)) {
      U r = solve_hole(b, a);
      if (r != U::Postpone) return r;
    }
    if (flex(a) || flex(b)) {
      pending.emplace_back(a, b);
      return U::Ok;
    }

    const NeutTerm& ra = a.neutral();
    const NeutTerm& rb = b.neutral();
    if (ra.head == rb.head && ra.spine.elems.size() == rb.spine.elems.size()) {
      for (std::size_t i = 0; i < ra.spine.elems.size(); ++i) {
        U r = unify_term(ra.spine.elems[i], rb.spine.elems[i], fuel);
        if (r != U::Ok) return r;
      }
      return U::Ok;
    }
    // Mismatched rigid heads: definitions may still expose a common
    // constructor after unfolding.
    if (fuel > 0) {
      CanTerm a2 = a;
      if (ra.head.kind == NameKind::Recursion && unfold_rec(a2)) {
        --fuel;
        return unify_term(a2, b, fuel);
      }
      CanTerm b2 = b;
      if (rb.head.kind == NameKind::Recursion && unfold_rec(b2)) {
        --fuel;
        return unify_term(a, b2, fuel);
      }
    }
    return U::Fail;
  }

  U unify_type(CanType a, CanType b, int& fuel) {
    a = zonk_type(a);
    b = zonk_type(b);
    std::string ida, idb;
    bool fa = tymeta_of(a, &ida) && !tymeta_sol.count(ida);
    bool fb = tymeta_of(b, &idb) && !tymeta_sol.count(idb);
    if (fa && fb && ida == idb) return U::Ok;
    if (fa) {
      if (type_mentions_meta(b, ida)) {
        err(code::occurs_check, "inferred implicit type mentions itself", decl_span);
        return U::Fail;
      }
      tymeta_sol.emplace(ida, b);
      return U::Ok;
    }
    if (fb) {
      if (type_mentions_meta(a, idb)) {
        err(code::occurs_check, "inferred implicit type mentions itself", decl_span);
        return U::Fail;
      }
      tymeta_sol.emplace(idb, a);
      return U::Ok;
    }
    if (a.is_pi() != b.is_pi()) return U::Fail;
    if (a.is_pi()) {
      U r = unify_type(a.domain(), b.domain(), fuel);
      if (r != U::Ok) return r;
      Name common = supply.fresh(a.binder().text);
      CanType ca = rename_free_var_type(a.codomain(), a.binder(), common);
      CanType cb = rename_free_var_type(b.codomain(), b.binder(), common);
      return unify_type(ca, cb, fuel);
    }
    const AtomType& pa = a.target();
    const AtomType& pb = b.target();
    if (pa.head != pb.head || pa.spine.elems.size() != pb.spine.elems.size()) return U::Fail;
    for (std::size_t i = 0; i < pa.spine.elems.size(); ++i) {
      U r = unify_term(pa.spine.elems[i], pb.spine.elems[i], fuel);
      if (r != U::Ok) return r;
    }
    return U::Ok;
  }

  void drain_pending() {
    for (int round = 0; round < 8 && !pending.empty(); ++round) {
      std::vector<std::pair<CanTerm, CanTerm>> work;
      work.swap(pending);
      bool progress = false;
      std::size_t before = hole_sol.size() + tymeta_sol.size();
      for (auto& [a, b] : work) {
        int fuel = 64;
        CanTerm za = zonk_term(a), zb = zonk_term(b);
        if (flex(za) || flex(zb)) {
          U r = flex(za) ? solve_hole(za, zb) : solve_hole(zb, za);
          if (r == U::Postpone) {
            pending.emplace_back(za, zb);
            continue;
          }
          if (r == U::Fail) continue;  // diagnostic already emitted
          progress = true;
          continue;
        }
        if (unify_term(za, zb, fuel) == U::Fail) {
          err(code::unification_mismatch,
              "cannot make " + show_term(za) + " equal to " + show_term(zb), decl_span);
        }
      }
      if (hole_sol.size() + tymeta_sol.size() > before) progress = true;
      if (!progress) break;
    }
  }

  // ----------------------------------------------------------- name lookup

  struct HeadInfo {
    Name name;
    CanType type;  // for term heads
    bool ok = false;
  };

  // Resolve a term-position identifier, minting implicit variables for free
  // capitalized names.
  HeadInfo resolve_term_head(const std::string& text, SourceSpan s, const Scope& scope) {
    HeadInfo out;
    Name as_var = var(text);
    if (const CanType* ty = scope.lookup(as_var)) {
      out = {as_var, *ty, true};
      return out;
    }
    for (const Name& x : ivars) {
      if (x.text == text) {
        out = {x, ivar_types.at(x), true};
        return out;
      }
    }
    if (self && self->name.text == text) {
      out = {self->name, self->type, true};
      return out;
    }
    if (const Declaration* d = sig.find(text)) {
      if (const auto* cd = std::get_if<ConstDecl>(&d->decl)) {
        out = {cd->name, cd->type, true};
        return out;
      }
      if (const auto* dd = std::get_if<DefDecl>(&d->decl)) {
        out = {dd->name, dd->type, true};
        return out;
      }
      err(code::namespace_misuse, "'" + text + "' is a type family, not a term", s);
      return out;
    }
    if (capitalized(text) && allow_new_ivars) {
      Name x = var(text);
      for (const Name& eb : explicit_binders) {
        if (eb == x) {
          err(code::implicit_shadowing,
              "implicit argument '" + text + "' has the same name as an explicit binder", s);
        }
      }
      ivars.push_back(x);
      ivar_types.emplace(x, fresh_tymeta());
      out = {x, ivar_types.at(x), true};
      return out;
    }
    err(code::undeclared_identifier, "undeclared identifier '" + text + "'", s);
    return out;
  }

  // ------------------------------------------------------------ expressions

  // Split an application chain into head and arguments.
  static const Expr* app_head(const ExprP& e, std::vector<ExprP>& args) {
    const Expr* cur = e.get();
    while (cur->tag == Expr::Tag::App) {
      args.push_back(cur->b);
      cur = cur->a.get();
    }
    std::reverse(args.begin(), args.end());
    return cur;
  }

  // Force a (zonked) type to expose a Pi, solving a meta if needed.
  bool force_pi(CanType& ty) {
    ty = zonk_type(ty);
    if (ty.is_pi()) return true;
    std::string id;
    if (tymeta_of(ty, &id) && !tymeta_sol.count(id)) {
      Name x = supply.fresh("x");
      CanType piT = CanType::pi(x, fresh_tymeta(), fresh_tymeta());
      tymeta_sol.emplace(id, piT);
      ty = piT;
      return true;
    }
    return false;
  }

  CanTerm elab_term(const ExprP& e, CanType expected, const Scope& scope) {
    expected = zonk_type(expected);

    if (e->tag == Expr::Tag::Type || e->tag == Expr::Tag::Cotype) {
      err(code::namespace_misuse, "kind keyword in term position", e->span);
      return var_term(supply.fresh("bad"));
    }

    if (e->tag == Expr::Tag::Pi) {
      err(code::syntax, "dependent function type in term position", e->span);
      return var_term(supply.fresh("bad"));
    }

    if (e->tag == Expr::Tag::Lam) {
      if (!force_pi(expected)) {
        err(code::lambda_against_atomic,
            "abstraction where a term of atomic type is expected", e->span);
        return var_term(supply.fresh("bad"));
      }
      Name x = var(e->name);
      if (capitalized(e->name)) note_explicit_binder(x, e->span);
      CanType dom = expected.domain();
      CanType cod = body_type(expected, x, dom);
      CanTerm body = elab_term(e->a, cod, scope.extended(x, dom));
      return prepend_binder(x, body, e->span);
    }

    // Neutral: identifier applied to arguments. If a function type is
    // expected, eta-expand first so elaborated terms are always eta-long.
    if (expected.is_pi()) {
      Name x = supply.fresh("x");
      CanType dom = expected.domain();
      CanType cod = body_type(expected, x, dom);
      CanTerm inner = elab_neutral(e, cod, scope.extended(x, dom),
                                   std::make_pair(var_term(x), dom));
      return prepend_binder(x, inner, e->span);
    }
    return elab_neutral(e, expected, scope, std::nullopt);
  }

  // `eta_arg`, when set, is appended after the user-written arguments; it
  // comes from eta-expansion rather than from the source and carries the
  // type it was bound at.
  CanTerm elab_neutral(const ExprP& e, CanType expected, const Scope& scope,
                       std::optional<std::pair<CanTerm, CanType>> eta_arg) {
    std::vector<ExprP> args;
    const Expr* head = app_head(e, args);
    if (head->tag != Expr::Tag::Ident) {
      if (head->tag == Expr::Tag::Lam && !args.empty()) {
        err(code::syntax, "an applied abstraction must be named via a definition", head->span);
      } else {
        err(code::syntax, "expected an applied identifier", e->span);
      }
      return var_term(supply.fresh("bad"));
    }
    HeadInfo hi = resolve_term_head(head->name, head->span, scope);
    if (!hi.ok) return var_term(supply.fresh("bad"));

    std::vector<CanTerm> elems;
    CanType ty = zonk_type(hi.type);

    // Implicit arguments become holes.
    std::uint32_t implicits = 0;
    if (hi.name.kind != NameKind::Variable) {
      if (const Declaration* d = sig.find(hi.name.text)) implicits = d->implicits();
      else if (self && self->name == hi.name) implicits = self->implicits;
    }
    for (std::uint32_t i = 0; i < implicits; ++i) {
      if (!ty.is_pi()) break;  // inconsistent count; the explicit loop reports
      CanTerm h = fresh_hole(ty.domain(), ty.binder().text, head->span, scope);
      ty = peel(ty, h);
      elems.push_back(std::move(h));
    }

    auto consume = [&](const CanTerm& arg_term, const ExprP& arg_expr) -> bool {
      (void)arg_expr;
      ty = zonk_type(ty);
      elems.push_back(arg_term);
      ty = peel(ty, arg_term);
      return true;
    };

    for (const ExprP& arg : args) {
      if (!force_pi(ty)) {
        err(code::spine_arity, "too many arguments to '" + hi.name.text + "'", arg->span);
        return var_term(supply.fresh("bad"));
      }
      CanTerm m = elab_term(arg, ty.domain(), scope);
      consume(m, arg);
    }
    if (eta_arg) {
      if (!force_pi(ty)) {
        err(code::neutral_against_pi,
            "'" + hi.name.text + "' has an atomic type but a function is required", e->span);
        return var_term(supply.fresh("bad"));
      }
      int fuel = 64;
      if (unify_type(ty.domain(), eta_arg->second, fuel) == U::Fail) {
        err(code::type_mismatch,
            "'" + hi.name.text + "' takes a '" + show_type(zonk_type(ty.domain())) +
                "' here but '" + show_type(zonk_type(eta_arg->second)) + "' is provided",
            e->span);
      }
      consume(eta_arg->first, nullptr);
    }

    ty = zonk_type(ty);
    if (ty.is_pi()) {
      // Residual arrows against an atomic expectation: under-application.
      std::string id;
      if (!tymeta_of(expected, &id)) {
        err(code::type_mismatch,
            "'" + hi.name.text + "' is under-applied here (value of function type where '" +
                show_type(zonk_type(expected)) + "' is expected)",
            e->span);
        return CanTerm::head(hi.name, surface_spine(std::move(elems)));
      }
    }
    int fuel = 64;
    if (unify_type(ty, expected, fuel) == U::Fail) {
      err(code::type_mismatch,
          "this term has type '" + show_type(zonk_type(ty)) + "' but '" +
              show_type(zonk_type(expected)) + "' is expected",
          e->span);
    }
    return CanTerm::head(hi.name, surface_spine(std::move(elems)));
  }

  CanType peel(const CanType& pi, const CanTerm& arg) {
    if (!pi.is_pi()) return pi;
    auto r = subst_cantype(arg, pi.binder(), erase(pi.domain()), pi.codomain(), kFin);
    if (r) return *r;
    err(code::undefined_substitution, "argument cannot be substituted into this type", decl_span);
    return pi.codomain();
  }

  CanType body_type(const CanType& pi, const Name& x, const CanType& dom) {
    auto r = subst_cantype(var_term(x), pi.binder(), erase(dom), pi.codomain(), kFin);
    return r ? *r : pi.codomain();
  }

  CanTerm prepend_binder(Name x, const CanTerm& body, SourceSpan s) {
    if (body.is_stub()) {
      err(code::internal_expansion, "abstraction over an unobservable body", s);
      return body;
    }
    std::vector<Name> bs;
    bs.push_back(std::move(x));
    bs.insert(bs.end(), body.binders().begin(), body.binders().end());
    return CanTerm::make(std::move(bs), body.neutral());
  }

  void note_explicit_binder(const Name& x, SourceSpan s) {
    explicit_binders.push_back(x);
    for (const Name& iv : ivars) {
      if (iv == x) {
        err(code::implicit_shadowing,
            "binder '" + x.text + "' shadows an implicit argument of the same name", s);
      }
    }
  }

  CanType elab_type(const ExprP& e, const Scope& scope) {
    switch (e->tag) {
      case Expr::Tag::Pi: {
        Name x = e->name.empty() ? supply.fresh("x") : var(e->name);
        if (!e->name.empty() && capitalized(e->name)) note_explicit_binder(x, e->span);
        CanType dom = e->a ? elab_type(e->a, scope) : fresh_tymeta();
        CanType cod = elab_type(e->b, scope.extended(x, dom));
        return CanType::pi(x, dom, cod);
      }
      case Expr::Tag::Lam:
        err(code::syntax, "abstraction in type position", e->span);
        return fresh_tymeta();
      case Expr::Tag::Type:
      case Expr::Tag::Cotype:
        err(code::namespace_misuse, "kind keyword in type position", e->span);
        return fresh_tymeta();
      default:
        break;
    }
    std::vector<ExprP> args;
    const Expr* head = app_head(e, args);
    if (head->tag != Expr::Tag::Ident) {
      err(code::syntax, "expected a type family application", e->span);
      return fresh_tymeta();
    }
    const KindDecl* fam = sig.find_family(head->name);
    if (!fam) {
      if (scope.lookup(var(head->name)) || sig.find(head->name)) {
        err(code::namespace_misuse, "'" + head->name + "' is not a type family", head->span);
      } else if (capitalized(head->name)) {
        err(code::namespace_misuse,
            "implicit arguments cannot stand for type families ('" + head->name + "')",
            head->span);
      } else {
        err(code::undeclared_identifier, "undeclared type family '" + head->name + "'",
            head->span);
      }
      return fresh_tymeta();
    }

    std::vector<CanTerm> elems;
    Kind k = fam->kind;
    std::uint32_t implicits = fam->implicits;
    for (std::uint32_t i = 0; i < implicits && k.is_pi(); ++i) {
      CanTerm h = fresh_hole(k.domain(), k.binder().text, head->span, scope);
      k = peel_kind(k, h);
      elems.push_back(std::move(h));
    }
    for (const ExprP& arg : args) {
      if (!k.is_pi()) {
        err(code::family_overapplied,
            "type family '" + head->name + "' applied to too many arguments", arg->span);
        return fresh_tymeta();
      }
      CanTerm m = elab_term(arg, k.domain(), scope);
      elems.push_back(m);
      k = peel_kind(k, m);
    }
    if (k.is_pi()) {
      err(code::family_underapplied,
          "type family '" + head->name + "' needs " + std::to_string(k.pis().size()) +
              " more argument(s)",
          e->span);
      return fresh_tymeta();
    }
    return CanType::atom(make_atom(fam->name, surface_spine(std::move(elems))));
  }

  Kind peel_kind(const Kind& k, const CanTerm& arg) {
    if (!k.is_pi()) return k;
    auto r = subst_kind(arg, k.binder(), erase(k.domain()), k.codomain(), kFin);
    if (r) return *r;
    err(code::undefined_substitution, "argument cannot be substituted into this kind", decl_span);
    return k.codomain();
  }

  Kind elab_kind(const ExprP& e, const Scope& scope) {
    switch (e->tag) {
      case Expr::Tag::Type:
        return Kind::terminal(KindTerminal::Type);
      case Expr::Tag::Cotype:
        return Kind::terminal(KindTerminal::Cotype);
      case Expr::Tag::Pi: {
        Name x = e->name.empty() ? supply.fresh("x") : var(e->name);
        if (!e->name.empty() && capitalized(e->name)) note_explicit_binder(x, e->span);
        CanType dom = e->a ? elab_type(e->a, scope) : fresh_tymeta();
        Kind cod = elab_kind(e->b, scope.extended(x, dom));
        return Kind::pi(x, dom, cod);
      }
      default:
        err(code::syntax, "expected a kind (ending in 'type' or 'cotype')", e->span);
        return Kind::terminal(KindTerminal::Type);
    }
  }

  // --------------------------------------------- implicit binder finishing

  struct ImplicitPlan {
    std::vector<std::pair<Name, CanType>> binders;  // dependency-ordered
    bool ok = true;
  };

  // Generalize residual holes in the declared type into implicit binders and
  // order all implicit binders by type dependency (first occurrence wins
  // among independent ones).
  ImplicitPlan finish_implicits(const CanType& declared) {
    ImplicitPlan plan;

    std::vector<std::string> residual;
    collect_unsolved_holes_type(zonk_type(declared), residual);
    std::vector<Name> hole_vars;
    for (const std::string& id : residual) {
      std::string base = hole_base.at(id);
      if (base.empty()) base = "X";
      base[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(base[0])));
      Name x = supply.fresh(base);
      hole_vars.push_back(x);
      hole_sol.emplace(id, eta_head(x, erase(zonk_type(hole_type.at(id)))));
    }

    struct Entry {
      Name name;
      CanType type;
    };
    std::vector<Entry> entries;
    for (const Name& x : ivars) {
      CanType t = zonk_type(ivar_types.at(x));
      if (has_unsolved_meta(t)) {
        err(code::cannot_infer_implicit,
            "cannot infer a type for implicit argument '" + x.text + "'", decl_span);
        plan.ok = false;
      }
      entries.push_back({x, t});
    }
    for (std::size_t i = 0; i < hole_vars.size(); ++i) {
      CanType t = zonk_type(hole_type.at(residual[i]));
      std::vector<std::string> nested;
      collect_unsolved_holes_type(t, nested);
      if (!nested.empty()) {
        err(code::cannot_infer_implicit,
            "cannot infer the type of an implicit argument left open at '" + decl_name + "'",
            hole_span.at(residual[i]));
        plan.ok = false;
      }
      entries.push_back({hole_vars[i], t});
    }

    // Stable topological order: an entry must come after every implicit its
    // type mentions.
    std::vector<Entry> ordered;
    std::vector<bool> placed(entries.size(), false);
    NameSet available;
    for (std::size_t round = 0; round < entries.size(); ++round) {
      bool progress = false;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        if (placed[i]) continue;
        NameSet fv = free_vars_type(entries[i].type);
        bool ready = true;
        for (const auto& other : entries) {
          if (other.name == entries[i].name) continue;
          if (fv.count(other.name) && !available.count(other.name)) ready = false;
        }
        if (!ready) continue;
        ordered.push_back(entries[i]);
        available.insert(entries[i].name);
        placed[i] = true;
        progress = true;
      }
      if (!progress) break;
    }
    if (ordered.size() != entries.size()) {
      err(code::cannot_infer_implicit,
          "implicit arguments of '" + decl_name + "' depend on each other cyclically", decl_span);
      plan.ok = false;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!placed[i]) ordered.push_back(entries[i]);
      }
    }
    plan.binders.reserve(ordered.size());
    for (auto& en : ordered) plan.binders.emplace_back(en.name, en.type);
    return plan;
  }

  // -------------------------------------------------------- eta finishing

  // Occurrences of implicit variables at function type can be left
  // eta-short by unification; finish them with a simple-type-directed pass.
  struct SimpleScope {
    std::unordered_map<Name, SimpleType, NameHash> vars;
  };

  std::optional<SimpleType> head_simple_type(const Name& h, const SimpleScope& ss) {
    if (h.kind == NameKind::Variable) {
      auto it = ss.vars.find(h);
      if (it == ss.vars.end()) return std::nullopt;
      return it->second;
    }
    if (self && self->name == h) return erase(self->type);
    if (const Declaration* d = sig.find(h.text)) {
      if (const auto* cd = std::get_if<ConstDecl>(&d->decl)) return erase(cd->type);
      if (const auto* dd = std::get_if<DefDecl>(&d->decl)) return erase(dd->type);
    }
    return std::nullopt;
  }

  CanTerm eta_term(const CanTerm& m, const SimpleType& tau, SimpleScope ss) {
    if (m.is_stub()) return m;
    std::vector<Name> binders(m.binders());
    SimpleType cur = tau;
    for (const Name& b : binders) {
      if (!cur.is_arrow()) return m;  // ill-typed; later checking reports it
      ss.vars[b] = cur.dom();
      cur = cur.cod();
    }
    std::vector<CanTerm> elems = m.neutral().spine.elems;
    const Name& h = m.neutral().head;
    // Append binders (and matching spine arguments) until the result sits at
    // base type; the element pass below makes the new arguments eta-long.
    while (cur.is_arrow()) {
      Name x = supply.fresh("x");
      binders.push_back(x);
      ss.vars[x] = cur.dom();
      elems.push_back(var_term(x));
      cur = cur.cod();
    }
    if (auto hty = head_simple_type(h, ss)) {
      SimpleType sty = *hty;
      for (CanTerm& e : elems) {
        if (!sty.is_arrow()) break;
        e = eta_term(e, sty.dom(), ss);
        sty = sty.cod();
      }
    }
    return CanTerm::make(std::move(binders),
                         make_neut(h, surface_spine(std::move(elems))));
  }

  CanType eta_type(const CanType& a, SimpleScope ss) {
    std::vector<std::pair<Name, CanType>> pis;
    for (const auto& [x, dom] : a.pis()) {
      pis.emplace_back(x, eta_type(dom, ss));
      ss.vars[x] = erase(dom);
    }
    const AtomType& t = a.target();
    std::vector<CanTerm> elems = t.spine.elems;
    if (const KindDecl* fam = sig.find_family(t.head.text)) {
      SimpleType sty = erase_kind(fam->kind);
      for (CanTerm& e : elems) {
        if (!sty.is_arrow()) break;
        e = eta_term(e, sty.dom(), ss);
        sty = sty.cod();
      }
    }
    CanType out = CanType::atom(make_atom(t.head, surface_spine(std::move(elems))));
    for (auto it = pis.rbegin(); it != pis.rend(); ++it) {
      out = CanType::pi(it->first, it->second, std::move(out));
    }
    return out;
  }

  Kind eta_kind(const Kind& k, SimpleScope ss) {
    Kind out = Kind::terminal(k.target());
    std::vector<std::pair<Name, CanType>> pis;
    for (const auto& [x, dom] : k.pis()) {
      pis.emplace_back(x, eta_type(dom, ss));
      ss.vars[x] = erase(dom);
    }
    for (auto it = pis.rbegin(); it != pis.rend(); ++it) {
      out = Kind::pi(it->first, it->second, std::move(out));
    }
    return out;
  }

  static SimpleType erase_kind(const Kind& k) {
    SimpleType t = SimpleType::base();
    const auto& pis = k.pis();
    for (auto it = pis.rbegin(); it != pis.rend(); ++it) {
      t = SimpleType::arrow(erase(it->second), t);
    }
    return t;
  }

  // ----------------------------------------------------------- declarations

  void reset(const SurfaceDecl& d) {
    decl_name = d.name;
    decl_span = d.span;
    decl_ok = true;
    allow_new_ivars = true;
    ivars.clear();
    ivar_types.clear();
    explicit_binders.clear();
    next_hole = 0;
    next_tymeta = 0;
    hole_sol.clear();
    hole_type.clear();
    hole_base.clear();
    hole_span.clear();
    hole_scope.clear();
    tymeta_sol.clear();
    pending.clear();
    self = nullptr;

    NameSet avoid;
    collect_idents(d.type, avoid);
    collect_idents(d.body, avoid);
    supply = NameSupply(std::move(avoid));
  }

  void run_decl(const SurfaceDecl& d) {
    reset(d);
    if (sig.declares(d.name)) {
      err(code::duplicate_declaration, "'" + d.name + "' is already declared", d.name_span);
      return;
    }

    const Expr* target = decl_target(d.type);
    bool is_kind = target && (target->tag == Expr::Tag::Type || target->tag == Expr::Tag::Cotype);

    if (is_kind) {
      if (d.body) {
        err(code::syntax, "a type family cannot have a definition body", d.span);
        return;
      }
      Kind k = elab_kind(d.type, Scope{});
      drain_pending();
      ImplicitPlan plan = finish_kind_implicits(k);
      if (!decl_ok) return;
      Kind full = eta_kind(zonk_kind(k), SimpleScope{});
      for (auto it = plan.binders.rbegin(); it != plan.binders.rend(); ++it) {
        full = Kind::pi(it->first, eta_type(zonk_type(it->second), SimpleScope{}), full);
      }
      for (const auto& [x, dom] : full.pis()) {
        if (has_unsolved_meta(dom)) {
          err(code::cannot_infer_implicit,
              "cannot infer the domain of '" + x.text + "' in this kind", d.span);
          return;
        }
      }
      sig.push({KindDecl{family(d.name), std::move(full),
                         static_cast<std::uint32_t>(plan.binders.size())},
                d.span});
      return;
    }

    CanType ty = elab_type(d.type, Scope{});
    drain_pending();
    allow_new_ivars = false;
    ImplicitPlan plan = finish_implicits(ty);
    if (!decl_ok) return;

    CanType explicit_part = zonk_type(ty);
    CanType full = explicit_part;
    for (auto it = plan.binders.rbegin(); it != plan.binders.rend(); ++it) {
      full = CanType::pi(it->first, zonk_type(it->second), full);
    }
    {
      SimpleScope ss;
      full = eta_type(full, ss);
    }
    if (has_unsolved_meta(full)) {
      err(code::cannot_infer_implicit,
          "a domain in the type of '" + d.name + "' cannot be inferred", d.span);
      return;
    }
    auto implicits = static_cast<std::uint32_t>(plan.binders.size());

    if (!d.body) {
      sig.push({ConstDecl{constant(d.name), std::move(full), implicits}, d.span});
      return;
    }

    // Definition: the implicit binders are in scope for the body; the body
    // checks against the explicit part, and the final term closes over the
    // implicits.
    DefDecl dd{recursion(d.name), full, CanTerm::stub(), implicits};
    self = &dd;
    Scope body_scope;
    std::vector<std::pair<Name, CanType>> eta_binders;
    {
      CanType rest = full;
      for (std::uint32_t i = 0; i < implicits; ++i) {
        body_scope = body_scope.extended(rest.binder(), rest.domain());
        eta_binders.emplace_back(rest.binder(), rest.domain());
        rest = rest.codomain();
      }
      explicit_part = rest;
    }
    CanTerm body = elab_term(d.body, explicit_part, body_scope);
    drain_pending();

    CanTerm zbody = zonk_term(body);
    std::vector<std::string> unsolved;
    collect_unsolved_holes(zbody, unsolved);
    for (const std::string& id : unsolved) {
      err(code::unsolved_hole,
          "cannot determine an implicit argument in the body of '" + d.name + "'",
          hole_span.at(id));
    }
    if (!decl_ok) return;

    SimpleScope ss;
    for (const auto& [x, t] : eta_binders) ss.vars[x] = erase(zonk_type(t));
    zbody = eta_term(zbody, erase(explicit_part), ss);
    if (implicits > 0) {
      if (zbody.is_stub()) {
        err(code::internal_expansion, "definition body vanished during elaboration", d.span);
        return;
      }
      std::vector<Name> bs;
      for (const auto& [x, t] : eta_binders) bs.push_back(x);
      bs.insert(bs.end(), zbody.binders().begin(), zbody.binders().end());
      zbody = CanTerm::make(std::move(bs), zbody.neutral());
    }
    dd.body = std::move(zbody);
    self = nullptr;
    sig.push({std::move(dd), d.span});
  }

  Kind zonk_kind(const Kind& k) {
    Kind out = Kind::terminal(k.target());
    const auto& pis = k.pis();
    for (auto it = pis.rbegin(); it != pis.rend(); ++it) {
      out = Kind::pi(it->first, zonk_type(it->second), std::move(out));
    }
    return out;
  }

  ImplicitPlan finish_kind_implicits(const Kind& k) {
    // Kinds share the same machinery via a type-shaped view of the telescope.
    CanType view = CanType::atom(make_atom(family("?kindview"), surface_spine()));
    const auto& pis = k.pis();
    for (auto it = pis.rbegin(); it != pis.rend(); ++it) {
      view = CanType::pi(it->first, it->second, std::move(view));
    }
    return finish_implicits(view);
  }
};

}  // namespace

Signature elaborate(const SurfaceSig& ssig, std::vector<Diagnostic>& diags) {
  Signature out;
  Elab el{out, diags};
  for (const SurfaceDecl& d : ssig.decls) {
    el.run_decl(d);
  }
  return out;
}

Signature parse_and_elaborate(const std::string& src, std::vector<Diagnostic>& diags) {
  std::vector<Token> toks = lex(src, diags);
  SurfaceSig ssig = parse_signature(toks, diags);
  return elaborate(ssig, diags);
}

}  // namespace colf
