#include "colf/substitution.hpp"

#include <cassert>
#include <type_traits>

namespace colf {

SimpleType erase(const CanType& a) {
  SimpleType t = SimpleType::base();
  const auto& pis = a.pis();
  for (auto it = pis.rbegin(); it != pis.rend(); ++it) {
    t = SimpleType::arrow(erase(it->second), t);
  }
  return t;
}

bool simple_type_check(const SimpleContext& ctx, const CanTerm& m, const SimpleType& tau,
                       Depth k) {
  if (k == 0) return true;
  if (m.is_stub()) return false;

  SimpleContext ext = ctx;
  SimpleType cur = tau;
  for (const Name& b : m.binders()) {
    if (!cur.is_arrow()) return false;
    ext.add(b, cur.dom());
    cur = cur.cod();
  }
  // Neutral terms inhabit base type only (terms are eta-long).
  if (!cur.is_base()) return false;

  const NeutTerm& r = m.neutral();
  const SimpleType* head_ty = ext.lookup(r.head);
  if (!head_ty) return false;
  Depth elem_depth = r.head.kind == NameKind::Variable ? k : k - 1;
  SimpleType s = *head_ty;
  for (const CanTerm& elem : r.spine.elems) {
    if (!s.is_arrow()) return false;
    if (!simple_type_check(ext, elem, s.dom(), elem_depth)) return false;
    s = s.cod();
  }
  return s.is_base();
}

namespace {

CanTerm drop_first_binder(const CanTerm& m) {
  std::vector<Name> rest(m.binders().begin() + 1, m.binders().end());
  return CanTerm::make(std::move(rest), m.neutral());
}

CanTerm prepend_binder(Name b, const CanTerm& body) {
  assert(!body.is_stub());
  std::vector<Name> bs;
  bs.reserve(body.binders().size() + 1);
  bs.push_back(std::move(b));
  bs.insert(bs.end(), body.binders().begin(), body.binders().end());
  return CanTerm::make(std::move(bs), body.neutral());
}

// Fresh rename target for binder b: must be free in n, unused anywhere in the
// subtree it scopes over, and distinct from the substitution variable.
Name fresh_binder(const Name& b, const CanTerm& n, const CanTerm& scope, const Name& x) {
  NameSet avoid = free_vars(n);
  NameSet others = all_names(scope);
  avoid.insert(others.begin(), others.end());
  avoid.insert(x);
  NameSupply supply(std::move(avoid));
  return supply.fresh(b.text);
}

}  // namespace

std::optional<CanTerm> subst_canonical(const CanTerm& n, const Name& x, const SimpleType& tau,
                                       const CanTerm& m, Depth k) {
  if (k == 0) return CanTerm::stub();
  if (m.is_stub()) return m;
  if (m.binders().empty()) return subst_neutral(n, x, tau, m.neutral(), k);

  Name b = m.binders()[0];
  if (b == x) return m;  // shadowed below this binder
  CanTerm rest = drop_first_binder(m);
  if (free_vars(n).count(b)) {
    Name b2 = fresh_binder(b, n, rest, x);
    rest = rename_free_var(rest, b, b2);
    b = b2;
  }
  auto r = subst_canonical(n, x, tau, rest, k);
  if (!r) return std::nullopt;
  if (r->is_stub()) return CanTerm::stub();  // unobservable body absorbs the binder
  return prepend_binder(std::move(b), *r);
}

std::optional<CanTerm> subst_neutral(const CanTerm& n, const Name& x, const SimpleType& tau,
                                     const NeutTerm& r, Depth k) {
  // Surface spines carry no depth discipline yet; their elements substitute at
  // the node depth, like continuing ones.
  std::optional<Spine> s;
  if (r.spine.kind == SpineKind::Suspended) {
    s = subst_spine_suspended(n, x, tau, r.spine, k);
  } else {
    s = subst_spine_continuing(n, x, tau, r.spine, k);
  }
  if (!s) return std::nullopt;
  if (r.head == x) return spine_apply(*s, tau, n, k);
  return CanTerm::head(r.head, std::move(*s));
}

std::optional<Spine> subst_spine_continuing(const CanTerm& n, const Name& x,
                                            const SimpleType& tau, const Spine& s, Depth k) {
  Spine out{s.kind, {}};
  out.elems.reserve(s.elems.size());
  for (const CanTerm& elem : s.elems) {
    auto e = subst_canonical(n, x, tau, elem, k);
    if (!e) return std::nullopt;
    out.elems.push_back(std::move(*e));
  }
  return out;
}

std::optional<Spine> subst_spine_suspended(const CanTerm& n, const Name& x,
                                           const SimpleType& tau, const Spine& s, Depth k) {
  assert(k >= 1);
  CanTerm n1 = truncate(n, k, k - 1);
  Spine out{s.kind, {}};
  out.elems.reserve(s.elems.size());
  for (const CanTerm& elem : s.elems) {
    auto e = subst_canonical(n1, x, tau, elem, k - 1);
    if (!e) return std::nullopt;
    out.elems.push_back(std::move(*e));
  }
  return out;
}

std::optional<CanTerm> spine_apply(const Spine& t, const SimpleType& tau, const CanTerm& n,
                                   Depth k) {
  if (n.is_stub()) return n;  // unobservable target absorbs any arguments
  if (t.elems.empty()) {
    if (!tau.is_base() || n.is_lambda()) return std::nullopt;
    return n;
  }
  if (!tau.is_arrow() || !n.is_lambda()) return std::nullopt;
  Name y = n.binders()[0];
  CanTerm body = drop_first_binder(n);
  auto stepped = subst_canonical(t.elems[0], y, tau.dom(), body, k);
  if (!stepped) return std::nullopt;
  Spine rest{t.kind, std::vector<CanTerm>(t.elems.begin() + 1, t.elems.end())};
  return spine_apply(rest, tau.cod(), *stepped, k);
}

namespace {

// Telescopes substitute at the node depth; crossing a Pi keeps the depth.
template <typename TeleT, typename RebuildAtom>
std::optional<TeleT> subst_telescope(const CanTerm& n, const Name& x, const SimpleType& tau,
                                     const TeleT& a, Depth depth, RebuildAtom&& rebuild) {
  if (!a.is_pi()) return rebuild(a, depth);
  Name b = a.binder();
  auto dom = subst_cantype(n, x, tau, a.domain(), depth);
  if (!dom) return std::nullopt;
  if (b == x) return TeleT::pi(b, std::move(*dom), a.codomain());
  auto cod_in = a.codomain();
  if (free_vars(n).count(b)) {
    NameSet avoid = free_vars(n);
    avoid.insert(x);
    if constexpr (std::is_same_v<TeleT, CanType>) {
      NameSet inner = all_names_type(cod_in);
      avoid.insert(inner.begin(), inner.end());
    } else {
      NameSet inner = all_names_kind(cod_in);
      avoid.insert(inner.begin(), inner.end());
    }
    NameSupply supply(std::move(avoid));
    Name b2 = supply.fresh(b.text);
    if constexpr (std::is_same_v<TeleT, CanType>) {
      cod_in = rename_free_var_type(cod_in, b, b2);
    } else {
      cod_in = rename_free_var_kind(cod_in, b, b2);
    }
    b = b2;
  }
  auto cod = subst_telescope(n, x, tau, cod_in, depth, rebuild);
  if (!cod) return std::nullopt;
  return TeleT::pi(std::move(b), std::move(*dom), std::move(*cod));
}

}  // namespace

std::optional<AtomType> subst_atomtype(const CanTerm& n, const Name& x, const SimpleType& tau,
                                       const AtomType& p, Depth depth) {
  // Index terms sit one depth below the type node; at depth 0 nothing of them
  // is observable and they collapse to stubs.
  Depth elem_depth = depth == 0 ? 0 : depth - 1;
  CanTerm n1 = truncate(n, depth, elem_depth);
  Spine out{p.spine.kind, {}};
  out.elems.reserve(p.spine.elems.size());
  for (const CanTerm& elem : p.spine.elems) {
    auto e = subst_canonical(n1, x, tau, elem, elem_depth);
    if (!e) return std::nullopt;
    out.elems.push_back(std::move(*e));
  }
  return make_atom(p.head, std::move(out));
}

std::optional<CanType> subst_cantype(const CanTerm& n, const Name& x, const SimpleType& tau,
                                     const CanType& a, Depth depth) {
  return subst_telescope(n, x, tau, a, depth,
                         [&](const CanType& at, Depth d) -> std::optional<CanType> {
                           auto p = subst_atomtype(n, x, tau, at.target(), d);
                           if (!p) return std::nullopt;
                           return CanType::atom(std::move(*p));
                         });
}

std::optional<Kind> subst_kind(const CanTerm& n, const Name& x, const SimpleType& tau,
                               const Kind& kd, Depth depth) {
  return subst_telescope(n, x, tau, kd, depth,
                         [](const Kind& at, Depth) -> std::optional<Kind> {
                           return Kind::terminal(at.target());
                         });
}

std::optional<Context> subst_context(const CanTerm& n, const Name& x, const SimpleType& tau,
                                     const Context& g, Depth depth) {
  Context out;
  bool shadowed = false;
  for (const auto& [y, a] : g.entries) {
    if (shadowed) {
      out.entries.emplace_back(y, a);
      continue;
    }
    assert(!free_vars(n).count(y));  // callers bind fresh names
    auto a2 = subst_cantype(n, x, tau, a, depth);
    if (!a2) return std::nullopt;
    out.entries.emplace_back(y, std::move(*a2));
    if (y == x) shadowed = true;
  }
  return out;
}

}  // namespace colf
