#include "colf/unfolding.hpp"

#include <cassert>
#include <limits>

#include "colf/diagnostics.hpp"
#include "colf/substitution.hpp"

namespace colf {

namespace {

// Contraction operates on finitary terms; at this depth truncation never
// fires and suspended spines never bottom out.
constexpr Depth kFinitary = std::numeric_limits<Depth>::max();

struct DepthAlphaEnv {
  std::unordered_map<Name, Name, NameHash> l2r, r2l;

  void bind(const Name& a, const Name& b) {
    l2r[a] = b;
    r2l[b] = a;
  }
};

bool heads_match(const Name& ha, const Name& hb, const DepthAlphaEnv& env) {
  if (ha.kind == NameKind::Variable && hb.kind == NameKind::Variable) {
    auto it = env.l2r.find(ha);
    if (it != env.l2r.end()) return it->second == hb;
    if (env.r2l.count(hb)) return false;
    return ha == hb;
  }
  return ha == hb;
}

bool eq_term_rec(const CanTerm& a, const CanTerm& b, Depth k, const DepthAlphaEnv& env) {
  if (k == 0) return true;
  if (a.is_stub() || b.is_stub()) return a.is_stub() && b.is_stub();
  if (a.binders().size() != b.binders().size()) return false;
  DepthAlphaEnv ext = env;
  for (std::size_t i = 0; i < a.binders().size(); ++i) ext.bind(a.binders()[i], b.binders()[i]);
  const NeutTerm& ra = a.neutral();
  const NeutTerm& rb = b.neutral();
  if (!heads_match(ra.head, rb.head, ext)) return false;
  if (ra.spine.kind != rb.spine.kind) return false;
  if (ra.spine.elems.size() != rb.spine.elems.size()) return false;
  Depth ed = ra.spine.kind == SpineKind::Suspended ? k - 1 : k;
  for (std::size_t i = 0; i < ra.spine.elems.size(); ++i) {
    if (!eq_term_rec(ra.spine.elems[i], rb.spine.elems[i], ed, ext)) return false;
  }
  return true;
}

bool eq_type_rec(const CanType& a, const CanType& b, Depth k, const DepthAlphaEnv& env) {
  if (k == 0) return true;
  if (a.pis().size() != b.pis().size()) return false;
  DepthAlphaEnv ext = env;
  for (std::size_t i = 0; i < a.pis().size(); ++i) {
    if (!eq_type_rec(a.pis()[i].second, b.pis()[i].second, k, ext)) return false;
    ext.bind(a.pis()[i].first, b.pis()[i].first);
  }
  const AtomType& ta = a.target();
  const AtomType& tb = b.target();
  if (ta.head != tb.head) return false;
  if (ta.spine.elems.size() != tb.spine.elems.size()) return false;
  for (std::size_t i = 0; i < ta.spine.elems.size(); ++i) {
    if (!eq_term_rec(ta.spine.elems[i], tb.spine.elems[i], k - 1, ext)) return false;
  }
  return true;
}

}  // namespace

bool eq_at_depth(const CanTerm& a, const CanTerm& b, Depth k) {
  return eq_term_rec(a, b, k, {});
}

bool eq_types_at_depth(const CanType& a, const CanType& b, Depth k) {
  return eq_type_rec(a, b, k, {});
}

bool eq_kinds_at_depth(const Kind& a, const Kind& b, Depth k) {
  if (k == 0) return true;
  if (a.target() != b.target()) return false;
  if (a.pis().size() != b.pis().size()) return false;
  DepthAlphaEnv ext;
  for (std::size_t i = 0; i < a.pis().size(); ++i) {
    if (!eq_type_rec(a.pis()[i].second, b.pis()[i].second, k, ext)) return false;
    ext.bind(a.pis()[i].first, b.pis()[i].first);
  }
  return true;
}

Expander::Expander(const Signature& sig, std::size_t max_memo_entries)
    : sig_(sig), max_memo_(max_memo_entries) {
  for (const Declaration& d : sig_.decls) {
    if (std::holds_alternative<DefDecl>(d.decl)) ++defs_count_;
  }
}

std::size_t Expander::memo_size() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::size_t n = 0;
  for (const auto& [name, per_depth] : memo_) n += per_depth.size();
  return n;
}

CanTerm Expander::contract(const Name& rec, const Spine& spine) {
  const DefDecl* d = sig_.find_definition(rec.text);
  if (!d) {
    throw ExpandError(code::unbound_recursion, rec.text,
                      "recursion constant " + rec.text + " has no definition in scope");
  }
  NameSupply supply(all_names(d->body));
  for (const CanTerm& e : spine.elems) supply.avoid_all(all_names(e));
  CanTerm body = alpha_rename(d->body, supply);
  auto res = spine_apply(spine, erase(d->type), body, kFinitary);
  if (!res) {
    throw ExpandError(code::undefined_substitution, rec.text,
                      "unfolding " + rec.text + " required a substitution with no defined result");
  }
  return *res;
}

CanTerm Expander::expand_go(const CanTerm& m, Depth k, std::size_t unfolds) {
  if (k == 0) return CanTerm::stub();
  if (m.is_stub()) return m;
  const NeutTerm& r = m.neutral();
  CanTerm out;
  switch (r.head.kind) {
    case NameKind::Variable: {
      Spine s{SpineKind::Continuing, {}};
      s.elems.reserve(r.spine.elems.size());
      for (const CanTerm& e : r.spine.elems) s.elems.push_back(expand_go(e, k, unfolds));
      out = CanTerm::head(r.head, std::move(s));
      break;
    }
    case NameKind::Constant: {
      Spine s{SpineKind::Suspended, {}};
      s.elems.reserve(r.spine.elems.size());
      for (const CanTerm& e : r.spine.elems) s.elems.push_back(expand_go(e, k - 1, 0));
      out = CanTerm::head(r.head, std::move(s));
      break;
    }
    case NameKind::Recursion: {
      out = expand_unfold(r, k, unfolds);
      break;
    }
    case NameKind::Family:
      throw ExpandError(code::internal_expansion, r.head.text,
                        "type family " + r.head.text + " used as a term head");
  }
  if (m.binders().empty()) return out;
  assert(!out.is_stub());
  std::vector<Name> bs(m.binders());
  bs.insert(bs.end(), out.binders().begin(), out.binders().end());
  return CanTerm::make(std::move(bs), out.neutral());
}

CanTerm Expander::expand_unfold(const NeutTerm& r, Depth k, std::size_t unfolds) {
  bool memoizable = r.spine.elems.empty();
  if (memoizable) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(r.head.text);
    if (it != memo_.end()) {
      auto jt = it->second.find(k);
      if (jt != it->second.end()) return jt->second;
    }
  }
  if (unfolds > defs_count_) {
    throw ExpandError(code::noncontractive_definition, r.head.text,
                      "unfolding " + r.head.text + " loops without reaching a constructor");
  }
  CanTerm out = expand_go(contract(r.head, r.spine), k, unfolds + 1);
  if (memoizable) {
    std::lock_guard<std::mutex> lock(mu_);
    std::size_t total = 0;
    for (const auto& [name, per_depth] : memo_) total += per_depth.size();
    if (total < max_memo_) memo_[r.head.text].emplace(k, out);
  }
  return out;
}

CanTerm Expander::expand_term(const CanTerm& m, Depth k) {
  return expand_go(m, k, 0);
}

CanType Expander::expand_type(const CanType& a, Depth k) {
  const AtomType& t = a.target();
  Depth ed = k == 0 ? 0 : k - 1;
  Spine s{SpineKind::Suspended, {}};
  s.elems.reserve(t.spine.elems.size());
  for (const CanTerm& e : t.spine.elems) s.elems.push_back(expand_term(e, ed));
  CanType out = CanType::atom(make_atom(t.head, std::move(s)));
  const auto& pis = a.pis();
  for (auto it = pis.rbegin(); it != pis.rend(); ++it) {
    out = CanType::pi(it->first, expand_type(it->second, k), std::move(out));
  }
  return out;
}

Kind Expander::expand_kind(const Kind& kd, Depth k) {
  Kind out = Kind::terminal(kd.target());
  const auto& pis = kd.pis();
  for (auto it = pis.rbegin(); it != pis.rend(); ++it) {
    out = Kind::pi(it->first, expand_type(it->second, k), std::move(out));
  }
  return out;
}

Signature Expander::expand_signature(Depth k) {
  Signature out;
  for (const Declaration& d : sig_.decls) {
    if (std::holds_alternative<DefDecl>(d.decl)) continue;
    Declaration nd = d;
    if (auto* kd = std::get_if<KindDecl>(&nd.decl)) {
      kd->kind = expand_kind(kd->kind, k);
    } else if (auto* cd = std::get_if<ConstDecl>(&nd.decl)) {
      cd->type = expand_type(cd->type, k);
    }
    out.push(std::move(nd));
  }
  return out;
}

}  // namespace colf
