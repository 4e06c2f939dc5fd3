#include "colf/syntax.hpp"

#include <algorithm>
#include <sstream>

namespace colf {

const char* name_kind_label(NameKind k) {
  switch (k) {
    case NameKind::Family: return "family";
    case NameKind::Constant: return "constant";
    case NameKind::Recursion: return "recursion constant";
    case NameKind::Variable: return "variable";
  }
  return "?";
}

const char* spine_kind_label(SpineKind k) {
  switch (k) {
    case SpineKind::Continuing: return "continuing";
    case SpineKind::Suspended: return "suspended";
    case SpineKind::Surface: return "surface";
  }
  return "?";
}

const char* kind_terminal_label(KindTerminal t) {
  return t == KindTerminal::Type ? "type" : "cotype";
}

// ---------------------------------------------------------------- SimpleType

struct SimpleType::Rep {
  SimpleType dom;
  SimpleType cod;
};

SimpleType SimpleType::arrow(SimpleType dom, SimpleType cod) {
  SimpleType t;
  t.rep_ = std::make_shared<const Rep>(Rep{std::move(dom), std::move(cod)});
  return t;
}

const SimpleType& SimpleType::dom() const {
  assert(rep_);
  return rep_->dom;
}

const SimpleType& SimpleType::cod() const {
  assert(rep_);
  return rep_->cod;
}

std::size_t SimpleType::arity() const {
  std::size_t n = 0;
  const SimpleType* t = this;
  while (t->is_arrow()) {
    ++n;
    t = &t->cod();
  }
  return n;
}

bool SimpleType::operator==(const SimpleType& o) const {
  if (rep_ == o.rep_) return true;
  if (is_base() || o.is_base()) return false;
  return dom() == o.dom() && cod() == o.cod();
}

std::string SimpleType::show() const {
  if (is_base()) return "*";
  std::string d = dom().show();
  if (dom().is_arrow()) d = "(" + d + ")";
  return d + " -> " + cod().show();
}

// ------------------------------------------------------------------ CanTerm

NeutTerm make_neut(Name head, Spine spine) {
  switch (head.kind) {
    case NameKind::Variable:
      assert(spine.kind == SpineKind::Continuing || spine.kind == SpineKind::Surface);
      break;
    case NameKind::Constant:
      assert(spine.kind == SpineKind::Suspended || spine.kind == SpineKind::Surface);
      break;
    case NameKind::Recursion:
      assert(spine.kind == SpineKind::Surface);
      break;
    case NameKind::Family:
      assert(false && "family head in a term");
      break;
  }
  return NeutTerm{std::move(head), std::move(spine)};
}

struct CanTerm::Rep {
  std::vector<Name> binders;
  NeutTerm neutral;
};

CanTerm CanTerm::make(std::vector<Name> binders, NeutTerm neutral) {
  for (const Name& b : binders) {
    (void)b;
    assert(b.kind == NameKind::Variable);
  }
  CanTerm t;
  t.rep_ = std::make_shared<const Rep>(Rep{std::move(binders), std::move(neutral)});
  return t;
}

bool CanTerm::is_lambda() const { return rep_ && !rep_->binders.empty(); }

const std::vector<Name>& CanTerm::binders() const {
  assert(rep_);
  return rep_->binders;
}

const NeutTerm& CanTerm::neutral() const {
  assert(rep_);
  return rep_->neutral;
}

// ------------------------------------------------------------------ CanType

AtomType make_atom(Name head, Spine spine) {
  assert(head.kind == NameKind::Family);
  assert(spine.kind == SpineKind::Suspended || spine.kind == SpineKind::Surface);
  return AtomType{std::move(head), std::move(spine)};
}

struct CanType::Rep {
  std::vector<std::pair<Name, CanType>> pis;
  AtomType atom;
};

CanType CanType::atom(AtomType a) {
  CanType t;
  t.rep_ = std::make_shared<const Rep>(Rep{{}, std::move(a)});
  return t;
}

CanType CanType::pi(Name binder, CanType domain, CanType codomain) {
  assert(binder.kind == NameKind::Variable);
  assert(codomain.valid());
  std::vector<std::pair<Name, CanType>> pis;
  pis.reserve(codomain.pis().size() + 1);
  pis.emplace_back(std::move(binder), std::move(domain));
  for (const auto& p : codomain.pis()) pis.push_back(p);
  CanType t;
  t.rep_ = std::make_shared<const Rep>(Rep{std::move(pis), codomain.target()});
  return t;
}

bool CanType::is_pi() const {
  assert(rep_);
  return !rep_->pis.empty();
}

const std::vector<std::pair<Name, CanType>>& CanType::pis() const {
  assert(rep_);
  return rep_->pis;
}

const AtomType& CanType::target() const {
  assert(rep_);
  return rep_->atom;
}

const Name& CanType::binder() const {
  assert(is_pi());
  return rep_->pis.front().first;
}

const CanType& CanType::domain() const {
  assert(is_pi());
  return rep_->pis.front().second;
}

CanType CanType::codomain() const {
  assert(is_pi());
  CanType t;
  auto rep = std::make_shared<Rep>();
  rep->pis.assign(rep_->pis.begin() + 1, rep_->pis.end());
  rep->atom = rep_->atom;
  t.rep_ = rep;
  return t;
}

// --------------------------------------------------------------------- Kind

struct Kind::Rep {
  std::vector<std::pair<Name, CanType>> pis;
  KindTerminal terminal;
};

Kind Kind::terminal(KindTerminal t) {
  Kind k;
  k.rep_ = std::make_shared<const Rep>(Rep{{}, t});
  return k;
}

Kind Kind::pi(Name binder, CanType domain, Kind codomain) {
  assert(binder.kind == NameKind::Variable);
  assert(codomain.valid());
  std::vector<std::pair<Name, CanType>> pis;
  pis.reserve(codomain.pis().size() + 1);
  pis.emplace_back(std::move(binder), std::move(domain));
  for (const auto& p : codomain.pis()) pis.push_back(p);
  Kind k;
  k.rep_ = std::make_shared<const Rep>(Rep{std::move(pis), codomain.target()});
  return k;
}

bool Kind::is_pi() const {
  assert(rep_);
  return !rep_->pis.empty();
}

const std::vector<std::pair<Name, CanType>>& Kind::pis() const {
  assert(rep_);
  return rep_->pis;
}

KindTerminal Kind::target() const {
  assert(rep_);
  return rep_->terminal;
}

const Name& Kind::binder() const {
  assert(is_pi());
  return rep_->pis.front().first;
}

const CanType& Kind::domain() const {
  assert(is_pi());
  return rep_->pis.front().second;
}

Kind Kind::codomain() const {
  assert(is_pi());
  Kind k;
  auto rep = std::make_shared<Rep>();
  rep->pis.assign(rep_->pis.begin() + 1, rep_->pis.end());
  rep->terminal = rep_->terminal;
  k.rep_ = rep;
  return k;
}

// ---------------------------------------------------------------- Signature

const Name& Declaration::name() const {
  return std::visit([](const auto& d) -> const Name& { return d.name; }, decl);
}

std::uint32_t Declaration::implicits() const {
  return std::visit([](const auto& d) { return d.implicits; }, decl);
}

const Declaration* Signature::find(const std::string& text) const {
  auto it = index_.find(text);
  if (it == index_.end()) return nullptr;
  return &decls[it->second];
}

const KindDecl* Signature::find_family(const std::string& text) const {
  const Declaration* d = find(text);
  if (!d) return nullptr;
  return std::get_if<KindDecl>(&d->decl);
}

const ConstDecl* Signature::find_constant(const std::string& text) const {
  const Declaration* d = find(text);
  if (!d) return nullptr;
  return std::get_if<ConstDecl>(&d->decl);
}

const DefDecl* Signature::find_definition(const std::string& text) const {
  const Declaration* d = find(text);
  if (!d) return nullptr;
  return std::get_if<DefDecl>(&d->decl);
}

void Signature::push(Declaration d) {
  index_.emplace(d.name().text, decls.size());
  decls.push_back(std::move(d));
}

const CanType* Context::lookup(const Name& x) const {
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    if (it->first == x) return &it->second;
  }
  return nullptr;
}

Context Context::extended(Name x, CanType a) const {
  Context c = *this;
  c.entries.emplace_back(std::move(x), std::move(a));
  return c;
}

// --------------------------------------------------------------- operations

CanTerm truncate(const CanTerm& m, Depth from, Depth to) {
  assert(to <= from);
  (void)from;
  if (to == 0) return CanTerm::stub();
  return m;
}

namespace {

void free_vars_into(const CanTerm& m, NameSet& bound, NameSet& out) {
  if (m.is_stub()) return;
  std::vector<Name> shadowed;
  for (const Name& b : m.binders()) {
    if (bound.insert(b).second) shadowed.push_back(b);
  }
  const NeutTerm& r = m.neutral();
  if (r.head.kind == NameKind::Variable && !bound.count(r.head)) out.insert(r.head);
  for (const CanTerm& e : r.spine.elems) free_vars_into(e, bound, out);
  for (const Name& b : shadowed) bound.erase(b);
}

void free_vars_type_into(const CanType& a, NameSet& bound, NameSet& out) {
  if (!a.valid()) return;
  std::vector<Name> shadowed;
  for (const auto& [x, dom] : a.pis()) {
    free_vars_type_into(dom, bound, out);
    if (bound.insert(x).second) shadowed.push_back(x);
  }
  for (const CanTerm& e : a.target().spine.elems) free_vars_into(e, bound, out);
  for (const Name& b : shadowed) bound.erase(b);
}

void all_names_into(const CanTerm& m, NameSet& out) {
  if (m.is_stub()) return;
  for (const Name& b : m.binders()) out.insert(b);
  out.insert(m.neutral().head);
  for (const CanTerm& e : m.neutral().spine.elems) all_names_into(e, out);
}

void all_names_type_into(const CanType& a, NameSet& out) {
  if (!a.valid()) return;
  for (const auto& [x, dom] : a.pis()) {
    out.insert(x);
    all_names_type_into(dom, out);
  }
  out.insert(a.target().head);
  for (const CanTerm& e : a.target().spine.elems) all_names_into(e, out);
}

}  // namespace

NameSet free_vars(const CanTerm& m) {
  NameSet bound, out;
  free_vars_into(m, bound, out);
  return out;
}

NameSet free_vars_type(const CanType& a) {
  NameSet bound, out;
  free_vars_type_into(a, bound, out);
  return out;
}

NameSet all_names(const CanTerm& m) {
  NameSet out;
  all_names_into(m, out);
  return out;
}

NameSet all_names_type(const CanType& a) {
  NameSet out;
  all_names_type_into(a, out);
  return out;
}

NameSet all_names_kind(const Kind& k) {
  NameSet out;
  for (const auto& [x, dom] : k.pis()) {
    out.insert(x);
    all_names_type_into(dom, out);
  }
  return out;
}

void NameSupply::avoid_all(const NameSet& ns) {
  for (const Name& n : ns) avoid_.insert(n);
}

Name NameSupply::fresh(const std::string& base) {
  // Strip a previous numeric suffix so renaming is idempotent in spirit
  // (x2 -> x3, not x23).
  std::size_t end = base.size();
  while (end > 1 && base[end - 1] >= '0' && base[end - 1] <= '9') --end;
  std::string stem = base.substr(0, end);
  for (;;) {
    Name candidate = var(stem + std::to_string(counter_++));
    if (!avoid_.count(candidate)) {
      avoid_.insert(candidate);
      return candidate;
    }
  }
}

namespace {

using Renaming = std::unordered_map<Name, Name, NameHash>;

CanTerm alpha_rename_go(const CanTerm& m, NameSupply& supply, Renaming env) {
  if (m.is_stub()) return m;
  std::vector<Name> binders;
  binders.reserve(m.binders().size());
  for (const Name& b : m.binders()) {
    Name nb = supply.fresh(b.text);
    env[b] = nb;
    binders.push_back(nb);
  }
  const NeutTerm& r = m.neutral();
  Name head = r.head;
  if (head.kind == NameKind::Variable) {
    auto it = env.find(head);
    if (it != env.end()) head = it->second;
  }
  Spine spine{r.spine.kind, {}};
  spine.elems.reserve(r.spine.elems.size());
  for (const CanTerm& e : r.spine.elems) spine.elems.push_back(alpha_rename_go(e, supply, env));
  return CanTerm::make(std::move(binders), make_neut(std::move(head), std::move(spine)));
}

CanTerm rename_free_go(const CanTerm& m, const Name& from, const Name& to) {
  if (m.is_stub()) return m;
  for (const Name& b : m.binders()) {
    if (b == from) return m;  // shadowed below this point
  }
  const NeutTerm& r = m.neutral();
  Name head = r.head == from ? to : r.head;
  Spine spine{r.spine.kind, {}};
  spine.elems.reserve(r.spine.elems.size());
  bool changed = head == to && r.head == from;
  for (const CanTerm& e : r.spine.elems) {
    CanTerm ne = rename_free_go(e, from, to);
    changed = changed || !ne.same_rep(e);
    spine.elems.push_back(std::move(ne));
  }
  if (!changed) return m;
  return CanTerm::make(m.binders(), make_neut(std::move(head), std::move(spine)));
}

}  // namespace

CanTerm alpha_rename(const CanTerm& m, NameSupply& supply) {
  return alpha_rename_go(m, supply, {});
}

CanTerm rename_free_var(const CanTerm& m, const Name& from, const Name& to) {
  assert(from.kind == NameKind::Variable && to.kind == NameKind::Variable);
  return rename_free_go(m, from, to);
}

CanType rename_free_var_type(const CanType& a, const Name& from, const Name& to) {
  assert(a.valid());
  const auto& pis = a.pis();
  for (std::size_t i = 0; i < pis.size(); ++i) {
    if (pis[i].first == from) {
      // Binder shadows from index i on; only earlier domains see the rename.
      std::vector<std::pair<Name, CanType>> npis = pis;
      for (std::size_t j = 0; j < i; ++j)
        npis[j].second = rename_free_var_type(npis[j].second, from, to);
      CanType out = CanType::atom(a.target());
      for (auto it = npis.rbegin(); it != npis.rend(); ++it)
        out = CanType::pi(it->first, it->second, out);
      return out;
    }
  }
  std::vector<std::pair<Name, CanType>> npis = pis;
  for (auto& p : npis) p.second = rename_free_var_type(p.second, from, to);
  Spine spine{a.target().spine.kind, {}};
  for (const CanTerm& e : a.target().spine.elems)
    spine.elems.push_back(rename_free_var(e, from, to));
  CanType out = CanType::atom(make_atom(a.target().head, std::move(spine)));
  for (auto it = npis.rbegin(); it != npis.rend(); ++it)
    out = CanType::pi(it->first, it->second, out);
  return out;
}

Kind rename_free_var_kind(const Kind& k, const Name& from, const Name& to) {
  assert(k.valid());
  const auto& pis = k.pis();
  std::vector<std::pair<Name, CanType>> npis = pis;
  std::size_t stop = pis.size();
  for (std::size_t i = 0; i < pis.size(); ++i) {
    if (pis[i].first == from) {
      stop = i;
      break;
    }
  }
  for (std::size_t j = 0; j < stop; ++j)
    npis[j].second = rename_free_var_type(npis[j].second, from, to);
  Kind out = Kind::terminal(k.target());
  for (auto it = npis.rbegin(); it != npis.rend(); ++it)
    out = Kind::pi(it->first, it->second, out);
  return out;
}

namespace {

// Binder correspondence for alpha-equality: left name -> right name.
struct AlphaEnv {
  Renaming l2r;
  Renaming r2l;

  bool heads_match(const Name& a, const Name& b) const {
    if (a.kind != b.kind) return false;
    if (a.kind != NameKind::Variable) return a.text == b.text;
    auto it = l2r.find(a);
    if (it != l2r.end()) return it->second == b;
    // a unbound on the left; b must be unbound too and identical.
    return !r2l.count(b) && a == b;
  }

  void bind(const Name& a, const Name& b) {
    l2r[a] = b;
    r2l[b] = a;
  }
};

bool alpha_equal_go(const CanTerm& a, const CanTerm& b, AlphaEnv env) {
  if (a.is_stub() || b.is_stub()) return a.is_stub() && b.is_stub();
  if (a.binders().size() != b.binders().size()) return false;
  for (std::size_t i = 0; i < a.binders().size(); ++i) env.bind(a.binders()[i], b.binders()[i]);
  const NeutTerm& ra = a.neutral();
  const NeutTerm& rb = b.neutral();
  if (!env.heads_match(ra.head, rb.head)) return false;
  if (ra.spine.elems.size() != rb.spine.elems.size()) return false;
  for (std::size_t i = 0; i < ra.spine.elems.size(); ++i) {
    if (!alpha_equal_go(ra.spine.elems[i], rb.spine.elems[i], env)) return false;
  }
  return true;
}

bool alpha_equal_type_go(const CanType& a, const CanType& b, AlphaEnv env) {
  if (a.pis().size() != b.pis().size()) return false;
  for (std::size_t i = 0; i < a.pis().size(); ++i) {
    if (!alpha_equal_type_go(a.pis()[i].second, b.pis()[i].second, env)) return false;
    env.bind(a.pis()[i].first, b.pis()[i].first);
  }
  const AtomType& ta = a.target();
  const AtomType& tb = b.target();
  if (ta.head != tb.head || ta.spine.elems.size() != tb.spine.elems.size()) return false;
  for (std::size_t i = 0; i < ta.spine.elems.size(); ++i) {
    if (!alpha_equal_go(ta.spine.elems[i], tb.spine.elems[i], env)) return false;
  }
  return true;
}

}  // namespace

bool alpha_equal(const CanTerm& a, const CanTerm& b) { return alpha_equal_go(a, b, {}); }

bool alpha_equal_type(const CanType& a, const CanType& b) {
  return alpha_equal_type_go(a, b, {});
}

// ----------------------------------------------------------------- printing

namespace {

void show_term_into(const CanTerm& m, std::ostringstream& out, bool parens);

void show_neut_into(const NeutTerm& r, std::ostringstream& out, bool parens) {
  bool wrap = parens && !r.spine.elems.empty();
  if (wrap) out << "(";
  out << r.head.text;
  for (const CanTerm& e : r.spine.elems) {
    out << " ";
    show_term_into(e, out, true);
  }
  if (wrap) out << ")";
}

void show_term_into(const CanTerm& m, std::ostringstream& out, bool parens) {
  if (m.is_stub()) {
    out << "_";
    return;
  }
  if (m.binders().empty()) {
    show_neut_into(m.neutral(), out, parens);
    return;
  }
  if (parens) out << "(";
  for (const Name& b : m.binders()) out << "[" << b.text << "] ";
  show_neut_into(m.neutral(), out, false);
  if (parens) out << ")";
}

void show_type_into(const CanType& a, std::ostringstream& out, bool parens) {
  if (!a.valid()) {
    out << "<invalid type>";
    return;
  }
  bool wrap = parens && a.is_pi();
  if (wrap) out << "(";
  for (const auto& [x, dom] : a.pis()) {
    out << "{" << x.text << " : ";
    show_type_into(dom, out, false);
    out << "} ";
  }
  show_neut_into(NeutTerm{a.target().head, a.target().spine}, out, false);
  if (wrap) out << ")";
}

}  // namespace

std::string show_term(const CanTerm& m) {
  std::ostringstream out;
  show_term_into(m, out, false);
  return out.str();
}

std::string show_neut(const NeutTerm& r) {
  std::ostringstream out;
  show_neut_into(r, out, false);
  return out.str();
}

std::string show_type(const CanType& a) {
  std::ostringstream out;
  show_type_into(a, out, false);
  return out.str();
}

std::string show_kind(const Kind& k) {
  std::ostringstream out;
  for (const auto& [x, dom] : k.pis()) {
    out << "{" << x.text << " : ";
    show_type_into(dom, out, false);
    out << "} ";
  }
  out << kind_terminal_label(k.target());
  return out.str();
}

}  // namespace colf
