#include <sstream>

#include "colf/surface.hpp"

namespace colf {

namespace {

std::uint32_t implicit_count(const Signature& sig, const Name& h) {
  if (h.kind == NameKind::Variable) return 0;
  const Declaration* d = sig.find(h.text);
  return d ? d->implicits() : 0;
}

// How many leading spine elements to hide for this head.
std::size_t hidden(const Signature& sig, const NeutTerm& r, bool show_implicit) {
  if (show_implicit) return 0;
  std::size_t n = implicit_count(sig, r.head);
  return n <= r.spine.elems.size() ? n : 0;
}

void term_to(std::ostream& os, const Signature& sig, const CanTerm& m, bool show_implicit,
             bool atomic);

void neut_to(std::ostream& os, const Signature& sig, const NeutTerm& r, bool show_implicit,
             bool atomic) {
  std::size_t skip = hidden(sig, r, show_implicit);
  std::size_t visible = r.spine.elems.size() - skip;
  if (atomic && visible > 0) os << '(';
  os << r.head.text;
  for (std::size_t i = skip; i < r.spine.elems.size(); ++i) {
    os << ' ';
    term_to(os, sig, r.spine.elems[i], show_implicit, true);
  }
  if (atomic && visible > 0) os << ')';
}

void term_to(std::ostream& os, const Signature& sig, const CanTerm& m, bool show_implicit,
             bool atomic) {
  if (m.is_stub()) {
    os << '_';
    return;
  }
  if (m.binders().empty()) {
    neut_to(os, sig, m.neutral(), show_implicit, atomic);
    return;
  }
  if (atomic) os << '(';
  for (const Name& b : m.binders()) os << '[' << b.text << "] ";
  neut_to(os, sig, m.neutral(), show_implicit, false);
  if (atomic) os << ')';
}

void atom_to(std::ostream& os, const Signature& sig, const AtomType& a, bool show_implicit,
             bool atomic) {
  NeutTerm view{a.head, a.spine};
  neut_to(os, sig, view, show_implicit, atomic);
}

void type_to(std::ostream& os, const Signature& sig, const CanType& a, bool show_implicit,
             bool domain_position) {
  if (!a.is_pi()) {
    atom_to(os, sig, a.target(), show_implicit, false);
    return;
  }
  if (domain_position) os << '(';
  const Name& x = a.binder();
  CanType cod = a.codomain();
  if (free_vars_type(cod).count(x)) {
    os << '{' << x.text << " : ";
    type_to(os, sig, a.domain(), show_implicit, false);
    os << "} ";
    type_to(os, sig, cod, show_implicit, false);
  } else {
    type_to(os, sig, a.domain(), show_implicit, true);
    os << " -> ";
    type_to(os, sig, cod, show_implicit, false);
  }
  if (domain_position) os << ')';
}

void kind_to(std::ostream& os, const Signature& sig, const Kind& k, bool show_implicit) {
  if (!k.is_pi()) {
    os << kind_terminal_label(k.target());
    return;
  }
  const Name& x = k.binder();
  Kind cod = k.codomain();
  bool dependent = false;
  for (const auto& [y, dom] : cod.pis()) {
    if (free_vars_type(dom).count(x)) dependent = true;
  }
  if (dependent) {
    os << '{' << x.text << " : ";
    type_to(os, sig, k.domain(), show_implicit, false);
    os << "} ";
  } else {
    type_to(os, sig, k.domain(), show_implicit, true);
    os << " -> ";
  }
  kind_to(os, sig, cod, show_implicit);
}

CanType drop_pis(CanType a, std::uint32_t n) {
  while (n > 0 && a.is_pi()) {
    a = a.codomain();
    --n;
  }
  return a;
}

CanTerm drop_binders(const CanTerm& m, std::uint32_t n) {
  if (m.is_stub() || n == 0) return m;
  if (m.binders().size() < n) return m;
  std::vector<Name> rest(m.binders().begin() + n, m.binders().end());
  return CanTerm::make(std::move(rest), m.neutral());
}

}  // namespace

std::string print_term(const Signature& sig, const CanTerm& m, bool show_implicit) {
  std::ostringstream os;
  term_to(os, sig, m, show_implicit, false);
  return os.str();
}

std::string print_type(const Signature& sig, const CanType& a, bool show_implicit) {
  std::ostringstream os;
  type_to(os, sig, a, show_implicit, false);
  return os.str();
}

std::string print_kind(const Signature& sig, const Kind& k, bool show_implicit) {
  std::ostringstream os;
  kind_to(os, sig, k, show_implicit);
  return os.str();
}

std::string print_declaration(const Signature& sig, const Declaration& d, bool show_implicit) {
  std::ostringstream os;
  if (const auto* kd = std::get_if<KindDecl>(&d.decl)) {
    os << kd->name.text << " : ";
    // Kind telescopes have no implicit suppression story beyond the leading
    // Pis themselves.
    if (show_implicit || kd->implicits == 0) {
      kind_to(os, sig, kd->kind, show_implicit);
    } else {
      Kind k = kd->kind;
      for (std::uint32_t i = 0; i < kd->implicits && k.is_pi(); ++i) k = k.codomain();
      kind_to(os, sig, k, show_implicit);
    }
    os << '.';
  } else if (const auto* cd = std::get_if<ConstDecl>(&d.decl)) {
    os << cd->name.text << " : ";
    CanType t = show_implicit ? cd->type : drop_pis(cd->type, cd->implicits);
    type_to(os, sig, t, show_implicit, false);
    os << '.';
  } else {
    const auto& dd = std::get<DefDecl>(d.decl);
    os << dd.name.text << " : ";
    CanType t = show_implicit ? dd.type : drop_pis(dd.type, dd.implicits);
    type_to(os, sig, t, show_implicit, false);
    os << " = ";
    CanTerm b = show_implicit ? dd.body : drop_binders(dd.body, dd.implicits);
    term_to(os, sig, b, show_implicit, false);
    os << '.';
  }
  return os.str();
}

std::string print_signature(const Signature& sig, bool show_implicit) {
  std::string out;
  for (const Declaration& d : sig.decls) {
    out += print_declaration(sig, d, show_implicit);
    out += '\n';
  }
  return out;
}

}  // namespace colf
