// Python bindings over the kernel. Every entry point takes signature source
// text; elaboration failures raise ValueError, unknown names KeyError, and
// diagnostics come back as plain dicts so callers need no wrapper types.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <variant>
#include <vector>

#include "colf/diagnostics.hpp"
#include "colf/substitution.hpp"
#include "colf/surface.hpp"
#include "colf/typecheck.hpp"
#include "colf/unfolding.hpp"
#include "colf/validity.hpp"

namespace py = pybind11;
using namespace colf;

namespace {

py::dict diag_dict(const Diagnostic& d) {
  py::dict out;
  out["severity"] = severity_label(d.severity);
  out["code"] = d.code;
  out["message"] = d.message;
  out["line"] = d.span.line;
  out["col"] = d.span.col;
  out["end_line"] = d.span.end_line;
  out["end_col"] = d.span.end_col;
  return out;
}

py::list diag_list(std::vector<Diagnostic> diags) {
  sort_diagnostics(diags);
  py::list out;
  for (const auto& d : diags) out.append(diag_dict(d));
  return out;
}

Signature elaborate_or_throw(const std::string& src) {
  std::vector<Diagnostic> diags;
  Signature sig = parse_and_elaborate(src, diags);
  if (any_errors(diags)) {
    sort_diagnostics(diags);
    for (const auto& d : diags)
      if (d.severity == Severity::Error)
        throw py::value_error("[" + d.code + "] " + d.message);
  }
  return sig;
}

py::list check(const std::string& src, Depth depth) {
  std::vector<Diagnostic> diags;
  Signature sig = parse_and_elaborate(src, diags);
  for (auto& d : validity_diagnostics(validity_report(sig))) diags.push_back(std::move(d));
  for (auto& d : check_signature(sig, depth)) diags.push_back(std::move(d));
  return diag_list(std::move(diags));
}

py::dict validity(const std::string& src) {
  Signature sig = elaborate_or_throw(src);
  ValidityReport rep = validity_report(sig);
  py::list defs;
  for (const DefVerdict& v : rep.defs) {
    py::dict e;
    e["name"] = v.name.text;
    e["valid"] = v.valid;
    e["contractive"] = v.contractive;
    e["prepattern"] = v.prepattern;
    e["line"] = v.span.line;
    e["col"] = v.span.col;
    py::list cycle;
    for (const Name& n : v.cycle) cycle.append(n.text);
    e["cycle"] = cycle;
    defs.append(e);
  }
  py::dict out;
  out["ok"] = rep.ok;
  out["definitions"] = defs;
  return out;
}

std::string unfold(const std::string& src, const std::string& name, Depth depth) {
  Signature sig = elaborate_or_throw(src);
  const DefDecl* def = sig.find_definition(name);
  if (!def) throw py::key_error(name);
  Expander ex(sig);
  // Same contraction-free equivalence the CLI relies on: the body's
  // expansion is the definition's expansion, eta-long even at function type.
  try {
    return print_term(sig, ex.expand_term(def->body, depth), false);
  } catch (const ExpandError& e) {
    throw py::value_error(std::string("[") + e.code + "] " + e.what());
  }
}

std::string erase_type(const std::string& src, const std::string& name, bool show_implicit) {
  Signature sig = elaborate_or_throw(src);
  const Declaration* d = sig.find(name);
  if (!d) throw py::key_error(name);
  if (std::holds_alternative<KindDecl>(d->decl))
    throw py::value_error("'" + name + "' is a type family and has a kind, not a type");
  CanType ty = std::holds_alternative<ConstDecl>(d->decl) ? std::get<ConstDecl>(d->decl).type
                                                          : std::get<DefDecl>(d->decl).type;
  if (!show_implicit)
    for (std::uint32_t i = d->implicits(); i > 0 && ty.is_pi(); --i) ty = ty.codomain();
  return erase(ty).show();
}

std::string pretty(const std::string& src, bool show_implicit) {
  Signature sig = elaborate_or_throw(src);
  return print_signature(sig, show_implicit);
}

}  // namespace

PYBIND11_MODULE(_colfw, m) {
  m.doc() = "Depth-indexed checker for signatures with recursive definitions";
  m.def("check", &check, py::arg("source"), py::arg("depth") = 4,
        "Parse, elaborate, analyze productivity, and check at the given depth; "
        "returns a list of diagnostic dicts, empty when the signature is clean.");
  m.def("validity", &validity, py::arg("source"),
        "Productivity verdict for every recursive definition.");
  m.def("unfold", &unfold, py::arg("source"), py::arg("name"), py::arg("depth") = 4,
        "Depth-bounded expansion of a recursive definition, printed with '_' "
        "for unobservable subterms.");
  m.def("erase_type", &erase_type, py::arg("source"), py::arg("name"),
        py::arg("show_implicit") = false,
        "Simple-type skeleton of a declaration's type in '* -> *' notation.");
  m.def("pretty", &pretty, py::arg("source"), py::arg("show_implicit") = false,
        "Elaborate and print the signature back in surface syntax.");
}
