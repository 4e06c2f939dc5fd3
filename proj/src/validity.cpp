#include "colf/validity.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>
#include <variant>

#include "json.hpp"

namespace colf {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

struct Tables {
  std::unordered_map<std::string, std::size_t> const_prio;  // constructor -> priority
  std::vector<bool> inductive;                              // indexed by priority
};

Tables build_tables(const Signature& sig) {
  Tables t;
  std::unordered_map<std::string, std::size_t> fam_prio;
  for (const FamilyPriority& f : assign_priorities(sig)) {
    fam_prio[f.fam.text] = f.priority;
    if (t.inductive.size() <= f.priority) t.inductive.resize(f.priority + 1, true);
    t.inductive[f.priority] = f.inductive;
  }
  for (const Declaration& d : sig.decls) {
    const auto* c = std::get_if<ConstDecl>(&d.decl);
    if (!c) continue;
    auto it = fam_prio.find(c->type.target().head.text);
    if (it != fam_prio.end()) t.const_prio[c->name.text] = it->second;
  }
  return t;
}

bool is_contractive(const CanTerm& body) {
  return !body.is_stub() && body.neutral().head.kind == NameKind::Constant;
}

// Precise eta-expansion of the variable x: binder count matches spine length
// and each element eta-expands the corresponding binder.
bool is_eta_of(const CanTerm& m, const Name& x) {
  if (m.is_stub() || !(m.neutral().head == x)) return false;
  const auto& binders = m.binders();
  const auto& elems = m.neutral().spine.elems;
  if (binders.size() != elems.size()) return false;
  for (std::size_t i = 0; i < binders.size(); ++i)
    if (!is_eta_of(elems[i], binders[i])) return false;
  return true;
}

// A (possibly eta-expanded) occurrence of a variable bound outside the term.
bool is_eta_var(const CanTerm& m) {
  if (m.is_stub()) return false;
  const Name& h = m.neutral().head;
  if (h.kind != NameKind::Variable) return false;
  for (const Name& b : m.binders())
    if (b == h) return false;
  return is_eta_of(m, h);
}

bool is_prepattern(const CanTerm& body) {
  if (body.is_stub()) return true;
  const NeutTerm& r = body.neutral();
  bool ok = true;
  if (r.head.kind == NameKind::Recursion) {
    for (const CanTerm& e : r.spine.elems) ok = ok && is_eta_var(e);
  }
  for (const CanTerm& e : r.spine.elems) ok = is_prepattern(e) && ok;
  return ok;
}

// Strongly connected components of the subgraph spanned by `edges`; every
// node gets a component id, isolated ones their own.
std::vector<std::size_t> scc_ids(std::size_t n, const std::vector<const TraceEdge*>& edges) {
  std::vector<std::vector<std::size_t>> fwd(n), rev(n);
  for (const TraceEdge* e : edges) {
    fwd[e->from].push_back(e->to);
    rev[e->to].push_back(e->from);
  }
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
    seen[s] = 1;
    while (!stack.empty()) {
      auto& [u, i] = stack.back();
      if (i < fwd[u].size()) {
        std::size_t v = fwd[u][i++];
        if (!seen[v]) {
          seen[v] = 1;
          stack.emplace_back(v, 0);
        }
      } else {
        order.push_back(u);
        stack.pop_back();
      }
    }
  }
  std::vector<std::size_t> comp(n, kNone);
  std::size_t next = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] != kNone) continue;
    std::vector<std::size_t> stack{*it};
    comp[*it] = next;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v : rev[u])
        if (comp[v] == kNone) {
          comp[v] = next;
          stack.push_back(v);
        }
    }
    ++next;
  }
  return comp;
}

// Closes the rejected edge into a cycle: e.from, then the BFS path from e.to
// back to e.from inside e's component of the subgraph.
std::vector<Name> close_cycle(const TraceGraph& g, const std::vector<const TraceEdge*>& edges,
                              const std::vector<std::size_t>& comp, const TraceEdge& e) {
  std::vector<Name> cyc{g.defs[e.from]};
  if (e.from == e.to) {
    cyc.push_back(g.defs[e.to]);
    return cyc;
  }
  std::size_t n = g.defs.size();
  std::vector<std::size_t> parent(n, kNone);
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> queue{e.to};
  seen[e.to] = 1;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    std::size_t u = queue[qi];
    for (const TraceEdge* ed : edges) {
      if (ed->from != u || comp[ed->to] != comp[e.from] || seen[ed->to]) continue;
      seen[ed->to] = 1;
      parent[ed->to] = u;
      queue.push_back(ed->to);
    }
  }
  std::vector<std::size_t> path;
  for (std::size_t u = e.from; u != kNone; u = parent[u]) {
    path.push_back(u);
    if (u == e.to) break;
  }
  std::reverse(path.begin(), path.end());
  for (std::size_t u : path) cyc.push_back(g.defs[u]);
  return cyc;
}

struct Violation {
  std::vector<Name> cycle;
  std::vector<std::size_t> nodes;  // node indices appearing on the cycle
};

std::vector<std::size_t> cycle_nodes(const TraceGraph& g, const std::vector<Name>& cyc) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < g.defs.size(); ++i) index[g.defs[i].text] = i;
  std::vector<std::size_t> nodes;
  for (const Name& nm : cyc) {
    std::size_t i = index[nm.text];
    if (std::find(nodes.begin(), nodes.end(), i) == nodes.end()) nodes.push_back(i);
  }
  return nodes;
}

// Rejected cycles: those with no constructor on any edge, and those whose
// outermost guard is an inductive constructor. The latter is found priority by
// priority: restrict to edges never guarded above p, where any co-reachable
// edge actually carrying p closes a cycle whose maximal guard is p.
std::vector<Violation> collect_violations(const TraceGraph& g, const Tables& tables,
                                          const std::vector<char>& contractive) {
  std::vector<Violation> out;
  std::vector<const TraceEdge*> all;
  for (const TraceEdge& e : g.edges)
    if (contractive[e.from]) all.push_back(&e);

  auto record = [&](const std::vector<const TraceEdge*>& sub, const std::vector<std::size_t>& comp,
                    const TraceEdge& e) {
    Violation v;
    v.cycle = close_cycle(g, sub, comp, e);
    v.nodes = cycle_nodes(g, v.cycle);
    out.push_back(std::move(v));
  };

  {
    std::vector<const TraceEdge*> bare;
    for (const TraceEdge* e : all)
      if (e->labels.empty()) bare.push_back(e);
    std::vector<std::size_t> comp = scc_ids(g.defs.size(), bare);
    std::set<std::size_t> done;
    for (const TraceEdge* e : bare) {
      if (comp[e->from] != comp[e->to] || done.count(comp[e->from])) continue;
      done.insert(comp[e->from]);
      record(bare, comp, *e);
    }
  }

  std::set<std::size_t> prios;
  for (const TraceEdge* e : all)
    for (std::size_t p : e->labels)
      if (p < tables.inductive.size() && tables.inductive[p]) prios.insert(p);
  for (std::size_t p : prios) {
    std::vector<const TraceEdge*> capped;
    for (const TraceEdge* e : all)
      if (e->labels.empty() || e->labels.back() <= p) capped.push_back(e);
    std::vector<std::size_t> comp = scc_ids(g.defs.size(), capped);
    std::set<std::size_t> done;
    for (const TraceEdge* e : capped) {
      if (!std::binary_search(e->labels.begin(), e->labels.end(), p)) continue;
      if (comp[e->from] != comp[e->to] || done.count(comp[e->from])) continue;
      done.insert(comp[e->from]);
      record(capped, comp, *e);
    }
  }
  return out;
}

std::string join_cycle(const std::vector<Name>& cyc) {
  std::string s;
  for (std::size_t i = 0; i < cyc.size(); ++i) {
    if (i) s += " -> ";
    s += cyc[i].text;
  }
  return s;
}

}  // namespace

std::vector<FamilyPriority> assign_priorities(const Signature& sig) {
  std::vector<FamilyPriority> out;
  for (const Declaration& d : sig.decls) {
    const auto* kd = std::get_if<KindDecl>(&d.decl);
    if (!kd) continue;
    FamilyPriority f;
    f.fam = kd->name;
    f.priority = out.size();
    f.inductive = kd->kind.target() == KindTerminal::Type;
    out.push_back(f);
  }
  return out;
}

TraceGraph build_trace_graph(const Signature& sig) {
  TraceGraph g;
  std::unordered_map<std::string, std::size_t> index;
  for (const Declaration& d : sig.decls) {
    if (const auto* dd = std::get_if<DefDecl>(&d.decl)) {
      index[dd->name.text] = g.defs.size();
      g.defs.push_back(dd->name);
    }
  }
  Tables tables = build_tables(sig);

  std::function<void(std::size_t, const CanTerm&, const std::set<std::size_t>&)> walk =
      [&](std::size_t from, const CanTerm& m, const std::set<std::size_t>& labels) {
        if (m.is_stub()) return;
        const NeutTerm& r = m.neutral();
        std::set<std::size_t> below = labels;
        switch (r.head.kind) {
          case NameKind::Constant: {
            auto it = tables.const_prio.find(r.head.text);
            if (it != tables.const_prio.end()) below.insert(it->second);
            break;
          }
          case NameKind::Recursion: {
            auto it = index.find(r.head.text);
            if (it != index.end()) {
              TraceEdge e;
              e.from = from;
              e.to = it->second;
              e.labels.assign(labels.begin(), labels.end());
              g.edges.push_back(std::move(e));
            }
            break;
          }
          default:
            break;
        }
        for (const CanTerm& e : r.spine.elems) walk(from, e, below);
      };

  for (const Declaration& d : sig.decls)
    if (const auto* dd = std::get_if<DefDecl>(&d.decl))
      walk(index[dd->name.text], dd->body, {});
  return g;
}

ValidityReport validity_report(const Signature& sig) {
  ValidityReport rep;
  TraceGraph g = build_trace_graph(sig);
  std::size_t n = g.defs.size();

  std::vector<const DefDecl*> defs;
  std::vector<SourceSpan> spans;
  for (const Declaration& d : sig.decls)
    if (const auto* dd = std::get_if<DefDecl>(&d.decl)) {
      defs.push_back(dd);
      spans.push_back(d.span);
    }

  std::vector<char> contractive(n), prepat(n);
  for (std::size_t i = 0; i < n; ++i) {
    contractive[i] = is_contractive(defs[i]->body);
    prepat[i] = is_prepattern(defs[i]->body);
  }

  Tables tables = build_tables(sig);
  std::vector<Violation> violations = collect_violations(g, tables, contractive);

  std::vector<char> bad(n, 0);
  for (const Violation& v : violations)
    for (std::size_t u : v.nodes) bad[u] = 1;
  for (std::size_t i = 0; i < n; ++i)
    if (!contractive[i]) bad[i] = 1;

  std::vector<std::vector<std::size_t>> fwd(n);
  for (const TraceEdge& e : g.edges) fwd[e.from].push_back(e.to);

  for (std::size_t i = 0; i < n; ++i) {
    DefVerdict v;
    v.name = g.defs[i];
    v.span = spans[i];
    v.contractive = contractive[i] != 0;
    v.prepattern = prepat[i] != 0;

    std::vector<char> seen(n, 0);
    std::vector<std::size_t> queue{i};
    seen[i] = 1;
    for (std::size_t qi = 0; qi < queue.size() && v.valid; ++qi) {
      std::size_t u = queue[qi];
      if (bad[u]) {
        v.valid = false;
        for (const Violation& vio : violations)
          if (std::find(vio.nodes.begin(), vio.nodes.end(), u) != vio.nodes.end()) {
            v.cycle = vio.cycle;
            break;
          }
        break;
      }
      for (std::size_t w : fwd[u])
        if (!seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
    }
    if (!v.contractive) v.valid = false;
    if (!v.valid) rep.ok = false;
    rep.defs.push_back(std::move(v));
  }
  return rep;
}

std::vector<Diagnostic> validity_diagnostics(const ValidityReport& report) {
  std::vector<Diagnostic> out;
  for (const DefVerdict& d : report.defs)
    if (!d.contractive)
      out.push_back(Diagnostic::error(
          code::noncontractive_definition,
          "definition '" + d.name.text + "' is not contractive: its body must be headed by a constructor",
          d.span));
  std::vector<std::vector<Name>> emitted;
  for (const DefVerdict& d : report.defs) {
    if (d.valid || d.cycle.empty()) continue;
    bool fresh = true;
    for (const auto& c : emitted)
      if (c.size() == d.cycle.size() &&
          std::equal(c.begin(), c.end(), d.cycle.begin(),
                     [](const Name& a, const Name& b) { return a == b; })) {
        fresh = false;
        break;
      }
    if (!fresh) continue;
    emitted.push_back(d.cycle);
    out.push_back(Diagnostic::error(
        code::invalid_cycle,
        "definition '" + d.name.text + "' can loop without a coinductive guard: " +
            join_cycle(d.cycle),
        d.span));
  }
  return out;
}

std::string render_validity_text(const ValidityReport& report) {
  std::ostringstream out;
  for (const DefVerdict& d : report.defs) {
    out << d.name.text << ": " << (d.valid ? "valid" : "invalid");
    std::vector<std::string> notes;
    if (!d.contractive) notes.push_back("noncontractive");
    if (!d.prepattern) notes.push_back("not prepattern");
    if (!notes.empty()) {
      out << " (";
      for (std::size_t i = 0; i < notes.size(); ++i) out << (i ? ", " : "") << notes[i];
      out << ")";
    }
    if (!d.cycle.empty()) out << "  cycle: " << join_cycle(d.cycle);
    out << "\n";
  }
  std::size_t bad = 0;
  for (const DefVerdict& d : report.defs)
    if (!d.valid) ++bad;
  if (report.ok)
    out << "validity: ok (" << report.defs.size() << " definition"
        << (report.defs.size() == 1 ? "" : "s") << ")\n";
  else
    out << "validity: " << bad << " of " << report.defs.size() << " definitions invalid\n";
  return out.str();
}

std::string render_validity_json(const ValidityReport& report, const std::string& file) {
  nlohmann::json defs = nlohmann::json::array();
  for (const DefVerdict& d : report.defs) {
    nlohmann::json item{
        {"name", d.name.text},           {"valid", d.valid},
        {"contractive", d.contractive},  {"prepattern", d.prepattern},
        {"line", d.span.line},           {"col", d.span.col},
    };
    if (!d.cycle.empty()) {
      nlohmann::json cyc = nlohmann::json::array();
      for (const Name& nm : d.cycle) cyc.push_back(nm.text);
      item["cycle"] = std::move(cyc);
    }
    defs.push_back(std::move(item));
  }
  nlohmann::json doc{{"version", 1}, {"file", file}, {"ok", report.ok},
                     {"definitions", std::move(defs)}};
  return doc.dump(2) + "\n";
}

}  // namespace colf
