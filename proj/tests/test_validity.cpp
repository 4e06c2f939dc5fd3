#include <doctest.h>

#include <cstddef>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "colf/substitution.hpp"
#include "colf/surface.hpp"
#include "colf/unfolding.hpp"
#include "colf/validity.hpp"
#include "json.hpp"
#include "oracle.hpp"

using namespace colf;

namespace {

Signature elab(const std::string& src) {
  std::vector<Diagnostic> diags;
  Signature sig = parse_and_elaborate(src, diags);
  REQUIRE(!any_errors(diags));
  return sig;
}

bool has_code(const std::vector<Diagnostic>& ds, const char* c) {
  for (const Diagnostic& d : ds) {
    if (d.code == std::string(c)) return true;
  }
  return false;
}

const DefVerdict& verdict(const ValidityReport& rep, const std::string& name) {
  for (const DefVerdict& d : rep.defs) {
    if (d.name.text == name) return d;
  }
  REQUIRE(false);
  return rep.defs.front();
}

const TraceEdge* find_edge(const TraceGraph& g, const std::string& from, const std::string& to) {
  for (const TraceEdge& e : g.edges) {
    if (g.defs[e.from].text == from && g.defs[e.to].text == to) return &e;
  }
  return nullptr;
}

const char* kCobin =
    "cobin : cotype.\n"
    "b0 : cobin -> cobin.\n"
    "b1 : cobin -> cobin.\n"
    "bzero : cobin = b0 (bzero).\n"
    "bone : cobin = b1 (bzero).\n"
    "w1 : cobin = b1 (w1).\n"
    "w2 : cobin = b1 (b0 w2).\n"
    "bdup : cobin -> cobin = [x] b0 (b1 (bdup x)).\n";

const char* kStream =
    "nat : type.\n"
    "stream : cotype.\n"
    "z : nat.\n"
    "s : nat -> nat.\n"
    "two : nat = s (s z).\n"
    "cocons : nat -> stream -> stream.\n"
    "up : nat -> stream = [x] cocons x (up (s x)).\n";

const char* kBplus =
    "cobin : cotype.\n"
    "b0 : cobin -> cobin.\n"
    "b1 : cobin -> cobin.\n"
    "bzero : cobin = b0 (bzero).\n"
    "bplus : cobin -> cobin -> cobin -> cotype.\n"
    "bplus/00 : bplus X Y Z -> bplus (b0 X) (b0 Y) (b0 Z).\n"
    "b0+0is0 : bplus bzero bzero bzero = bplus/00 b0+0is0.\n";

const char* kBadnat =
    "nat : type.\n"
    "z : nat.\n"
    "s : nat -> nat.\n"
    "badnat : nat = s badnat.\n";

// Valid: the coinductive family is declared later, so its constructor g
// outranks the inductive guard f on the cycle.
const char* kGuardRace =
    "a : type.\n"
    "b : cotype.\n"
    "f : b -> a.\n"
    "g : a -> b.\n"
    "w : b = g (f w).\n";

// Same definition, families swapped: the inductive guard now outranks.
const char* kGuardRaceFlip =
    "b : cotype.\n"
    "a : type.\n"
    "f : b -> a.\n"
    "g : a -> b.\n"
    "w : b = g (f w).\n";

const char* kReach =
    "nat : type.\n"
    "cnat : nat -> nat.\n"
    "bad : nat = cnat bad.\n"
    "reach : nat = cnat bad.\n"
    "co : cotype.\n"
    "cco : co -> co.\n"
    "fine : co = cco fine.\n";

const char* kNotPrepattern =
    "nat : type.\n"
    "z : nat.\n"
    "s : nat -> nat.\n"
    "str : cotype.\n"
    "put : nat -> str -> str.\n"
    "w : nat -> str = [x] put x (w (s x)).\n";

const char* kEtaPrepattern =
    "str : cotype.\n"
    "grd : str -> str.\n"
    "w : (str -> str) -> str = [h] grd (w h).\n";

const char* kNoncontractive =
    "d : type.\n"
    "c : d.\n"
    "r : (d -> d) -> d = [x] x (r x).\n";

Spine surf(std::vector<CanTerm> es = {}) { return Spine{SpineKind::Surface, std::move(es)}; }

CanType atomic(const char* fam) { return CanType::atom(make_atom(family(fam), surf())); }

// Two definitions referring to each other through distinct unary guards of
// one family; only expressible by direct construction since the surface
// language resolves names left to right.
Signature mutual_sig(bool coinductive) {
  Signature sig;
  Name f = family("f");
  sig.push(Declaration{
      KindDecl{f, Kind::terminal(coinductive ? KindTerminal::Cotype : KindTerminal::Type), 0},
      {}});
  CanType guard_ty = CanType::pi(var("x"), atomic("f"), atomic("f"));
  sig.push(Declaration{ConstDecl{constant("c"), guard_ty, 0}, {}});
  sig.push(Declaration{ConstDecl{constant("c'"), guard_ty, 0}, {}});
  Name a = recursion("a");
  Name b = recursion("b");
  CanTerm a_body = CanTerm::head(constant("c"), surf({CanTerm::head(b, surf())}));
  CanTerm b_body = CanTerm::head(constant("c'"), surf({CanTerm::head(a, surf())}));
  sig.push(Declaration{DefDecl{a, atomic("f"), a_body, 0}, {}});
  sig.push(Declaration{DefDecl{b, atomic("f"), b_body, 0}, {}});
  return sig;
}

// Contractive self-loop through a constant whose target family is undeclared,
// so the guard carries no priority at all.
Signature ghost_sig() {
  Signature sig;
  sig.push(Declaration{KindDecl{family("f"), Kind::terminal(KindTerminal::Cotype), 0}, {}});
  CanType ghost_ty = CanType::pi(var("x"), atomic("f"), atomic("g"));
  sig.push(Declaration{ConstDecl{constant("ghost"), ghost_ty, 0}, {}});
  Name a = recursion("a");
  CanTerm body = CanTerm::head(constant("ghost"), surf({CanTerm::head(a, surf())}));
  sig.push(Declaration{DefDecl{a, atomic("f"), body, 0}, {}});
  return sig;
}

}  // namespace

TEST_CASE("priorities follow declaration order and kind terminals") {
  Signature sig = elab(kGuardRace);
  std::vector<FamilyPriority> ps = assign_priorities(sig);
  REQUIRE(ps.size() == 2);
  CHECK(ps[0].fam.text == "a");
  CHECK(ps[0].priority == 0);
  CHECK(ps[0].inductive);
  CHECK(ps[1].fam.text == "b");
  CHECK(ps[1].priority == 1);
  CHECK(!ps[1].inductive);
}

TEST_CASE("trace graph records one labeled edge per occurrence") {
  Signature sig = elab(kCobin);
  TraceGraph g = build_trace_graph(sig);
  REQUIRE(g.defs.size() == 5);
  CHECK(g.defs[0].text == "bzero");
  CHECK(g.defs[4].text == "bdup");
  CHECK(g.edges.size() == 5);
  const TraceEdge* self = find_edge(g, "w2", "w2");
  REQUIRE(self != nullptr);
  CHECK(self->labels == std::vector<std::size_t>{0});
  const TraceEdge* cross = find_edge(g, "bone", "bzero");
  REQUIRE(cross != nullptr);
  CHECK(cross->labels == std::vector<std::size_t>{0});

  // Both constructors on the path contribute their family's priority.
  Signature race = elab(kGuardRace);
  TraceGraph rg = build_trace_graph(race);
  const TraceEdge* loop = find_edge(rg, "w", "w");
  REQUIRE(loop != nullptr);
  CHECK(loop->labels == (std::vector<std::size_t>{0, 1}));
}

TEST_CASE("coinductively guarded corpus definitions are valid") {
  for (const char* src : {kCobin, kStream, kBplus}) {
    Signature sig = elab(src);
    ValidityReport rep = validity_report(sig);
    CHECK(rep.ok);
    for (const DefVerdict& d : rep.defs) {
      CHECK(d.valid);
      CHECK(d.contractive);
      CHECK(d.cycle.empty());
    }
    CHECK(validity_diagnostics(rep).empty());
  }
  for (const char* src : {kCobin, kBplus}) {
    for (const DefVerdict& d : validity_report(elab(src)).defs) CHECK(d.prepattern);
  }
  // `up` feeds its recursive occurrence a constant application, so it is the
  // one corpus definition outside the prepattern fragment.
  ValidityReport stream = validity_report(elab(kStream));
  CHECK(verdict(stream, "two").prepattern);
  CHECK(!verdict(stream, "up").prepattern);
}

TEST_CASE("inductive self-loop is rejected with a witness") {
  Signature sig = elab(kBadnat);
  ValidityReport rep = validity_report(sig);
  CHECK(!rep.ok);
  const DefVerdict& d = verdict(rep, "badnat");
  CHECK(!d.valid);
  CHECK(d.contractive);
  CHECK(d.prepattern);
  REQUIRE(d.cycle.size() == 2);
  CHECK(d.cycle[0].text == "badnat");
  CHECK(d.cycle[1].text == "badnat");

  std::vector<Diagnostic> diags = validity_diagnostics(rep);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].code == code::invalid_cycle);
  CHECK(diags[0].span.line == 4);
  CHECK(diags[0].message.find("badnat") != std::string::npos);
}

TEST_CASE("declaration order decides which guard outranks") {
  Signature ok = elab(kGuardRace);
  CHECK(validity_report(ok).ok);

  Signature bad = elab(kGuardRaceFlip);
  ValidityReport rep = validity_report(bad);
  CHECK(!rep.ok);
  const DefVerdict& d = verdict(rep, "w");
  CHECK(!d.valid);
  REQUIRE(d.cycle.size() == 2);
  CHECK(d.cycle[0].text == "w");
}

TEST_CASE("definitions reaching a rejected cycle are invalid too") {
  Signature sig = elab(kReach);
  ValidityReport rep = validity_report(sig);
  CHECK(!rep.ok);
  CHECK(!verdict(rep, "bad").valid);
  const DefVerdict& r = verdict(rep, "reach");
  CHECK(!r.valid);
  REQUIRE(r.cycle.size() == 2);
  CHECK(r.cycle[0].text == "bad");
  CHECK(verdict(rep, "fine").valid);

  // The shared witness cycle is reported once.
  std::vector<Diagnostic> diags = validity_diagnostics(rep);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].code == code::invalid_cycle);
}

TEST_CASE("noncontractive bodies are flagged and poison reachability") {
  Signature sig = elab(kNoncontractive);
  ValidityReport rep = validity_report(sig);
  CHECK(!rep.ok);
  const DefVerdict& d = verdict(rep, "r");
  CHECK(!d.contractive);
  CHECK(!d.valid);
  CHECK(d.cycle.empty());
  // Applied to a bound variable, so the prepattern flag itself holds.
  CHECK(d.prepattern);

  std::vector<Diagnostic> diags = validity_diagnostics(rep);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].code == code::noncontractive_definition);
}

TEST_CASE("prepattern flag is informational") {
  Signature sig = elab(kNotPrepattern);
  ValidityReport rep = validity_report(sig);
  const DefVerdict& d = verdict(rep, "w");
  CHECK(d.valid);
  CHECK(d.contractive);
  CHECK(!d.prepattern);

  Signature eta = elab(kEtaPrepattern);
  const DefVerdict& e = verdict(validity_report(eta), "w");
  CHECK(e.valid);
  CHECK(e.prepattern);
}

TEST_CASE("mutual cycles work across definitions") {
  ValidityReport ok = validity_report(mutual_sig(true));
  CHECK(ok.ok);
  CHECK(verdict(ok, "a").valid);
  CHECK(verdict(ok, "b").valid);

  ValidityReport bad = validity_report(mutual_sig(false));
  CHECK(!bad.ok);
  const DefVerdict& a = verdict(bad, "a");
  const DefVerdict& b = verdict(bad, "b");
  CHECK(!a.valid);
  CHECK(!b.valid);
  REQUIRE(a.cycle.size() == 3);
  CHECK(a.cycle[0].text == "a");
  CHECK(a.cycle[1].text == "b");
  CHECK(a.cycle[2].text == "a");
  CHECK(b.cycle.size() == 3);
  CHECK(validity_diagnostics(bad).size() == 1);
}

TEST_CASE("cycles with no priority-bearing guard are rejected") {
  Signature sig = ghost_sig();
  ValidityReport rep = validity_report(sig);
  CHECK(!rep.ok);
  const DefVerdict& d = verdict(rep, "a");
  CHECK(d.contractive);
  CHECK(!d.valid);
  REQUIRE(d.cycle.size() == 2);
  CHECK(d.cycle[0].text == "a");
  CHECK(has_code(validity_diagnostics(rep), code::invalid_cycle));
}

TEST_CASE("graph verdicts agree with depth-bounded trace enumeration") {
  std::vector<const char*> corpus = {kCobin,         kStream, kBplus,          kBadnat,
                                     kGuardRace,     kReach,  kGuardRaceFlip,  kNotPrepattern,
                                     kEtaPrepattern};
  std::vector<Signature> sigs;
  for (const char* src : corpus) sigs.push_back(elab(src));
  sigs.push_back(mutual_sig(true));
  sigs.push_back(mutual_sig(false));
  sigs.push_back(ghost_sig());

  for (const Signature& sig : sigs) {
    ValidityReport rep = validity_report(sig);
    for (const DefVerdict& d : rep.defs) {
      // The walker never terminates on unguarded variable-headed bodies.
      if (!d.contractive) continue;
      CHECK(d.valid == !oracle::walk_says_invalid(sig, d.name.text, 12));
    }
  }

  std::mt19937 rng(20240817);
  std::size_t compared = 0;
  for (int i = 0; i < 200; ++i) {
    Signature sig = oracle::gen_validity_signature(rng);
    ValidityReport rep = validity_report(sig);
    for (const DefVerdict& d : rep.defs) {
      CHECK(d.valid == !oracle::walk_says_invalid(sig, d.name.text, 12));
      ++compared;
    }
  }
  CHECK(compared > 100);
}

TEST_CASE("valid definitions expand at every tested depth") {
  std::mt19937 rng(7);
  for (int i = 0; i < 50; ++i) {
    Signature sig = oracle::gen_validity_signature(rng);
    ValidityReport rep = validity_report(sig);
    Expander ex(sig);
    for (const DefVerdict& d : rep.defs) {
      if (!d.valid) continue;
      CanTerm ref = CanTerm::head(recursion(d.name.text), Spine{SpineKind::Surface, {}});
      for (Depth k = 0; k <= 4; ++k) CHECK_NOTHROW(ex.expand_term(ref, k));
    }
  }
}

TEST_CASE("composition of accepted definitions stays productive") {
  // Substitute one definition's expansion for the bound variable of another's
  // body, then make sure the composite still expands and its traces stay
  // guarded.
  auto compose = [](const Signature& sig, const char* outer, const char* inner,
                    Depth k) -> CanTerm {
    const DefDecl* fn = sig.find_definition(outer);
    const DefDecl* arg = sig.find_definition(inner);
    REQUIRE(fn != nullptr);
    REQUIRE(arg != nullptr);
    REQUIRE(fn->body.binders().size() == 1);
    Expander ex(sig);
    CanTerm expanded =
        ex.expand_term(CanTerm::head(recursion(inner), Spine{SpineKind::Surface, {}}), k);
    (void)arg;
    CanTerm open = CanTerm::make({}, fn->body.neutral());
    SimpleType tau = erase(fn->type.domain());
    auto composed = subst_canonical(expanded, fn->body.binders()[0], tau, open,
                                    std::numeric_limits<Depth>::max());
    REQUIRE(composed.has_value());
    return *composed;
  };

  Signature cobin = elab(kCobin);
  Signature stream = elab(kStream);
  struct Case {
    const Signature* sig;
    const char* outer;
    const char* inner;
  };
  for (const Case& c : {Case{&cobin, "bdup", "w1"}, Case{&stream, "up", "two"}}) {
    for (Depth k = 1; k <= 6; ++k) {
      CanTerm composite = compose(*c.sig, c.outer, c.inner, k);
      Expander ex(*c.sig);
      for (Depth j = 1; j <= 6; ++j) {
        CanTerm out = ex.expand_term(composite, j);
        CHECK(!out.is_stub());
      }
      Signature extended = *c.sig;
      Name comp = recursion("composite");
      extended.push(Declaration{
          DefDecl{comp, c.sig->find_definition(c.outer)->type.codomain(), composite, 0}, {}});
      CHECK(!oracle::walk_says_invalid(extended, "composite", 12));
      ValidityReport rep = validity_report(extended);
      CHECK(verdict(rep, "composite").valid);
    }
  }
}

TEST_CASE("report renders as text and json") {
  ValidityReport rep = validity_report(elab(kBadnat));
  std::string text = render_validity_text(rep);
  CHECK(text.find("badnat: invalid") != std::string::npos);
  CHECK(text.find("cycle: badnat -> badnat") != std::string::npos);
  CHECK(text.find("validity: 1 of 1 definitions invalid") != std::string::npos);

  nlohmann::json doc = nlohmann::json::parse(render_validity_json(rep, "badnat.colf"));
  CHECK(doc["version"] == 1);
  CHECK(doc["file"] == "badnat.colf");
  CHECK(doc["ok"] == false);
  REQUIRE(doc["definitions"].size() == 1);
  CHECK(doc["definitions"][0]["name"] == "badnat");
  CHECK(doc["definitions"][0]["valid"] == false);
  CHECK(doc["definitions"][0]["contractive"] == true);
  CHECK(doc["definitions"][0]["cycle"] == nlohmann::json::array({"badnat", "badnat"}));

  ValidityReport okrep = validity_report(elab(kCobin));
  CHECK(render_validity_text(okrep).find("validity: ok (5 definitions)") != std::string::npos);
  nlohmann::json okdoc = nlohmann::json::parse(render_validity_json(okrep, "cobin.colf"));
  CHECK(okdoc["ok"] == true);
  CHECK(!okdoc["definitions"][0].contains("cycle"));
}
