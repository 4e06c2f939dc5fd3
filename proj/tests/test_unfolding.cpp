#include "colf/unfolding.hpp"

#include "colf/substitution.hpp"
#include "doctest.h"

using namespace colf;

namespace {

Spine surf(std::vector<CanTerm> elems) { return Spine{SpineKind::Surface, std::move(elems)}; }

CanTerm sv(const std::string& x) { return CanTerm::head(var(x), surf({})); }
CanTerm sc(const std::string& c, std::vector<CanTerm> args = {}) {
  return CanTerm::head(constant(c), surf(std::move(args)));
}
CanTerm sr(const std::string& r, std::vector<CanTerm> args = {}) {
  return CanTerm::head(recursion(r), surf(std::move(args)));
}

CanType atom0(const std::string& a) {
  return CanType::atom(make_atom(family(a), surf({})));
}

void push_family(Signature& sig, const std::string& a, KindTerminal t) {
  sig.push({KindDecl{family(a), Kind::terminal(t), 0}, {}});
}
void push_const(Signature& sig, const std::string& c, CanType ty) {
  sig.push({ConstDecl{constant(c), std::move(ty), 0}, {}});
}
void push_def(Signature& sig, const std::string& r, CanType ty, CanTerm body) {
  sig.push({DefDecl{recursion(r), std::move(ty), std::move(body), 0}, {}});
}

// cobin : cotype. b0, b1 : cobin -> cobin.
// bzero = b0 (bzero). bone = b1 (bzero). w1 = b1 (w1). w2 = b1 (b0 w2).
Signature cobin_sig() {
  Signature sig;
  push_family(sig, "cobin", KindTerminal::Cotype);
  CanType cob = atom0("cobin");
  CanType unary = CanType::pi(var("x"), cob, cob);
  push_const(sig, "b0", unary);
  push_const(sig, "b1", unary);
  push_def(sig, "bzero", cob, sc("b0", {sr("bzero")}));
  push_def(sig, "bone", cob, sc("b1", {sr("bzero")}));
  push_def(sig, "w1", cob, sc("b1", {sr("w1")}));
  push_def(sig, "w2", cob, sc("b1", {sc("b0", {sr("w2")})}));
  return sig;
}

CanTerm expanded(const std::string& c, std::vector<CanTerm> args) {
  return CanTerm::head(constant(c), Spine{SpineKind::Suspended, std::move(args)});
}

}  // namespace

TEST_CASE("expansion bottoms out at depth 0") {
  Signature sig = cobin_sig();
  Expander ex(sig);
  CHECK(ex.expand_term(sr("w1"), 0).is_stub());
  CHECK(ex.expand_term(sc("b0", {sr("w1")}), 0).is_stub());
}

TEST_CASE("each constant consumes one unit of depth") {
  Signature sig = cobin_sig();
  Expander ex(sig);

  CanTerm w2_3 = ex.expand_term(sr("w2"), 3);
  CanTerm want = expanded("b1", {expanded("b0", {expanded("b1", {CanTerm::stub()})})});
  CHECK(alpha_equal(w2_3, want));

  CanTerm bone_2 = ex.expand_term(sr("bone"), 2);
  CHECK(alpha_equal(bone_2, expanded("b1", {expanded("b0", {CanTerm::stub()})})));

  CanTerm w1_1 = ex.expand_term(sr("w1"), 1);
  CHECK(alpha_equal(w1_1, expanded("b1", {CanTerm::stub()})));
}

TEST_CASE("expansion truncates coherently across depths") {
  Signature sig = cobin_sig();
  Expander ex(sig);
  for (Depth k = 0; k <= 6; ++k) {
    CanTerm lo = ex.expand_term(sr("w2"), k);
    CanTerm hi = ex.expand_term(sr("w2"), k + 1);
    CHECK(eq_at_depth(lo, hi, k));
  }
}

TEST_CASE("applied definitions contract against their spines") {
  // nat : type. z : nat. s : nat -> nat.
  // str : cotype. cons : nat -> str -> str.
  // from : nat -> str = [n] cons n (from (s n)).
  Signature sig;
  push_family(sig, "nat", KindTerminal::Type);
  push_const(sig, "z", atom0("nat"));
  push_const(sig, "s", CanType::pi(var("x"), atom0("nat"), atom0("nat")));
  push_family(sig, "str", KindTerminal::Cotype);
  push_const(sig, "cons",
             CanType::pi(var("x"), atom0("nat"), CanType::pi(var("t"), atom0("str"), atom0("str"))));
  CanType from_ty = CanType::pi(var("n"), atom0("nat"), atom0("str"));
  CanTerm body = CanTerm::make(
      {var("n")},
      make_neut(constant("cons"), surf({sv("n"), sr("from", {sc("s", {sv("n")})})})));
  push_def(sig, "from", from_ty, body);

  Expander ex(sig);
  CanTerm got = ex.expand_term(sr("from", {sc("z")}), 2);
  CanTerm want = expanded("cons", {expanded("z", {}), expanded("cons", {CanTerm::stub(), CanTerm::stub()})});
  CHECK_MESSAGE(alpha_equal(got, want), show_term(got));

  // The argument feeds the unfolded occurrences: at depth 3 the second
  // element starts with s, whose own argument is already out of view.
  CanTerm got3 = ex.expand_term(sr("from", {sc("z")}), 3);
  CanTerm want3 = expanded(
      "cons", {expanded("z", {}),
               expanded("cons", {expanded("s", {CanTerm::stub()}),
                                 expanded("cons", {CanTerm::stub(), CanTerm::stub()})})});
  CHECK_MESSAGE(alpha_equal(got3, want3), show_term(got3));
}

TEST_CASE("nullary expansions are memoized") {
  Signature sig = cobin_sig();
  Expander ex(sig);
  CHECK(ex.memo_size() == 0);
  ex.expand_term(sr("w2"), 3);
  std::size_t after = ex.memo_size();
  CHECK(after >= 2);  // w2 at 3 and at the inner depth 1
  ex.expand_term(sr("w2"), 3);
  CHECK(ex.memo_size() == after);

  Expander capped(sig, 0);
  capped.expand_term(sr("w2"), 3);
  CHECK(capped.memo_size() == 0);
}

TEST_CASE("expansion failures carry diagnostic codes") {
  Signature sig = cobin_sig();
  // loop : cobin = loop.
  push_def(sig, "loop", atom0("cobin"), sr("loop"));
  Expander ex(sig);
  CHECK_THROWS_WITH_AS(ex.expand_term(sr("loop"), 1), doctest::Contains("loop"), ExpandError);
  try {
    ex.expand_term(sr("loop"), 2);
    FAIL("expected a throw");
  } catch (const ExpandError& e) {
    CHECK(std::string(e.code) == "noncontractive-definition");
    CHECK(e.subject == "loop");
  }

  try {
    ex.expand_term(sr("ghost"), 1);
    FAIL("expected a throw");
  } catch (const ExpandError& e) {
    CHECK(std::string(e.code) == "unbound-recursion");
  }
}

TEST_CASE("mutual loops without constructors are caught") {
  Signature sig;
  push_family(sig, "d", KindTerminal::Cotype);
  push_def(sig, "p", atom0("d"), sr("q"));
  push_def(sig, "q", atom0("d"), sr("p"));
  Expander ex(sig);
  CHECK_THROWS_AS(ex.expand_term(sr("p"), 1), ExpandError);
}

TEST_CASE("depth-indexed equality") {
  Signature sig = cobin_sig();
  Expander ex(sig);

  SUBCASE("base cases") {
    CHECK(eq_at_depth(sc("b0"), sv("x"), 0));
    CHECK(eq_at_depth(CanTerm::stub(), CanTerm::stub(), 4));
    CHECK_FALSE(eq_at_depth(CanTerm::stub(), expanded("b0", {}), 1));
  }

  SUBCASE("w1 and w2 agree to depth 1 and split at 2") {
    for (Depth k = 0; k <= 4; ++k) {
      CanTerm a = ex.expand_term(sr("w1"), k);
      CanTerm b = ex.expand_term(sr("w2"), k);
      CHECK(eq_at_depth(a, b, k) == (k <= 1));
    }
  }

  SUBCASE("binders correspond positionally") {
    CanTerm a = CanTerm::make({var("x")}, make_neut(constant("b1"), {SpineKind::Suspended, {sv("x")}}));
    CanTerm b = CanTerm::make({var("y")}, make_neut(constant("b1"), {SpineKind::Suspended, {sv("y")}}));
    CHECK(eq_at_depth(a, b, 5));
    CanTerm c = CanTerm::make({var("x"), var("y")},
                              make_neut(constant("b1"), {SpineKind::Suspended, {sv("x")}}));
    CHECK_FALSE(eq_at_depth(a, c, 5));
  }

  SUBCASE("continuing elements compare at the same depth, suspended one lower") {
    CanTerm cont_a = CanTerm::head(var("f"), {SpineKind::Continuing, {expanded("b0", {})}});
    CanTerm cont_b = CanTerm::head(var("f"), {SpineKind::Continuing, {expanded("b1", {})}});
    CHECK_FALSE(eq_at_depth(cont_a, cont_b, 1));

    CanTerm susp_a = expanded("b0", {expanded("b0", {})});
    CanTerm susp_b = expanded("b0", {expanded("b1", {})});
    CHECK(eq_at_depth(susp_a, susp_b, 1));
    CHECK_FALSE(eq_at_depth(susp_a, susp_b, 2));
  }
}

TEST_CASE("depth-indexed type equality") {
  CanType a1 = CanType::pi(var("x"), atom0("cobin"),
                           CanType::atom(make_atom(family("eq"), surf({sv("x"), sv("x")}))));
  CanType a2 = CanType::pi(var("y"), atom0("cobin"),
                           CanType::atom(make_atom(family("eq"), surf({sv("y"), sv("y")}))));
  CanType a3 = CanType::pi(var("y"), atom0("cobin"),
                           CanType::atom(make_atom(family("eq"), surf({sv("y"), sc("b0")}))));
  CHECK(eq_types_at_depth(a1, a2, 8));
  CHECK(eq_types_at_depth(a1, a3, 1));  // index terms sit at depth 0 here
  CHECK_FALSE(eq_types_at_depth(a1, a3, 2));
  CHECK(eq_types_at_depth(a1, a3, 0));

  CHECK_FALSE(eq_types_at_depth(atom0("cobin"), atom0("nat"), 1));
  CHECK_FALSE(eq_types_at_depth(a1, atom0("cobin"), 3));
}

TEST_CASE("depth-indexed kind equality") {
  Kind k1 = Kind::pi(var("x"), atom0("cobin"), Kind::terminal(KindTerminal::Type));
  Kind k2 = Kind::pi(var("y"), atom0("cobin"), Kind::terminal(KindTerminal::Type));
  Kind k3 = Kind::pi(var("y"), atom0("cobin"), Kind::terminal(KindTerminal::Cotype));
  CHECK(eq_kinds_at_depth(k1, k2, 4));
  CHECK_FALSE(eq_kinds_at_depth(k1, k3, 4));
  CHECK(eq_kinds_at_depth(k1, k3, 0));
}

TEST_CASE("types and kinds expand their index terms one depth lower") {
  Signature sig = cobin_sig();
  // eq : cobin -> cobin -> type, as a family with an indexed kind.
  push_family(sig, "eq", KindTerminal::Type);
  Expander ex(sig);

  CanType ty = CanType::atom(make_atom(family("eq"), surf({sr("w1"), sr("w2")})));
  CanType e2 = ex.expand_type(ty, 2);
  REQUIRE(e2.target().spine.elems.size() == 2);
  CHECK(alpha_equal(e2.target().spine.elems[0], expanded("b1", {CanTerm::stub()})));
  CHECK(alpha_equal(e2.target().spine.elems[1], expanded("b1", {CanTerm::stub()})));
  CHECK(e2.target().spine.kind == SpineKind::Suspended);

  CanType e0 = ex.expand_type(ty, 0);
  CHECK(e0.target().spine.elems[0].is_stub());

  // Pi domains stay at the node depth.
  CanType pi = CanType::pi(var("x"), ty, atom0("cobin"));
  CanType p1 = ex.expand_type(pi, 1);
  CHECK(alpha_equal(p1.domain().target().spine.elems[0], CanTerm::stub()));
  CanType p2 = ex.expand_type(pi, 2);
  CHECK(alpha_equal(p2.domain().target().spine.elems[0], expanded("b1", {CanTerm::stub()})));

  Kind kd = Kind::pi(var("x"), ty, Kind::terminal(KindTerminal::Type));
  Kind k2 = ex.expand_kind(kd, 2);
  CHECK(alpha_equal(k2.pis()[0].second.target().spine.elems[0], expanded("b1", {CanTerm::stub()})));
  CHECK(k2.target() == KindTerminal::Type);
}

TEST_CASE("expanded signatures drop definitions") {
  Signature sig = cobin_sig();
  push_family(sig, "eq", KindTerminal::Type);
  Expander ex(sig);
  Signature s2 = ex.expand_signature(2);
  CHECK(s2.find_definition("w1") == nullptr);
  CHECK(s2.find_definition("w2") == nullptr);
  CHECK(s2.find_family("cobin") != nullptr);
  CHECK(s2.find_constant("b0") != nullptr);
  // b0's argument and target types survive expansion.
  const ConstDecl* b0 = s2.find_constant("b0");
  REQUIRE(b0->type.is_pi());
  CHECK(b0->type.domain().target().head == family("cobin"));
}

TEST_CASE("variable heads pass depth through unchanged") {
  // In [x] b1 (x b0-ish), the variable spine keeps the outer depth.
  Signature sig = cobin_sig();
  Expander ex(sig);
  // f : (cobin -> cobin) applied under a constant: b1 (f (w1))
  CanTerm t = sc("b1", {CanTerm::head(var("f"), surf({sr("w1")}))});
  CanTerm e = ex.expand_term(t, 2);
  // b1 at depth 2; f at depth 1; w1 also at depth 1 -> b1 (_) shape inside.
  REQUIRE(!e.is_stub());
  const CanTerm& fe = e.neutral().spine.elems[0];
  CHECK(fe.neutral().head == var("f"));
  CHECK(fe.neutral().spine.kind == SpineKind::Continuing);
  CHECK(alpha_equal(fe.neutral().spine.elems[0], expanded("b1", {CanTerm::stub()})));
}
