// Release gate for the kernel. Each numbered check covers one
// release-blocking property end to end and prints exactly one verdict line;
// the thresholds live next to the code that enforces them and are not meant
// to be loosened.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "colf/substitution.hpp"
#include "colf/surface.hpp"
#include "colf/typecheck.hpp"
#include "colf/unfolding.hpp"
#include "colf/validity.hpp"
#include "oracle.hpp"

using namespace colf;

namespace {

#ifndef COLFW_CORPUS_DIR
#define COLFW_CORPUS_DIR "corpus"
#endif

constexpr double kCorpusBudgetSeconds = 10.0;
constexpr Depth kCorpusDepths[] = {0, 1, 2, 4, 8};
constexpr Depth kNegativeDepth = 4;
constexpr int kSubstCases = 1000;     // generated substitution instances
constexpr int kSubstTypeDepth = 3;    // arrow depth of generated simple types
constexpr int kSubstBudget = 12;      // application budget per generated term
constexpr int kSubstFuel = 400000;    // normalization fuel for the reference
constexpr int kCommutationTriples = 500;
constexpr Depth kCommutationMaxDepth = 6;
constexpr Depth kCoherenceMaxDepth = 7;  // truncation coherence for k <= 7
constexpr Depth kMonotoneMaxDepth = 8;   // checking compared across 0..8
constexpr Depth kWalkDepth = 12;         // trace enumeration bound
constexpr int kRandomValiditySignatures = 200;
constexpr Depth kSigmaCheckDepth = 6;

const char* const kGoodFiles[] = {
    "indexed_stream.colf", "stream.colf", "fib.colf",
    "bitstream.colf",      "sigma4.colf", "sigma5.colf",
    "sigma6.colf",         "cobin.colf",  "bsucc_sound.colf",
};

struct NegativeCase {
  const char* file;
  const char* code;
};

const NegativeCase kNegatives[] = {
    {"bad/noncontractive.colf", code::noncontractive_definition},
    {"bad/badnat.colf", code::invalid_cycle},
    {"bad/family_underapplied.colf", code::family_underapplied},
    {"bad/spine_arity.colf", code::spine_arity},
    {"bad/neutral_pi.colf", code::neutral_against_pi},
};

struct Gate {
  bool ok = true;
  std::string detail;
};

std::string corpus_path(const std::string& rel) {
  return std::string(COLFW_CORPUS_DIR) + "/" + rel;
}

bool slurp(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

// Parses and elaborates one corpus file; elaboration diagnostics land in
// `diags`. Returns false only when the file cannot be read.
bool load(const std::string& rel, Signature& sig, std::vector<Diagnostic>& diags) {
  std::string src;
  if (!slurp(corpus_path(rel), src)) return false;
  sig = parse_and_elaborate(src, diags);
  return true;
}

std::string first_message(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::Error) return "[" + d.code + "] " + d.message;
  return diags.empty() ? std::string("none") : diags.front().message;
}

// Depth-k expansion of a definition. Expanding the body equals expanding a
// reference (contraction costs no depth) and stays eta-long for definitions
// of function type.
CanTerm expand_def(Expander& ex, const DefDecl& def, Depth k) {
  return ex.expand_term(def.body, k);
}

// The same scope the substitution generators draw heads from everywhere.
std::vector<std::pair<Name, SimpleType>> generator_scope() {
  SimpleType st = SimpleType::base();
  SimpleType arr = SimpleType::arrow(st, st);
  return {
      {constant("k0"), st},
      {constant("k1"), arr},
      {constant("k2"), SimpleType::arrow(st, arr)},
      {constant("hi"), SimpleType::arrow(arr, st)},
  };
}

// 1. Every corpus signature parses, elaborates, passes the productivity
//    analysis, and checks cleanly at each pinned depth, within budget.
Gate corpus_acceptance() {
  Gate g;
  auto t0 = std::chrono::steady_clock::now();
  for (const char* file : kGoodFiles) {
    Signature sig;
    std::vector<Diagnostic> diags;
    if (!load(file, sig, diags)) return {false, std::string("cannot read ") + file};
    if (any_errors(diags))
      return {false, std::string(file) + " elaboration: " + first_message(diags)};
    ValidityReport rep = validity_report(sig);
    if (!rep.ok) return {false, std::string(file) + " fails the productivity analysis"};
    for (Depth k : kCorpusDepths) {
      std::vector<Diagnostic> cd = check_signature(sig, k);
      if (!cd.empty())
        return {false, std::string(file) + " depth " + std::to_string(k) + ": " +
                           first_message(cd)};
    }
  }
  std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  if (dt.count() >= kCorpusBudgetSeconds)
    return {false, "runtime " + std::to_string(dt.count()) + "s over budget"};
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "9 signatures clean at depths 0,1,2,4,8 in %.2fs (budget %.0fs)", dt.count(),
                kCorpusBudgetSeconds);
  return {true, buf};
}

// 2. Each negative fixture is rejected with exactly its expected code.
Gate negative_suite() {
  for (const auto& neg : kNegatives) {
    Signature sig;
    std::vector<Diagnostic> diags;
    if (!load(neg.file, sig, diags)) return {false, std::string("cannot read ") + neg.file};
    // Same stages, same order as `colfw check`.
    ValidityReport rep = validity_report(sig);
    for (auto& d : validity_diagnostics(rep)) diags.push_back(std::move(d));
    for (auto& d : check_signature(sig, kNegativeDepth)) diags.push_back(std::move(d));
    std::set<std::string> codes;
    for (const auto& d : diags)
      if (d.severity == Severity::Error) codes.insert(d.code);
    if (codes.empty()) return {false, std::string(neg.file) + " was accepted"};
    if (codes.size() != 1 || *codes.begin() != neg.code) {
      std::string got;
      for (const auto& c : codes) got += (got.empty() ? "" : ", ") + c;
      return {false, std::string(neg.file) + " expected only [" + neg.code + "], got [" + got +
                         "]"};
    }
  }
  return {true, "5 fixtures each rejected with exactly the expected code"};
}

// 3. Hereditary substitution agrees with naive substitution followed by
//    normalization on generated well-simple-typed instances.
Gate substitution_oracle() {
  auto consts = generator_scope();
  std::mt19937 rng(6061842);
  int agreed = 0;
  for (int i = 0; i < 2 * kSubstCases && agreed < kSubstCases; ++i) {
    NameSupply supply;
    SimpleType tau_x = oracle::gen_simple_type(rng, kSubstTypeDepth);
    SimpleType tau_m = oracle::gen_simple_type(rng, kSubstTypeDepth);
    Name x = var("x");
    auto scope = consts;
    scope.emplace_back(x, tau_x);
    CanTerm m = oracle::gen_eta_long(rng, scope, tau_m, kSubstBudget, supply);
    CanTerm n = oracle::gen_eta_long(rng, consts, tau_x, kSubstBudget, supply);

    auto got = subst_canonical(n, x, tau_x, m, 64);
    if (!got)
      return {false, "undefined on well-typed input [" + show_term(n) + "/x] " + show_term(m)};
    NameSupply osupply;
    osupply.avoid_all(all_names(m));
    osupply.avoid_all(all_names(n));
    auto normal = oracle::normalize(
        oracle::naive_subst(oracle::from_can(m), x, oracle::from_can(n), osupply), kSubstFuel,
        osupply);
    if (!normal) return {false, "reference normalization ran out of fuel"};
    auto expect = oracle::to_can(*normal);
    if (!expect) return {false, "reference normal form is not canonical"};
    if (!alpha_equal(*got, *expect))
      return {false, "disagreement: got " + show_term(*got) + ", reference " +
                         show_term(*expect)};
    ++agreed;
  }
  if (agreed < kSubstCases)
    return {false, "only " + std::to_string(agreed) + " of " + std::to_string(kSubstCases) +
                       " instances"};
  return {true, std::to_string(agreed) + " generated instances agree with the reference"};
}

// 4. Substituting independent variables commutes at every depth.
Gate commutation() {
  auto consts = generator_scope();
  std::mt19937 rng(91502133);
  int triples = 0;
  long comparisons = 0;
  for (int i = 0; i < 4 * kCommutationTriples && triples < kCommutationTriples; ++i) {
    NameSupply supply;
    SimpleType tau1 = oracle::gen_simple_type(rng, 2);
    SimpleType tau2 = oracle::gen_simple_type(rng, 2);
    SimpleType tau_m = oracle::gen_simple_type(rng, 2);
    Name x = var("x"), z = var("zv");
    auto scope_m = consts;
    scope_m.emplace_back(x, tau1);
    scope_m.emplace_back(z, tau2);
    auto scope_n2 = consts;
    scope_n2.emplace_back(x, tau1);
    CanTerm m = oracle::gen_eta_long(rng, scope_m, tau_m, 7, supply);
    CanTerm n1 = oracle::gen_eta_long(rng, consts, tau1, 5, supply);  // closed: no z
    CanTerm n2 = oracle::gen_eta_long(rng, scope_n2, tau2, 5, supply);

    bool compared = false;
    for (Depth k = 0; k <= kCommutationMaxDepth; ++k) {
      auto inner = subst_canonical(n2, z, tau2, m, k);
      if (!inner) continue;
      auto lhs = subst_canonical(n1, x, tau1, *inner, k);
      if (!lhs) continue;
      auto n2s = subst_canonical(n1, x, tau1, n2, k);
      auto ms = subst_canonical(n1, x, tau1, m, k);
      if (!n2s || !ms) return {false, "outer substitution undefined at depth " + std::to_string(k)};
      auto rhs = subst_canonical(*n2s, z, tau2, *ms, k);
      if (!rhs) return {false, "composite substitution undefined at depth " + std::to_string(k)};
      if (!eq_at_depth(*lhs, *rhs, k))
        return {false, "counterexample at depth " + std::to_string(k) + ": " + show_term(*lhs) +
                           " vs " + show_term(*rhs)};
      compared = true;
      ++comparisons;
    }
    if (compared) ++triples;
  }
  if (triples < kCommutationTriples)
    return {false, "only " + std::to_string(triples) + " triples"};
  return {true, std::to_string(triples) + " triples, " + std::to_string(comparisons) +
                    " depth comparisons, no counterexample"};
}

// 5. Expansion depths cohere: one more level of expansion truncates back to
//    the shallower one, and checking at a depth implies checking below it.
Gate depth_coherence() {
  long truncations = 0;
  int defs = 0;
  for (const char* file : kGoodFiles) {
    Signature sig;
    std::vector<Diagnostic> diags;
    if (!load(file, sig, diags)) return {false, std::string("cannot read ") + file};
    if (any_errors(diags)) return {false, std::string(file) + " fails to elaborate"};
    Expander ex(sig);
    for (const Declaration& d : sig.decls) {
      const auto* def = std::get_if<DefDecl>(&d.decl);
      if (!def) continue;
      ++defs;
      for (Depth k = 0; k <= kCoherenceMaxDepth; ++k) {
        CanTerm deeper = expand_def(ex, *def, k + 1);
        CanTerm shallow = expand_def(ex, *def, k);
        if (!eq_at_depth(truncate(deeper, k + 1, k), shallow, k))
          return {false, def->name.text + " in " + file + " breaks truncation at depth " +
                             std::to_string(k)};
        ++truncations;
      }
    }
    std::vector<char> pass;
    for (Depth k = 0; k <= kMonotoneMaxDepth; ++k)
      pass.push_back(check_signature(sig, k).empty() ? 1 : 0);
    for (Depth k = 0; k + 1 <= kMonotoneMaxDepth; ++k)
      if (pass[k + 1] && !pass[k])
        return {false, std::string(file) + " checks at depth " + std::to_string(k + 1) +
                           " but not at " + std::to_string(k)};
  }
  return {true, std::to_string(defs) + " definitions, " + std::to_string(truncations) +
                    " truncation identities, checking monotone in depth"};
}

// 6. The cycle-based productivity verdict matches exhaustive depth-bounded
//    trace enumeration, on the corpus and on random signatures.
Gate validity_oracle() {
  int compared = 0;
  std::vector<std::string> files(std::begin(kGoodFiles), std::end(kGoodFiles));
  files.push_back("bad/badnat.colf");
  files.push_back("bad/sigma6_z.colf");
  files.push_back("bad/noncontractive.colf");
  for (const auto& file : files) {
    Signature sig;
    std::vector<Diagnostic> diags;
    if (!load(file, sig, diags)) return {false, "cannot read " + file};
    if (any_errors(diags)) continue;
    ValidityReport rep = validity_report(sig);
    for (const DefVerdict& v : rep.defs) {
      if (!v.contractive) continue;  // the walker cannot bound such bodies
      bool walker_invalid = oracle::walk_says_invalid(sig, v.name.text, kWalkDepth);
      if (v.valid != !walker_invalid)
        return {false, v.name.text + " in " + file + ": graph says " +
                           (v.valid ? "valid" : "invalid") + ", traces say the opposite"};
      ++compared;
    }
  }
  std::mt19937 rng(424242);
  for (int i = 0; i < kRandomValiditySignatures; ++i) {
    Signature sig = oracle::gen_validity_signature(rng);
    ValidityReport rep = validity_report(sig);
    for (const DefVerdict& v : rep.defs) {
      if (!v.contractive) continue;
      bool walker_invalid = oracle::walk_says_invalid(sig, v.name.text, kWalkDepth);
      if (v.valid != !walker_invalid)
        return {false, v.name.text + " in random signature " + std::to_string(i) +
                           " disagrees with trace enumeration"};
      ++compared;
    }
  }
  return {true, std::to_string(compared) + " definitions across corpus and " +
                    std::to_string(kRandomValiditySignatures) +
                    " random signatures, full agreement"};
}

// 7. Pinned spot values.
Gate spot_values() {
  // erase(Pi x:a. a2 x) = * -> *
  CanType a = CanType::atom(make_atom(family("a"), Spine{SpineKind::Suspended, {}}));
  CanTerm xref = CanTerm::head(var("x"), Spine{SpineKind::Continuing, {}});
  CanType a2x = CanType::atom(
      make_atom(family("a2"), Spine{SpineKind::Suspended, {xref}}));
  std::string erased = erase(CanType::pi(var("x"), a, a2x)).show();
  if (erased != "* -> *") return {false, "erasure printed '" + erased + "'"};

  Signature sig;
  std::vector<Diagnostic> diags;
  if (!load("cobin.colf", sig, diags) || any_errors(diags))
    return {false, "cobin.colf fails to elaborate"};
  Expander ex(sig);
  const DefDecl* dw1 = sig.find_definition("w1");
  const DefDecl* dw2 = sig.find_definition("w2");
  if (!dw1 || !dw2) return {false, "w1 or w2 is missing"};
  std::string w2 = print_term(sig, expand_def(ex, *dw2, 3), false);
  if (w2 != "b1 (b0 (b1 _))") return {false, "w2 at depth 3 printed '" + w2 + "'"};

  CanTerm w1d1 = expand_def(ex, *dw1, 1);
  CanTerm w2d1 = expand_def(ex, *dw2, 1);
  CanTerm w1d2 = expand_def(ex, *dw1, 2);
  CanTerm w2d2 = expand_def(ex, *dw2, 2);
  if (!eq_at_depth(w1d1, w2d1, 1)) return {false, "w1 and w2 differ at depth 1"};
  if (eq_at_depth(w1d2, w2d2, 2)) return {false, "w1 and w2 agree at depth 2"};
  return {true, "erasure '* -> *', w2@3 'b1 (b0 (b1 _))', w1 = w2 at depth 1 only"};
}

// 8. The productive fixpoint encoding checks deeply; the unproductive one is
//    rejected by the cycle analysis.
Gate fixpoint_encodings() {
  Signature sig;
  std::vector<Diagnostic> diags;
  if (!load("sigma6.colf", sig, diags) || any_errors(diags))
    return {false, "sigma6.colf fails to elaborate"};
  for (const char* name : {"tmI", "yterm"}) {
    const DefDecl* d = sig.find_definition(name);
    if (!d) return {false, std::string(name) + " is missing"};
    if (d->type.is_pi() || d->type.target().head.text != "ctm")
      return {false, std::string(name) + " is not declared at ctm"};
  }
  std::vector<Diagnostic> cd = check_signature(sig, kSigmaCheckDepth);
  if (!cd.empty())
    return {false, "sigma6.colf at depth " + std::to_string(kSigmaCheckDepth) + ": " +
                       first_message(cd)};

  Signature zsig;
  std::vector<Diagnostic> zdiags;
  if (!load("bad/sigma6_z.colf", zsig, zdiags) || any_errors(zdiags))
    return {false, "sigma6_z.colf fails to elaborate"};
  ValidityReport rep = validity_report(zsig);
  const DefVerdict* tmz = nullptr;
  for (const DefVerdict& v : rep.defs)
    if (v.name.text == "tmZ") tmz = &v;
  if (!tmz) return {false, "tmZ is missing"};
  if (tmz->valid) return {false, "tmZ was accepted by the cycle analysis"};
  bool cycle_code = false;
  for (const auto& d : validity_diagnostics(rep))
    if (d.code == code::invalid_cycle) cycle_code = true;
  if (!cycle_code) return {false, "tmZ rejection carries the wrong code"};
  return {true, "tmI and yterm check at depth 6; tmZ rejected by the cycle analysis"};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* label;
    Gate (*run)();
  };
  const Entry entries[] = {
      {1, "corpus signatures check cleanly", corpus_acceptance},
      {2, "negative fixtures rejected precisely", negative_suite},
      {3, "hereditary substitution matches the reference", substitution_oracle},
      {4, "substitutions commute across depths", commutation},
      {5, "expansion and checking cohere across depths", depth_coherence},
      {6, "productivity verdicts match trace enumeration", validity_oracle},
      {7, "pinned spot values", spot_values},
      {8, "fixpoint encodings accepted and rejected as required", fixpoint_encodings},
  };
  int failures = 0;
  for (const Entry& e : entries) {
    Gate g = e.run();
    std::printf("[%s] %d. %s: %s\n", g.ok ? "PASS" : "FAIL", e.id, e.label, g.detail.c_str());
    std::fflush(stdout);
    if (!g.ok) ++failures;
  }
  if (failures) std::printf("%d of 8 gates failed\n", failures);
  return failures ? 1 : 0;
}
