#pragma once

// Core term representation: canonical (beta-normal, spine-form) terms, types
// and kinds, plus signatures and contexts. All nodes are immutable after
// construction and safe to share across threads.

#include <cassert>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

namespace colf {

// Observation depth. Judgments are indexed by a finite depth; depth 0 means
// "nothing observable".
using Depth = std::uint32_t;

enum class NameKind : std::uint8_t {
  Family,     // type family (declared with a kind)
  Constant,   // term constant (declared with a type)
  Recursion,  // recursion constant (declared with a type and a body)
  Variable,   // bound variable
};

const char* name_kind_label(NameKind k);

// Names in different namespaces never compare equal even with the same text.
struct Name {
  std::string text;
  NameKind kind = NameKind::Variable;

  bool operator==(const Name& o) const { return kind == o.kind && text == o.text; }
  bool operator!=(const Name& o) const { return !(*this == o); }
};

struct NameHash {
  std::size_t operator()(const Name& n) const {
    return std::hash<std::string>()(n.text) * 4u + static_cast<std::size_t>(n.kind);
  }
};

using NameSet = std::unordered_set<Name, NameHash>;

inline Name var(std::string text) { return Name{std::move(text), NameKind::Variable}; }
inline Name constant(std::string text) { return Name{std::move(text), NameKind::Constant}; }
inline Name family(std::string text) { return Name{std::move(text), NameKind::Family}; }
inline Name recursion(std::string text) { return Name{std::move(text), NameKind::Recursion}; }

// Simple types: * | t1 -> t2. Used as the induction measure of hereditary
// substitution. Value type over a shared immutable rep; base() is the null rep.
class SimpleType {
 public:
  SimpleType() = default;  // base
  static SimpleType base() { return SimpleType(); }
  static SimpleType arrow(SimpleType dom, SimpleType cod);

  bool is_base() const { return rep_ == nullptr; }
  bool is_arrow() const { return rep_ != nullptr; }
  const SimpleType& dom() const;
  const SimpleType& cod() const;

  // Number of leading arrows.
  std::size_t arity() const;

  bool operator==(const SimpleType& o) const;
  bool operator!=(const SimpleType& o) const { return !(*this == o); }

  std::string show() const;

 private:
  struct Rep;
  std::shared_ptr<const Rep> rep_;
};

enum class SpineKind : std::uint8_t {
  Continuing,  // after a variable head; elements observed at the same depth
  Suspended,   // after a constant head; elements observed one depth lower
  Surface,     // unexpanded finitary spine; no continuing/suspended split yet
};

const char* spine_kind_label(SpineKind k);

class CanTerm;

struct Spine {
  SpineKind kind = SpineKind::Surface;
  std::vector<CanTerm> elems;
};

// Neutral term: head applied to a spine. Head class constrains the spine tag:
// variables take Continuing, constants Suspended, recursion constants only
// Surface; Surface is legal with any head (pre-expansion syntax).
struct NeutTerm {
  Name head;
  Spine spine;
};

NeutTerm make_neut(Name head, Spine spine);

// Canonical term: lambda prefix over a neutral, or the depth-0 stub. The stub
// is a distinguished leaf standing for an unobservable subterm; it has no
// binders and no neutral.
class CanTerm {
 public:
  CanTerm() = default;  // stub
  static CanTerm stub() { return CanTerm(); }
  static CanTerm make(std::vector<Name> binders, NeutTerm neutral);
  static CanTerm neut(NeutTerm n) { return make({}, std::move(n)); }
  // Convenience: x -> x . spine, asserting tag/head agreement.
  static CanTerm head(Name h, Spine spine) { return neut(make_neut(std::move(h), std::move(spine))); }

  bool is_stub() const { return rep_ == nullptr; }
  bool is_lambda() const;
  const std::vector<Name>& binders() const;
  const NeutTerm& neutral() const;

  // Identity up to shared rep; used only as a fast path, not as equality.
  bool same_rep(const CanTerm& o) const { return rep_ == o.rep_; }

 private:
  struct Rep;
  std::shared_ptr<const Rep> rep_;
};

// Atomic type: family applied to a spine of terms. The spine behaves like a
// suspended spine (elements sit one depth below the type).
struct AtomType {
  Name head;
  Spine spine;
};

AtomType make_atom(Name head, Spine spine);

// Canonical type: Pi telescope over an atomic type.
class CanType {
 public:
  CanType() = default;  // invalid; assign before use
  static CanType atom(AtomType a);
  static CanType pi(Name binder, CanType domain, CanType codomain);

  bool valid() const { return rep_ != nullptr; }
  bool is_pi() const;
  const std::vector<std::pair<Name, CanType>>& pis() const;
  const AtomType& target() const;
  // First binder/domain and the rest; only when is_pi().
  const Name& binder() const;
  const CanType& domain() const;
  CanType codomain() const;

 private:
  struct Rep;
  std::shared_ptr<const Rep> rep_;
};

enum class KindTerminal : std::uint8_t { Type, Cotype };

const char* kind_terminal_label(KindTerminal t);

// Kind: Pi telescope ending in type or cotype.
class Kind {
 public:
  Kind() = default;  // invalid; assign before use
  static Kind terminal(KindTerminal t);
  static Kind pi(Name binder, CanType domain, Kind codomain);

  bool valid() const { return rep_ != nullptr; }
  bool is_pi() const;
  const std::vector<std::pair<Name, CanType>>& pis() const;
  KindTerminal target() const;
  const Name& binder() const;
  const CanType& domain() const;
  Kind codomain() const;

 private:
  struct Rep;
  std::shared_ptr<const Rep> rep_;
};

// Half-open source range, 1-based; {0,0,0,0} means "no position".
struct SourceSpan {
  std::uint32_t line = 0;
  std::uint32_t col = 0;
  std::uint32_t end_line = 0;
  std::uint32_t end_col = 0;

  bool known() const { return line != 0; }
};

struct KindDecl {
  Name name;  // Family
  Kind kind;
  std::uint32_t implicits = 0;  // leading implicit Pis after elaboration
};

struct ConstDecl {
  Name name;  // Constant
  CanType type;
  std::uint32_t implicits = 0;
};

struct DefDecl {
  Name name;  // Recursion
  CanType type;
  CanTerm body;  // finitary, Surface spines, may mention recursion constants
  std::uint32_t implicits = 0;
};

struct Declaration {
  std::variant<KindDecl, ConstDecl, DefDecl> decl;
  SourceSpan span;

  const Name& name() const;
  std::uint32_t implicits() const;
};

// Ordered list of declarations; names are unique across all three declared
// namespaces (redeclaring any declared name is rejected at elaboration).
struct Signature {
  std::vector<Declaration> decls;

  // nullptr when absent.
  const Declaration* find(const std::string& text) const;
  const KindDecl* find_family(const std::string& text) const;
  const ConstDecl* find_constant(const std::string& text) const;
  const DefDecl* find_definition(const std::string& text) const;
  bool declares(const std::string& text) const { return find(text) != nullptr; }
  void push(Declaration d);

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

// Typing context: ordered variable bindings, innermost last.
struct Context {
  std::vector<std::pair<Name, CanType>> entries;

  const CanType* lookup(const Name& x) const;
  Context extended(Name x, CanType a) const;
};

// Truncation to a lower observation depth. Representationally free except at
// depth 0, where the result is the stub (nothing is observable there).
CanTerm truncate(const CanTerm& m, Depth from, Depth to);

// Free variables (Variable names only; binders respected).
NameSet free_vars(const CanTerm& m);
NameSet free_vars_type(const CanType& a);

// All heads of any kind occurring in a term (bound or not); used by callers
// that need to avoid name collisions wholesale.
NameSet all_names(const CanTerm& m);
NameSet all_names_type(const CanType& a);
NameSet all_names_kind(const Kind& k);

// Deterministic supply of fresh variable names: base + counter, skipping an
// avoid set and anything previously produced.
class NameSupply {
 public:
  NameSupply() = default;
  explicit NameSupply(NameSet avoid) : avoid_(std::move(avoid)) {}
  void avoid(const Name& n) { avoid_.insert(n); }
  void avoid_all(const NameSet& ns);
  Name fresh(const std::string& base);

 private:
  NameSet avoid_;
  std::uint64_t counter_ = 0;
};

// Canonical renaming: every binder replaced by a fresh supply name, outside-in,
// making all bound variables distinct from each other and the avoid set.
CanTerm alpha_rename(const CanTerm& m, NameSupply& supply);

// Replace free occurrences of variable `from` (as a head) by variable `to`.
// `to` must not be captured; callers pass a fresh name.
CanTerm rename_free_var(const CanTerm& m, const Name& from, const Name& to);
CanType rename_free_var_type(const CanType& a, const Name& from, const Name& to);
Kind rename_free_var_kind(const Kind& k, const Name& from, const Name& to);

// Full structural alpha-equivalence (no depth bound; both terms finite).
bool alpha_equal(const CanTerm& a, const CanTerm& b);
bool alpha_equal_type(const CanType& a, const CanType& b);

// Compact printers for debugging and test failure messages. The user-facing
// printer (implicit suppression, layout) lives in surface.hpp.
std::string show_term(const CanTerm& m);
std::string show_neut(const NeutTerm& r);
std::string show_type(const CanType& a);
std::string show_kind(const Kind& k);

}  // namespace colf
