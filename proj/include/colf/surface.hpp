#pragma once

// Concrete syntax: lexer and parser for `.colf` signatures, elaboration of
// implicit arguments, and the user-facing printer. Concrete syntax follows
// Twelf conventions: `{x : A} B` and `{x} B` dependent function types,
// `[x] M` abstractions, right-associative `->` (with `<-` flipped), `%` line
// comments, and declarations terminated by `.`.

#include <memory>
#include <string>
#include <vector>

#include "colf/diagnostics.hpp"
#include "colf/syntax.hpp"

namespace colf {

enum class TokKind : std::uint8_t {
  Ident,
  KwType,
  KwCotype,
  Colon,
  Dot,
  Equal,
  Arrow,      // ->
  BackArrow,  // <-
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  LParen,
  RParen,
  End,
};

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  SourceSpan span;
};

// Tokenizes the whole input; unknown characters are reported and skipped.
// Always ends with an End token. Identifiers are [A-Za-z0-9_/'+-]+ with the
// arrow carve-out: `-` immediately followed by `>` ends the identifier.
std::vector<Token> lex(const std::string& src, std::vector<Diagnostic>& diags);

// Surface expressions (pre-elaboration).
struct Expr;
using ExprP = std::shared_ptr<const Expr>;

struct Expr {
  enum class Tag {
    Ident,   // name
    App,     // a b
    Lam,     // [name] a
    Pi,      // {name : a} b, {name} b (null a), or a -> b (empty name)
    Type,    // keyword
    Cotype,  // keyword
  };
  Tag tag = Tag::Ident;
  std::string name;
  ExprP a;
  ExprP b;
  SourceSpan span;
};

struct SurfaceDecl {
  std::string name;
  ExprP type;   // type or kind expression; never null in well-parsed decls
  ExprP body;   // null unless `name : A = M.`
  SourceSpan span;
  SourceSpan name_span;
};

struct SurfaceSig {
  std::vector<SurfaceDecl> decls;
};

// Parses a token stream; on a syntax error, skips to the next `.` and
// continues with the following declaration.
SurfaceSig parse_signature(const std::vector<Token>& toks, std::vector<Diagnostic>& diags);

// Test convenience: lex and parse one expression.
ExprP parse_expr(const std::string& src, std::vector<Diagnostic>& diags);

// Scope checking, namespace assignment, implicit-argument inference for free
// capitalized identifiers, and eta-expansion into the canonical discipline.
// Produces finitary declarations with surface spines; each records how many
// leading Pis are implicit.
Signature elaborate(const SurfaceSig& ssig, std::vector<Diagnostic>& diags);

Signature parse_and_elaborate(const std::string& src, std::vector<Diagnostic>& diags);

// User-facing printers: implicit arguments of constant applications and
// implicit leading Pis are suppressed unless show_implicit; suppressed Pi
// binders reappear as free capitalized identifiers, so printed declarations
// re-elaborate to the same thing. Stubs print as `_`.
std::string print_term(const Signature& sig, const CanTerm& m, bool show_implicit);
std::string print_type(const Signature& sig, const CanType& a, bool show_implicit);
std::string print_kind(const Signature& sig, const Kind& k, bool show_implicit);
std::string print_declaration(const Signature& sig, const Declaration& d, bool show_implicit);
std::string print_signature(const Signature& sig, bool show_implicit);

}  // namespace colf
