#include "colf/surface.hpp"

namespace colf {

namespace {

SourceSpan join(SourceSpan a, SourceSpan b) {
  if (!a.known()) return b;
  if (!b.known()) return a;
  return SourceSpan{a.line, a.col, b.end_line, b.end_col};
}

ExprP mk(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

ExprP mk_ident(std::string name, SourceSpan s) {
  return mk(Expr{Expr::Tag::Ident, std::move(name), nullptr, nullptr, s});
}
ExprP mk_app(ExprP f, ExprP x) {
  SourceSpan s = join(f->span, x->span);
  return mk(Expr{Expr::Tag::App, "", std::move(f), std::move(x), s});
}
ExprP mk_lam(std::string x, ExprP body, SourceSpan start) {
  SourceSpan s = join(start, body->span);
  return mk(Expr{Expr::Tag::Lam, std::move(x), std::move(body), nullptr, s});
}
ExprP mk_pi(std::string x, ExprP dom, ExprP cod, SourceSpan start) {
  SourceSpan s = join(start, cod->span);
  return mk(Expr{Expr::Tag::Pi, std::move(x), std::move(dom), std::move(cod), s});
}

struct Parser {
  const std::vector<Token>& toks;
  std::vector<Diagnostic>& diags;
  std::size_t pos = 0;

  // Set when the current declaration already produced a syntax diagnostic;
  // suppresses cascading errors until recovery.
  bool failed = false;

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos + ahead;
    return i < toks.size() ? toks[i] : toks.back();
  }
  const Token& advance() { return toks[pos < toks.size() - 1 ? pos++ : pos]; }
  bool at(TokKind k) const { return peek().kind == k; }

  void error(const std::string& msg, SourceSpan span) {
    if (!failed) diags.push_back(Diagnostic::error(code::syntax, msg, span));
    failed = true;
  }

  bool expect(TokKind k, const char* what) {
    if (at(k)) {
      advance();
      return true;
    }
    error(std::string("expected ") + what, peek().span);
    return false;
  }

  static bool starts_atom(TokKind k) {
    return k == TokKind::Ident || k == TokKind::LParen || k == TokKind::KwType ||
           k == TokKind::KwCotype;
  }
  static bool starts_binder(TokKind k) {
    return k == TokKind::LBrace || k == TokKind::LBracket;
  }

  ExprP missing_expr() { return mk_ident("", peek().span); }

  ExprP parse_atom() {
    const Token& t = peek();
    switch (t.kind) {
      case TokKind::Ident: {
        advance();
        return mk_ident(t.text, t.span);
      }
      case TokKind::KwType: {
        advance();
        return mk(Expr{Expr::Tag::Type, "", nullptr, nullptr, t.span});
      }
      case TokKind::KwCotype: {
        advance();
        return mk(Expr{Expr::Tag::Cotype, "", nullptr, nullptr, t.span});
      }
      case TokKind::LParen: {
        SourceSpan open = t.span;
        advance();
        ExprP inner = parse_expr();
        SourceSpan close = peek().span;
        expect(TokKind::RParen, "')'");
        Expr widened = *inner;
        widened.span = join(open, close);
        return mk(std::move(widened));
      }
      default:
        error("expected a term or type expression", t.span);
        return missing_expr();
    }
  }

  ExprP parse_app() {
    ExprP f = parse_atom();
    while (starts_atom(peek().kind) && !failed) {
      f = mk_app(f, parse_atom());
    }
    return f;
  }

  // An operand of an arrow chain; a binder here extends to the end of the
  // chain, so it is always the final operand.
  ExprP parse_arrow_operand(bool& was_binder) {
    if (starts_binder(peek().kind)) {
      was_binder = true;
      return parse_expr();
    }
    was_binder = false;
    return parse_app();
  }

  ExprP parse_arrow_chain() {
    bool last_was_binder = false;
    std::vector<ExprP> operands;
    operands.push_back(parse_arrow_operand(last_was_binder));
    bool any_fwd = false, any_bwd = false;
    while (!last_was_binder && (at(TokKind::Arrow) || at(TokKind::BackArrow)) && !failed) {
      if (at(TokKind::Arrow)) any_fwd = true;
      else any_bwd = true;
      SourceSpan op_span = peek().span;
      advance();
      if (any_fwd && any_bwd) {
        error("mixing -> and <- in one chain needs parentheses", op_span);
        break;
      }
      operands.push_back(parse_arrow_operand(last_was_binder));
    }
    if (operands.size() == 1) return operands[0];
    if (any_bwd) {
      // a <- b <- c associates left: c -> (b -> a).
      ExprP acc = operands[0];
      for (std::size_t i = 1; i < operands.size(); ++i) {
        acc = mk_pi("", operands[i], acc, operands[i]->span);
      }
      return acc;
    }
    ExprP acc = operands.back();
    for (std::size_t i = operands.size() - 1; i-- > 0;) {
      acc = mk_pi("", operands[i], acc, operands[i]->span);
    }
    return acc;
  }

  ExprP parse_expr() {
    const Token& t = peek();
    if (t.kind == TokKind::LBrace) {
      SourceSpan start = t.span;
      advance();
      std::string x = peek().text;
      if (!expect(TokKind::Ident, "a binder name")) return missing_expr();
      ExprP dom;
      if (at(TokKind::Colon)) {
        advance();
        dom = parse_expr();
      }
      if (!expect(TokKind::RBrace, "'}'")) return missing_expr();
      ExprP body = parse_expr();
      return mk_pi(std::move(x), std::move(dom), std::move(body), start);
    }
    if (t.kind == TokKind::LBracket) {
      SourceSpan start = t.span;
      advance();
      std::string x = peek().text;
      if (!expect(TokKind::Ident, "a binder name")) return missing_expr();
      if (!expect(TokKind::RBracket, "']'")) return missing_expr();
      ExprP body = parse_expr();
      return mk_lam(std::move(x), std::move(body), start);
    }
    return parse_arrow_chain();
  }

  void recover_to_dot() {
    while (!at(TokKind::End) && !at(TokKind::Dot)) advance();
    if (at(TokKind::Dot)) advance();
  }

  SurfaceSig parse_sig() {
    SurfaceSig sig;
    while (!at(TokKind::End)) {
      failed = false;
      const Token& name_tok = peek();
      if (name_tok.kind != TokKind::Ident) {
        error("expected a declaration name", name_tok.span);
        recover_to_dot();
        continue;
      }
      advance();
      SurfaceDecl d;
      d.name = name_tok.text;
      d.name_span = name_tok.span;
      if (!expect(TokKind::Colon, "':'")) {
        recover_to_dot();
        continue;
      }
      if (at(TokKind::Dot)) {
        error("empty type expression", peek().span);
        recover_to_dot();
        continue;
      }
      d.type = parse_expr();
      if (failed) {
        recover_to_dot();
        continue;
      }
      if (at(TokKind::Equal)) {
        advance();
        if (at(TokKind::Dot)) {
          error("empty definition body", peek().span);
          recover_to_dot();
          continue;
        }
        d.body = parse_expr();
        if (failed) {
          recover_to_dot();
          continue;
        }
      }
      SourceSpan end = peek().span;
      if (!expect(TokKind::Dot, "'.'")) {
        recover_to_dot();
        continue;
      }
      d.span = join(name_tok.span, end);
      sig.decls.push_back(std::move(d));
    }
    return sig;
  }
};

}  // namespace

SurfaceSig parse_signature(const std::vector<Token>& toks, std::vector<Diagnostic>& diags) {
  Parser p{toks, diags};
  return p.parse_sig();
}

ExprP parse_expr(const std::string& src, std::vector<Diagnostic>& diags) {
  std::vector<Token> toks = lex(src, diags);
  Parser p{toks, diags};
  ExprP e = p.parse_expr();
  if (!p.at(TokKind::End)) {
    p.error("unexpected trailing input", p.peek().span);
  }
  return e;
}

}  // namespace colf
