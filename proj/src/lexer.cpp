#include <cctype>

#include "colf/surface.hpp"

namespace colf {

namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '/' || c == '\'' ||
         c == '+' || c == '-';
}

}  // namespace

std::vector<Token> lex(const std::string& src, std::vector<Diagnostic>& diags) {
  std::vector<Token> out;
  std::uint32_t line = 1, col = 1;
  std::size_t i = 0;
  const std::size_t n = src.size();

  auto here = [&](std::uint32_t len) {
    return SourceSpan{line, col, line, col + len};
  };
  auto push = [&](TokKind k, std::string text) {
    auto len = static_cast<std::uint32_t>(text.size());
    out.push_back(Token{k, std::move(text), here(len)});
    col += len;
  };

  while (i < n) {
    char c = src[i];
    if (c == '\n') {
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      ++col;
      continue;
    }
    if (c == '%') {
      while (i < n && src[i] != '\n') {
        ++i;
        ++col;
      }
      continue;
    }
    if (c == '-' && i + 1 < n && src[i + 1] == '>') {
      push(TokKind::Arrow, "->");
      i += 2;
      continue;
    }
    if (c == '<' && i + 1 < n && src[i + 1] == '-') {
      push(TokKind::BackArrow, "<-");
      i += 2;
      continue;
    }
    if (ident_char(c)) {
      std::size_t j = i;
      while (j < n && ident_char(src[j])) {
        // `-` belongs to the identifier unless it starts an arrow.
        if (src[j] == '-' && j + 1 < n && src[j + 1] == '>') break;
        ++j;
      }
      std::string text = src.substr(i, j - i);
      TokKind k = TokKind::Ident;
      if (text == "type") k = TokKind::KwType;
      if (text == "cotype") k = TokKind::KwCotype;
      push(k, std::move(text));
      i = j;
      continue;
    }
    TokKind k;
    switch (c) {
      case ':': k = TokKind::Colon; break;
      case '.': k = TokKind::Dot; break;
      case '=': k = TokKind::Equal; break;
      case '{': k = TokKind::LBrace; break;
      case '}': k = TokKind::RBrace; break;
      case '[': k = TokKind::LBracket; break;
      case ']': k = TokKind::RBracket; break;
      case '(': k = TokKind::LParen; break;
      case ')': k = TokKind::RParen; break;
      default: {
        diags.push_back(Diagnostic::error(
            code::syntax, std::string("unexpected character '") + c + "'", here(1)));
        ++i;
        ++col;
        continue;
      }
    }
    push(k, std::string(1, c));
    ++i;
  }
  out.push_back(Token{TokKind::End, "", SourceSpan{line, col, line, col}});
  return out;
}

}  // namespace colf
