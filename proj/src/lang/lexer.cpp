#include "lexer.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

namespace relcheck::lang::detail {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  bool continuation = false;

  auto push = [&](Tok kind, int l, int c, std::string text = {}) {
    Token t;
    t.kind = kind;
    t.line = l;
    t.col = c;
    t.text = std::move(text);
    out.push_back(std::move(t));
  };
  auto push_newline = [&](int l, int c) {
    if (!out.empty() && out.back().kind != Tok::Newline) push(Tok::Newline, l, c);
  };

  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      if (!continuation) push_newline(line, col);
      continuation = false;
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
    if (c == '!') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (c == '&') {
      continuation = true;
      ++i;
      ++col;
      continue;
    }
    int tok_line = line;
    int tok_col = col;
    if (is_ident_start(c)) {
      std::size_t start = i;
      while (i < src.size() && is_ident_char(src[i])) ++i;
      std::string text(src.substr(start, i - start));
      for (auto& ch : text) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      col += static_cast<int>(i - start);
      push(Tok::Ident, tok_line, tok_col, std::move(text));
      continue;
    }
    if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      std::size_t start = i;
      bool real = false;
      while (i < src.size() && is_digit(src[i])) ++i;
      if (i < src.size() && src[i] == '.') {
        real = true;
        ++i;
        while (i < src.size() && is_digit(src[i])) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E' || src[i] == 'd' || src[i] == 'D')) {
        std::size_t save = i;
        ++i;
        if (i < src.size() && (src[i] == '+' || src[i] == '-')) ++i;
        if (i < src.size() && is_digit(src[i])) {
          real = true;
          while (i < src.size() && is_digit(src[i])) ++i;
        } else {
          i = save;
        }
      }
      std::string text(src.substr(start, i - start));
      col += static_cast<int>(i - start);
      Token t;
      t.line = tok_line;
      t.col = tok_col;
      t.text = text;
      if (real) {
        for (auto& ch : text)
          if (ch == 'd' || ch == 'D') ch = 'e';
        t.kind = Tok::Real;
        t.rval = std::strtod(text.c_str(), nullptr);
      } else {
        t.kind = Tok::Int;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), t.ival);
        if (ec != std::errc{}) t.kind = Tok::Invalid;
      }
      out.push_back(std::move(t));
      continue;
    }
    Tok kind = Tok::Invalid;
    switch (c) {
      case '+': kind = Tok::Plus; break;
      case '-': kind = Tok::Minus; break;
      case '*': kind = Tok::Star; break;
      case '/': kind = Tok::Slash; break;
      case '=': kind = Tok::Assign; break;
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case ',': kind = Tok::Comma; break;
      case ':': kind = Tok::Colon; break;
      default: break;
    }
    push(kind, tok_line, tok_col, std::string(1, c));
    ++i;
    ++col;
  }
  push_newline(line, col);
  push(Tok::End, line, col);
  return out;
}

}  // namespace relcheck::lang::detail
