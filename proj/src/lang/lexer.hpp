#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace relcheck::lang::detail {

enum class Tok {
  Ident,
  Int,
  Real,
  Plus,
  Minus,
  Star,
  Slash,
  Assign,
  LParen,
  RParen,
  Comma,
  Colon,
  Newline,
  End,
  Invalid,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifiers are lower-cased
  std::int64_t ival = 0;
  double rval = 0.0;
  int line = 0;
  int col = 0;
};

// Free-form, case-insensitive. `!` starts a comment; a trailing `&` joins
// the next physical line. Consecutive newlines collapse into one token.
std::vector<Token> lex(std::string_view source);

}  // namespace relcheck::lang::detail
