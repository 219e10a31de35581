// lb/parser/lexer.hpp - tokenizer for the .lbc/.lbm surface syntax
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lb/core/diagnostic.hpp"

namespace lb::parser
{

enum class Tok {
  Ident,
  Int,
  Label,       // @name:
  Annotation,  // @name (not followed by ':')
  LParen, RParen, LBrace, RBrace, Comma,
  Dot, DotDot, Bar, Maplet, Assign,
  Eq, Neq, Lt, Le, Gt, Ge, In, NotIn, Subset,
  Union, Inter, Diff, Override,
  And, Implies,
  TotalFn, PartialFn, Product,
  Plus, Minus, Star, Slash,
  Bang, Hash,
  EmptySet,
  Eof,
};

const char * describe(Tok t);

struct Token
{
  Tok kind = Tok::Eof;
  std::string text;  // identifier/label name or literal digits
  SourceSpan span;
};

/// Tokenizes `text`. `//` comments run to end of line. Unicode math symbols
/// are folded onto their ASCII counterparts. Lexical errors are appended to
/// `diags` and the offending character is skipped.
std::vector<Token> tokenize(std::string_view text, const std::string & file, Diagnostics & diags);

}  // namespace lb::parser
