// lb/parser/lexer.cpp
#include "lb/parser/lexer.hpp"

#include <array>
#include <cctype>
#include <optional>
#include <utility>

namespace lb::parser
{

const char * describe(Tok t)
{
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::Label: return "label";
    case Tok::Annotation: return "annotation";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::DotDot: return "'..'";
    case Tok::Bar: return "'|'";
    case Tok::Maplet: return "'|->'";
    case Tok::Assign: return "':='";
    case Tok::Eq: return "'='";
    case Tok::Neq: return "'/='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::In: return "'in'";
    case Tok::NotIn: return "'/:'";
    case Tok::Subset: return "'<:'";
    case Tok::Union: return "'\\/'";
    case Tok::Inter: return "'/\\'";
    case Tok::Diff: return "'\\'";
    case Tok::Override: return "'<+'";
    case Tok::And: return "'&'";
    case Tok::Implies: return "'=>'";
    case Tok::TotalFn: return "'-->'";
    case Tok::PartialFn: return "'+->'";
    case Tok::Product: return "'**'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Bang: return "'!'";
    case Tok::Hash: return "'#'";
    case Tok::EmptySet: return "'{}'";
    case Tok::Eof: return "end of input";
  }
  return "?";
}

namespace
{

struct Spelling
{
  std::string_view text;
  Tok kind;
};

// Longest spellings first so that prefix matches lose.
constexpr std::array kAscii{
  Spelling{"|->", Tok::Maplet}, Spelling{"-->", Tok::TotalFn}, Spelling{"+->", Tok::PartialFn},
  Spelling{":=", Tok::Assign},  Spelling{"..", Tok::DotDot},   Spelling{"/=", Tok::Neq},
  Spelling{"/:", Tok::NotIn},   Spelling{"/\\", Tok::Inter},   Spelling{"\\/", Tok::Union},
  Spelling{"<=", Tok::Le},      Spelling{"<:", Tok::Subset},   Spelling{"<+", Tok::Override},
  Spelling{">=", Tok::Ge},      Spelling{"=>", Tok::Implies},  Spelling{"**", Tok::Product},
  Spelling{"(", Tok::LParen},   Spelling{")", Tok::RParen},    Spelling{"{", Tok::LBrace},
  Spelling{"}", Tok::RBrace},   Spelling{",", Tok::Comma},     Spelling{".", Tok::Dot},
  Spelling{"|", Tok::Bar},      Spelling{"=", Tok::Eq},        Spelling{"<", Tok::Lt},
  Spelling{">", Tok::Gt},       Spelling{":", Tok::In},        Spelling{"\\", Tok::Diff},
  Spelling{"&", Tok::And},      Spelling{"+", Tok::Plus},      Spelling{"-", Tok::Minus},
  Spelling{"*", Tok::Star},     Spelling{"/", Tok::Slash},     Spelling{"!", Tok::Bang},
  Spelling{"#", Tok::Hash},
};

// Unicode aliases. Word-like aliases (¬, ∨, ℙ, ℕ) become identifiers.
struct UnicodeAlias
{
  std::string_view utf8;
  Tok kind;
  std::string_view word;  // non-empty: emit an Ident with this text instead
};

constexpr std::array kUnicode{
  UnicodeAlias{"∈", Tok::In, ""},        UnicodeAlias{"∉", Tok::NotIn, ""},
  UnicodeAlias{"⊆", Tok::Subset, ""},    UnicodeAlias{"∪", Tok::Union, ""},
  UnicodeAlias{"∩", Tok::Inter, ""},     UnicodeAlias{"∖", Tok::Diff, ""},
  UnicodeAlias{"∧", Tok::And, ""},       UnicodeAlias{"⇒", Tok::Implies, ""},
  UnicodeAlias{"↦", Tok::Maplet, ""},    UnicodeAlias{"→", Tok::TotalFn, ""},
  UnicodeAlias{"⇸", Tok::PartialFn, ""}, UnicodeAlias{"×", Tok::Product, ""},
  UnicodeAlias{"∀", Tok::Bang, ""},      UnicodeAlias{"∃", Tok::Hash, ""},
  UnicodeAlias{"·", Tok::Dot, ""},       UnicodeAlias{"≠", Tok::Neq, ""},
  UnicodeAlias{"≤", Tok::Le, ""},        UnicodeAlias{"≥", Tok::Ge, ""},
  UnicodeAlias{"÷", Tok::Slash, ""},     UnicodeAlias{"∅", Tok::EmptySet, ""},
  UnicodeAlias{"¬", Tok::Ident, "not"},  UnicodeAlias{"∨", Tok::Ident, "or"},
  UnicodeAlias{"ℙ", Tok::Ident, "POW"},  UnicodeAlias{"ℕ", Tok::Ident, "NAT"},
  UnicodeAlias{"≙", Tok::Eof, ""},       UnicodeAlias{"≐", Tok::Eof, ""},
};

class Lexer
{
public:
  Lexer(std::string_view text, const std::string & file, Diagnostics & diags)
  : text_(text), file_(file), diags_(diags)
  {
  }

  std::vector<Token> run()
  {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      if (pos_ >= text_.size()) {
        out.push_back(Token{Tok::Eof, "", span_here(1)});
        return out;
      }
      if (auto t = next()) {
        out.push_back(std::move(*t));
      }
    }
  }

private:
  SourceSpan span_here(int length) const { return SourceSpan{file_, line_, col_, length}; }

  char peek(size_t ahead = 0) const
  {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  // Advances over `n` bytes, counting columns in code points.
  void advance(size_t n)
  {
    for (size_t i = 0; i < n && pos_ < text_.size(); ++i, ++pos_) {
      const auto c = static_cast<unsigned char>(text_[pos_]);
      if (c == '\n') {
        ++line_;
        col_ = 1;
      } else if ((c & 0xC0) != 0x80) {
        ++col_;
      }
    }
  }

  void skip_trivia()
  {
    while (pos_ < text_.size()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance(1);
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < text_.size() && peek() != '\n') {
          advance(1);
        }
      } else {
        return;
      }
    }
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
  static bool ident_char(char c)
  {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  std::optional<Token> next()
  {
    const SourceSpan start = span_here(1);
    const char c = peek();

    if (ident_start(c)) {
      size_t n = 0;
      while (ident_char(peek(n))) {
        ++n;
      }
      Token t{Tok::Ident, std::string(text_.substr(pos_, n)), start};
      t.span.length = static_cast<int>(n);
      advance(n);
      if (t.text == "in") {
        t.kind = Tok::In;
      }
      return t;
    }

    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t n = 0;
      while (std::isdigit(static_cast<unsigned char>(peek(n)))) {
        ++n;
      }
      Token t{Tok::Int, std::string(text_.substr(pos_, n)), start};
      t.span.length = static_cast<int>(n);
      advance(n);
      return t;
    }

    if (c == '@') {
      size_t n = 1;
      while (ident_char(peek(n))) {
        ++n;
      }
      if (n == 1) {
        diags_.push_back(make_error("E_SYNTAX", "expected a name after '@'", start));
        advance(1);
        return std::nullopt;
      }
      Token t{Tok::Annotation, std::string(text_.substr(pos_ + 1, n - 1)), start};
      t.span.length = static_cast<int>(n);
      advance(n);
      // `@name:` is a label, unless the colon begins `:=`
      size_t k = 0;
      while (peek(k) == ' ' || peek(k) == '\t') {
        ++k;
      }
      if (peek(k) == ':' && peek(k + 1) != '=') {
        advance(k + 1);
        t.kind = Tok::Label;
      }
      return t;
    }

    for (const auto & s : kAscii) {
      if (text_.substr(pos_, s.text.size()) == s.text) {
        Token t{s.kind, std::string(s.text), start};
        t.span.length = static_cast<int>(s.text.size());
        advance(s.text.size());
        return t;
      }
    }

    for (const auto & u : kUnicode) {
      if (text_.substr(pos_, u.utf8.size()) == u.utf8) {
        advance(u.utf8.size());
        if (u.kind == Tok::Eof) {
          return std::nullopt;  // decorative symbol, ignored
        }
        if (!u.word.empty()) {
          return Token{Tok::Ident, std::string(u.word), start};
        }
        return Token{u.kind, std::string(u.utf8), start};
      }
    }

    // Unknown character: report it once and skip the whole UTF-8 sequence.
    size_t n = 1;
    while ((static_cast<unsigned char>(peek(n)) & 0xC0) == 0x80) {
      ++n;
    }
    diags_.push_back(make_error(
      "E_SYNTAX", "unexpected character '" + std::string(text_.substr(pos_, n)) + "'", start));
    advance(n);
    return std::nullopt;
  }

  std::string_view text_;
  std::string file_;
  Diagnostics & diags_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text, const std::string & file, Diagnostics & diags)
{
  return Lexer(text, file, diags).run();
}

}  // namespace lb::parser
