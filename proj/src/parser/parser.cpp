// lb/parser/parser.cpp
#include "lb/parser/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>

#include "lb/parser/lexer.hpp"

namespace lb::parser
{

namespace
{

constexpr std::array kKeywords{
  std::string_view{"CONTEXT"}, std::string_view{"EXTENDS"},   std::string_view{"SETS"},
  std::string_view{"CONSTANTS"}, std::string_view{"AXIOMS"},  std::string_view{"END"},
  std::string_view{"MACHINE"},  std::string_view{"SEES"},     std::string_view{"VARIABLES"},
  std::string_view{"INVARIANTS"}, std::string_view{"EVENTS"}, std::string_view{"initialisation"},
  std::string_view{"event"},    std::string_view{"any"},      std::string_view{"where"},
  std::string_view{"then"},     std::string_view{"begin"},    std::string_view{"end"},
};

constexpr std::array kExprWords{
  std::string_view{"not"},  std::string_view{"or"},   std::string_view{"mod"},
  std::string_view{"card"}, std::string_view{"dom"},  std::string_view{"POW"},
  std::string_view{"TRUE"}, std::string_view{"FALSE"}, std::string_view{"partition"},
};

bool is_keyword(std::string_view w)
{
  return std::find(kKeywords.begin(), kKeywords.end(), w) != kKeywords.end();
}

// An all-caps word in declaration position that is not a keyword is almost
// certainly a misspelt or unsupported section header (THEOREMS, VARIANT, ...).
bool looks_like_section(std::string_view w)
{
  return w.size() >= 4 && std::all_of(w.begin(), w.end(), [](char c) {
           return std::isupper(static_cast<unsigned char>(c));
         });
}

struct ParseFailure
{
};

class Parser
{
public:
  Parser(std::vector<Token> tokens, std::string file, Diagnostics & diags)
  : toks_(std::move(tokens)), file_(std::move(file)), diags_(diags)
  {
  }

  // ----- token helpers -----------------------------------------------------

  const Token & peek(size_t ahead = 0) const
  {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_word(std::string_view w) const { return at(Tok::Ident) && peek().text == w; }
  bool at_keyword() const { return at(Tok::Ident) && is_keyword(peek().text); }

  Token take()
  {
    Token t = peek();
    if (pos_ < toks_.size() - 1) {
      ++pos_;
    }
    return t;
  }

  bool accept(Tok k)
  {
    if (at(k)) {
      take();
      return true;
    }
    return false;
  }

  bool accept_word(std::string_view w)
  {
    if (at_word(w)) {
      take();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string & code, const std::string & msg, const SourceSpan & at)
  {
    diags_.push_back(make_error(code, msg, at));
    throw ParseFailure{};
  }

  [[noreturn]] void unexpected(const std::string & what)
  {
    const Token & t = peek();
    std::string got = t.kind == Tok::Ident || t.kind == Tok::Int ? "'" + t.text + "'"
                      : t.kind == Tok::Label                     ? "label '@" + t.text + ":'"
                      : t.kind == Tok::Annotation                ? "annotation '@" + t.text + "'"
                                                                 : describe(t.kind);
    fail("E_SYNTAX", "expected " + what + ", found " + got, t.span);
  }

  Token expect(Tok k, const std::string & what)
  {
    if (!at(k)) {
      unexpected(what);
    }
    return take();
  }

  void expect_word(std::string_view w)
  {
    if (!accept_word(w)) {
      unexpected("'" + std::string(w) + "'");
    }
  }

  Token expect_ident(const std::string & what)
  {
    if (!at(Tok::Ident) || is_reserved(peek().text)) {
      unexpected(what);
    }
    return take();
  }

  // ----- expressions -------------------------------------------------------
  //
  // Levels, weakest first: quantifier, =>, or, &, not, comparison,
  // --> / +->, .., set operators, + -, * / mod **, unary minus, |->,
  // application.

  ExprPtr parse_pred() { return parse_quant(); }

  ExprPtr parse_quant()
  {
    if (!at(Tok::Bang) && !at(Tok::Hash)) {
      return parse_implies();
    }
    const Token head = take();
    const QuantKind kind = head.kind == Tok::Bang ? QuantKind::ForAll : QuantKind::Exists;
    std::vector<Token> names;
    do {
      names.push_back(expect_ident("a bound variable"));
    } while (accept(Tok::Comma));
    expect(Tok::Dot, "'.' after the bound variables");
    ExprPtr body = parse_quant();

    // Split the leading `x in S` conjuncts off as binder domains.
    ExprPtr guard_part = body;
    ExprPtr rest_consequent;
    if (kind == QuantKind::ForAll) {
      const auto * imp = body->as<Binary>();
      if (!imp || imp->op != BinOp::Implies) {
        fail("E_SYNTAX", "universal quantifier must have the form '!x . x in S => P'", head.span);
      }
      guard_part = imp->lhs;
      rest_consequent = imp->rhs;
    }
    auto parts = spine_conjuncts(guard_part);
    Quantifier q{kind, {}, nullptr};
    for (size_t i = 0; i < names.size(); ++i) {
      const Binary * in = i < parts.size() ? parts[i]->as<Binary>() : nullptr;
      const Var * v = in && in->op == BinOp::In ? in->lhs->as<Var>() : nullptr;
      if (!v || v->name != names[i].text) {
        fail("E_SYNTAX",
             "bound variable '" + names[i].text + "' needs a domain conjunct '" + names[i].text +
               " in S' in binder order",
             names[i].span);
      }
      q.binders.push_back(QuantBinder{names[i].text, in->rhs});
    }
    ExprPtr rest = fold_and(parts, names.size());
    if (kind == QuantKind::ForAll) {
      q.body = rest ? make_expr(Binary{BinOp::Implies, rest, rest_consequent}, rest->span)
                    : rest_consequent;
    } else {
      q.body = rest ? rest : make_expr(BoolLit{true}, head.span);
    }
    return make_expr(std::move(q), head.span);
  }

  static std::vector<ExprPtr> spine_conjuncts(const ExprPtr & e)
  {
    std::vector<ExprPtr> out;
    ExprPtr cur = e;
    while (true) {
      const auto * b = cur->as<Binary>();
      if (!b || b->op != BinOp::And) {
        break;
      }
      out.push_back(b->rhs);
      cur = b->lhs;
    }
    out.push_back(cur);
    std::reverse(out.begin(), out.end());
    return out;
  }

  static ExprPtr fold_and(const std::vector<ExprPtr> & parts, size_t from)
  {
    ExprPtr acc;
    for (size_t i = from; i < parts.size(); ++i) {
      acc = acc ? make_expr(Binary{BinOp::And, acc, parts[i]}, acc->span) : parts[i];
    }
    return acc;
  }

  ExprPtr parse_implies()
  {
    ExprPtr lhs = parse_or();
    if (at(Tok::Implies)) {
      take();
      ExprPtr rhs = parse_quant();  // right associative
      return make_expr(Binary{BinOp::Implies, lhs, rhs}, lhs->span);
    }
    return lhs;
  }

  ExprPtr parse_or()
  {
    ExprPtr lhs = parse_and();
    while (at_word("or")) {
      take();
      ExprPtr rhs = parse_and();
      lhs = make_expr(Binary{BinOp::Or, lhs, rhs}, lhs->span);
    }
    return lhs;
  }

  ExprPtr parse_and()
  {
    ExprPtr lhs = parse_not();
    while (at(Tok::And)) {
      take();
      ExprPtr rhs = parse_not();
      lhs = make_expr(Binary{BinOp::And, lhs, rhs}, lhs->span);
    }
    return lhs;
  }

  ExprPtr parse_not()
  {
    if (at_word("not")) {
      const Token t = take();
      return make_expr(Unary{UnOp::Not, parse_not()}, t.span);
    }
    return parse_compare();
  }

  static std::optional<BinOp> compare_op(Tok k)
  {
    switch (k) {
      case Tok::Eq: return BinOp::Eq;
      case Tok::Neq: return BinOp::Neq;
      case Tok::Lt: return BinOp::Lt;
      case Tok::Le: return BinOp::Le;
      case Tok::Gt: return BinOp::Gt;
      case Tok::Ge: return BinOp::Ge;
      case Tok::In: return BinOp::In;
      case Tok::NotIn: return BinOp::NotIn;
      case Tok::Subset: return BinOp::Subset;
      default: return std::nullopt;
    }
  }

  ExprPtr parse_compare()
  {
    ExprPtr lhs = parse_typeop();
    if (auto op = compare_op(peek().kind)) {
      take();
      ExprPtr rhs = parse_typeop();
      lhs = make_expr(Binary{*op, lhs, rhs}, lhs->span);
      if (compare_op(peek().kind)) {
        unexpected("an operator other than a comparison (comparisons do not chain)");
      }
    }
    return lhs;
  }

  ExprPtr parse_typeop()
  {
    ExprPtr lhs = parse_interval();
    if (at(Tok::TotalFn) || at(Tok::PartialFn)) {
      const BinOp op = take().kind == Tok::TotalFn ? BinOp::TotalFn : BinOp::PartialFn;
      ExprPtr rhs = parse_typeop();
      return make_expr(Binary{op, lhs, rhs}, lhs->span);
    }
    return lhs;
  }

  ExprPtr parse_interval()
  {
    ExprPtr lo = parse_setop();
    if (accept(Tok::DotDot)) {
      ExprPtr hi = parse_setop();
      return make_expr(Interval{lo, hi}, lo->span);
    }
    return lo;
  }

  ExprPtr parse_setop()
  {
    ExprPtr lhs = parse_additive();
    while (true) {
      if (accept(Tok::Override)) {
        ExprPtr rhs = parse_additive();
        lhs = make_expr(FuncOverride{lhs, rhs}, lhs->span);
        continue;
      }
      std::optional<BinOp> op;
      if (at(Tok::Union)) {
        op = BinOp::Union;
      } else if (at(Tok::Inter)) {
        op = BinOp::Inter;
      } else if (at(Tok::Diff)) {
        op = BinOp::Diff;
      }
      if (!op) {
        return lhs;
      }
      take();
      ExprPtr rhs = parse_additive();
      lhs = make_expr(Binary{*op, lhs, rhs}, lhs->span);
    }
  }

  ExprPtr parse_additive()
  {
    ExprPtr lhs = parse_multiplicative();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      const BinOp op = take().kind == Tok::Plus ? BinOp::Add : BinOp::Sub;
      ExprPtr rhs = parse_multiplicative();
      lhs = make_expr(Binary{op, lhs, rhs}, lhs->span);
    }
    return lhs;
  }

  ExprPtr parse_multiplicative()
  {
    ExprPtr lhs = parse_unary();
    while (true) {
      std::optional<BinOp> op;
      if (at(Tok::Star)) {
        op = BinOp::Mul;
      } else if (at(Tok::Slash)) {
        op = BinOp::Div;
      } else if (at(Tok::Product)) {
        op = BinOp::Product;
      } else if (at_word("mod")) {
        op = BinOp::Mod;
      }
      if (!op) {
        return lhs;
      }
      take();
      ExprPtr rhs = parse_unary();
      lhs = make_expr(Binary{*op, lhs, rhs}, lhs->span);
    }
  }

  ExprPtr parse_unary()
  {
    if (at(Tok::Minus)) {
      const Token t = take();
      ExprPtr operand = parse_unary();
      if (const auto * lit = operand->as<IntLit>()) {
        return make_expr(IntLit{-lit->value}, t.span);
      }
      return make_expr(Unary{UnOp::Neg, operand}, t.span);
    }
    return parse_maplet();
  }

  ExprPtr parse_maplet()
  {
    ExprPtr lhs = parse_postfix();
    while (accept(Tok::Maplet)) {
      ExprPtr rhs = parse_postfix();
      lhs = make_expr(Maplet{lhs, rhs}, lhs->span);
    }
    return lhs;
  }

  ExprPtr parse_postfix()
  {
    ExprPtr e = parse_primary();
    while (at(Tok::LParen)) {
      take();
      ExprPtr arg = parse_pred();
      expect(Tok::RParen, "')'");
      e = make_expr(Apply{e, arg}, e->span);
    }
    return e;
  }

  ExprPtr parse_primary()
  {
    const Token t = peek();
    switch (t.kind) {
      case Tok::Int: {
        take();
        try {
          return make_expr(IntLit{std::stoll(t.text)}, t.span);
        } catch (const std::out_of_range &) {
          fail("E_SYNTAX", "integer literal out of range", t.span);
        }
      }
      case Tok::LParen: {
        take();
        ExprPtr e = parse_pred();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::EmptySet:
        take();
        return make_expr(SetExt{}, t.span);
      case Tok::LBrace:
        return parse_braces();
      case Tok::Ident:
        return parse_word();
      default:
        unexpected("an expression");
    }
  }

  ExprPtr parse_braces()
  {
    const Token open = take();
    if (accept(Tok::RBrace)) {
      return make_expr(SetExt{}, open.span);
    }
    if (at(Tok::Ident) && peek(1).kind == Tok::Dot && !is_reserved(peek().text)) {
      const Token binder = take();
      take();  // '.'
      ExprPtr pred = parse_pred();
      expect(Tok::Bar, "'|' in set comprehension");
      ExprPtr body = parse_pred();
      expect(Tok::RBrace, "'}'");
      auto parts = spine_conjuncts(pred);
      const auto * in = parts[0]->as<Binary>();
      const auto * v = in && in->op == BinOp::In ? in->lhs->as<Var>() : nullptr;
      if (!v || v->name != binder.text) {
        fail("E_SYNTAX",
             "set comprehension must start with '" + binder.text + " in S'", binder.span);
      }
      return make_expr(
        SetComprehension{binder.text, in->rhs, fold_and(parts, 1), body}, open.span);
    }
    std::vector<ExprPtr> elems;
    do {
      elems.push_back(parse_pred());
    } while (accept(Tok::Comma));
    expect(Tok::RBrace, "'}' or ','");
    return make_expr(SetExt{std::move(elems)}, open.span);
  }

  ExprPtr parse_word()
  {
    const Token t = peek();
    const std::string & w = t.text;
    if (is_keyword(w)) {
      unexpected("an expression");
    }
    take();
    if (w == "TRUE" || w == "FALSE") {
      return make_expr(BoolLit{w == "TRUE"}, t.span);
    }
    if (w == "card" || w == "dom" || w == "POW") {
      expect(Tok::LParen, "'(' after " + w);
      ExprPtr arg = parse_pred();
      expect(Tok::RParen, "')'");
      const UnOp op = w == "card" ? UnOp::Card : w == "dom" ? UnOp::Dom : UnOp::Pow;
      return make_expr(Unary{op, arg}, t.span);
    }
    if (w == "partition") {
      expect(Tok::LParen, "'(' after partition");
      ExprPtr set = parse_pred();
      std::vector<ExprPtr> blocks;
      while (accept(Tok::Comma)) {
        blocks.push_back(parse_pred());
      }
      expect(Tok::RParen, "')'");
      return make_expr(Partition{set, std::move(blocks)}, t.span);
    }
    if (is_reserved(w)) {
      fail("E_SYNTAX", "unexpected '" + w + "'", t.span);
    }
    if (auto kind = channel_kind_from_name(w); kind && at(Tok::LParen)) {
      take();
      ExprPtr arg = parse_pred();
      expect(Tok::RParen, "')'");
      return make_channel_call(*kind, arg, t);
    }
    return make_expr(Var{w}, t.span);
  }

  // kind(channels |-> (src |-> dst) |-> msg)
  ExprPtr make_channel_call(ChannelKind kind, const ExprPtr & arg, const Token & at_tok)
  {
    auto parts = flatten_maplets(arg);
    const auto * chan = parts[0]->as<Var>();
    const auto * ends = parts.size() >= 3 ? parts[1]->as<Maplet>() : nullptr;
    if (!chan || chan->name != "channels" || !ends) {
      fail("E_SYNTAX",
           std::string("malformed channel call; expected ") + to_string(kind) +
             "(channels |-> (src |-> dst) |-> msg)",
           at_tok.span);
    }
    ExprPtr msg = parts[2];
    for (size_t i = 3; i < parts.size(); ++i) {
      msg = make_expr(Maplet{msg, parts[i]}, msg->span);
    }
    return make_expr(ChannelCall{kind, ends->left, ends->right, msg}, at_tok.span);
  }

  /// Fails unless the next token can follow a complete expression.
  void expect_expr_end()
  {
    if (at(Tok::Label) || at(Tok::Annotation) || at(Tok::Eof) || at_keyword()) {
      return;
    }
    unexpected("end of expression");
  }

  // ----- declarations ------------------------------------------------------

  std::vector<Token> ident_list()
  {
    std::vector<Token> out;
    while (at(Tok::Ident) && !is_keyword(peek().text)) {
      const Token t = take();
      if (looks_like_section(t.text) && !is_reserved(t.text)) {
        fail("E_UNKNOWN_KEYWORD", "unknown keyword '" + t.text + "'", t.span);
      }
      if (is_reserved(t.text)) {
        fail("E_SYNTAX", "'" + t.text + "' is reserved and cannot be declared", t.span);
      }
      out.push_back(t);
    }
    return out;
  }

  [[noreturn]] void bad_section()
  {
    if (at(Tok::Ident) && looks_like_section(peek().text)) {
      fail("E_UNKNOWN_KEYWORD", "unknown keyword '" + peek().text + "'", peek().span);
    }
    unexpected("a section keyword");
  }

  ContextModel context()
  {
    ContextModel ctx;
    ctx.file = file_;
    expect_word("CONTEXT");
    ctx.name = expect_ident("context name").text;
    std::vector<Token> set_toks;
    std::vector<Token> const_toks;
    while (!accept_word("END")) {
      if (accept_word("EXTENDS")) {
        for (const auto & t : ident_list()) {
          ctx.extends.push_back(t.text);
        }
      } else if (accept_word("SETS")) {
        auto ts = ident_list();
        set_toks.insert(set_toks.end(), ts.begin(), ts.end());
      } else if (accept_word("CONSTANTS")) {
        auto ts = ident_list();
        const_toks.insert(const_toks.end(), ts.begin(), ts.end());
      } else if (accept_word("AXIOMS")) {
        while (at(Tok::Label)) {
          const Token label = take();
          Axiom ax{label.text, parse_pred(), {}, label.span};
          while (at(Tok::Annotation)) {
            ax.annotations.push_back(take().text);
          }
          expect_expr_end();
          ctx.axioms.push_back(std::move(ax));
        }
        if (!at_keyword()) {
          unexpected("a labelled axiom '@label: predicate'");
        }
      } else {
        bad_section();
      }
    }
    expect(Tok::Eof, "end of file after END");

    std::map<std::string, SourceSpan> seen;
    auto declare = [&](const Token & t, const char * what) {
      auto [it, fresh] = seen.emplace(t.text, t.span);
      if (!fresh) {
        diags_.push_back(make_error(
          "E_DUPLICATE_DECL", std::string(what) + " '" + t.text + "' is already declared", t.span));
      }
    };
    for (const auto & t : set_toks) {
      declare(t, "set");
      ctx.sets.push_back(t.text);
    }
    for (const auto & t : const_toks) {
      declare(t, "constant");
      ctx.constants.push_back(t.text);
    }
    std::set<std::string> labels;
    for (const auto & ax : ctx.axioms) {
      if (!labels.insert(ax.label).second) {
        diags_.push_back(make_error(
          "E_DUPLICATE_DECL", "axiom label '" + ax.label + "' is used twice", ax.span));
      }
    }
    return ctx;
  }

  Action action()
  {
    const Token label = expect(Tok::Label, "a labelled action '@label: x := e'");
    const Token target = expect_ident("an assigned variable");
    Action a{label.text, WholeAssign{}, label.span};
    std::optional<Token> index;
    if (accept(Tok::LParen)) {
      index = expect_ident("the process parameter");
      expect(Tok::RParen, "')'");
    }
    expect(Tok::Assign, "':='");
    ExprPtr rhs = parse_pred();
    if (index) {
      a.body = LocalAssign{target.text, index->text, rhs};
    } else if (const auto * call = rhs->as<ChannelCall>();
               call && target.text == "channels" &&
               (call->kind == ChannelKind::Send || call->kind == ChannelKind::Receive)) {
      a.body = ChannelAssign{call->kind, call->src, call->dst, call->msg};
    } else {
      a.body = WholeAssign{target.text, rhs};
    }
    return a;
  }

  std::vector<Action> actions_until_end()
  {
    std::vector<Action> out;
    while (!accept_word("end")) {
      out.push_back(action());
      expect_expr_end();
    }
    return out;
  }

  EventDecl event()
  {
    const Token name = expect_ident("event name");
    EventDecl ev;
    ev.name = name.text;
    ev.span = name.span;
    if (accept_word("any")) {
      while (at(Tok::Ident) && !is_keyword(peek().text)) {
        const Token p = expect_ident("a parameter name");
        ev.params.push_back(EventParam{p.text, p.span});
      }
    }
    if (accept_word("where")) {
      while (at(Tok::Label)) {
        const Token label = take();
        ev.guards.push_back(LabeledExpr{label.text, parse_pred(), label.span});
        expect_expr_end();
      }
    }
    if (!accept_word("then") && !accept_word("begin")) {
      unexpected("'then' or 'begin'");
    }
    ev.actions = actions_until_end();

    auto dup = [&](const std::string & what, const std::string & n, const SourceSpan & s) {
      diags_.push_back(make_error(
        "E_DUPLICATE_DECL", what + " '" + n + "' is declared twice in event '" + ev.name + "'", s));
    };
    std::set<std::string> seen;
    for (const auto & p : ev.params) {
      if (!seen.insert(p.name).second) {
        dup("parameter", p.name, p.span);
      }
    }
    seen.clear();
    for (const auto & g : ev.guards) {
      if (!seen.insert(g.label).second) {
        dup("label", g.label, g.span);
      }
    }
    for (const auto & a : ev.actions) {
      if (!seen.insert(a.label).second) {
        dup("label", a.label, a.span);
      }
    }
    return ev;
  }

  MachineModel machine()
  {
    MachineModel m;
    m.file = file_;
    expect_word("MACHINE");
    const Token name = expect_ident("machine name");
    m.name = name.text;
    std::vector<Token> var_toks;
    bool saw_init = false;
    SourceSpan init_span = name.span;
    while (!accept_word("END")) {
      if (accept_word("SEES")) {
        m.sees = expect_ident("context name").text;
      } else if (accept_word("VARIABLES")) {
        auto ts = ident_list();
        var_toks.insert(var_toks.end(), ts.begin(), ts.end());
      } else if (accept_word("INVARIANTS")) {
        while (at(Tok::Label)) {
          const Token label = take();
          m.invariants.push_back(LabeledExpr{label.text, parse_pred(), label.span});
          expect_expr_end();
        }
        if (!at_keyword()) {
          unexpected("a labelled invariant '@label: predicate'");
        }
      } else if (accept_word("EVENTS")) {
        while (true) {
          if (at_word("initialisation")) {
            init_span = take().span;
            if (saw_init) {
              fail("E_DUPLICATE_DECL", "initialisation is declared twice", init_span);
            }
            saw_init = true;
            if (!accept_word("begin") && !accept_word("then")) {
              unexpected("'begin'");
            }
            m.initialisation = actions_until_end();
          } else if (accept_word("event")) {
            m.events.push_back(event());
          } else {
            break;
          }
        }
      } else {
        bad_section();
      }
    }
    expect(Tok::Eof, "end of file after END");

    std::set<std::string> seen;
    for (const auto & t : var_toks) {
      if (!seen.insert(t.text).second) {
        diags_.push_back(
          make_error("E_DUPLICATE_DECL", "variable '" + t.text + "' is declared twice", t.span));
      }
      m.variables.push_back(t.text);
    }
    seen.clear();
    for (const auto & inv : m.invariants) {
      if (!seen.insert(inv.label).second) {
        diags_.push_back(make_error(
          "E_DUPLICATE_DECL", "invariant label '" + inv.label + "' is used twice", inv.span));
      }
    }
    seen.clear();
    for (const auto & ev : m.events) {
      if (!seen.insert(ev.name).second) {
        diags_.push_back(
          make_error("E_DUPLICATE_DECL", "event '" + ev.name + "' is declared twice", ev.span));
      }
    }
    std::set<std::string> initialised;
    for (const auto & a : m.initialisation) {
      initialised.insert(a.target());
    }
    for (const auto & t : var_toks) {
      if (!initialised.count(t.text)) {
        diags_.push_back(make_error(
          "E_UNINITIALISED", "variable '" + t.text + "' is not assigned by the initialisation",
          saw_init ? init_span : t.span));
      }
    }
    return m;
  }

  ExprPtr lone_expr()
  {
    ExprPtr e = parse_pred();
    expect(Tok::Eof, "end of expression");
    return e;
  }

private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  std::string file_;
  Diagnostics & diags_;
};

template <class T, class F>
Result<T> run(std::string_view text, const std::string & file, F && body)
{
  Diagnostics diags;
  auto toks = tokenize(text, file, diags);
  if (has_errors(diags)) {
    return diags;
  }
  Parser p(std::move(toks), file, diags);
  try {
    T value = body(p);
    if (has_errors(diags)) {
      return diags;
    }
    return Result<T>(std::move(value), std::move(diags));
  } catch (const ParseFailure &) {
    return diags;
  }
}

}  // namespace

bool is_reserved(std::string_view word)
{
  return is_keyword(word) ||
         std::find(kExprWords.begin(), kExprWords.end(), word) != kExprWords.end();
}

Result<ContextModel> parse_context(std::string_view text, const std::string & file)
{
  return run<ContextModel>(text, file, [](Parser & p) { return p.context(); });
}

Result<MachineModel> parse_machine(std::string_view text, const std::string & file)
{
  return run<MachineModel>(text, file, [](Parser & p) { return p.machine(); });
}

Result<ExprPtr> parse_expr(std::string_view text, const std::string & file)
{
  return run<ExprPtr>(text, file, [](Parser & p) { return p.lone_expr(); });
}

}  // namespace lb::parser
