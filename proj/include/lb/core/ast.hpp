// lb/core/ast.hpp - abstract syntax shared by parser, analyzer, codegen and simulator
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "lb/core/diagnostic.hpp"

namespace lb
{

using Ident = std::string;

/// True iff `s` matches [A-Za-z][A-Za-z0-9_]*.
bool is_valid_ident(std::string_view s);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class BinOp {
  Add, Sub, Mul, Div, Mod,
  Eq, Neq, Lt, Le, Gt, Ge,
  In, NotIn, Subset,
  Union, Inter, Diff,
  And, Or, Implies,
  // type constructors; only meaningful in typing axioms and invariants
  TotalFn, PartialFn, Product,
};

enum class UnOp { Not, Neg, Card, Dom, Pow };

enum class QuantKind { ForAll, Exists };

enum class ChannelKind { Send, Receive, Lose, Sent, Received, InChannel };

const char * to_string(BinOp op);
const char * to_string(UnOp op);
const char * to_string(ChannelKind k);
std::optional<ChannelKind> channel_kind_from_name(std::string_view name);

struct IntLit { long long value = 0; };
struct BoolLit { bool value = false; };
struct Var { Ident name; };
struct EnumElem { Ident set; Ident elem; };
struct Apply { ExprPtr fn; ExprPtr arg; };
struct Maplet { ExprPtr left; ExprPtr right; };
struct Binary { BinOp op; ExprPtr lhs; ExprPtr rhs; };
struct Unary { UnOp op; ExprPtr operand; };
struct SetExt { std::vector<ExprPtr> elems; };
struct SetComprehension
{
  Ident binder;
  ExprPtr domain;
  ExprPtr filter;  // may be null
  ExprPtr body;
};
struct QuantBinder { Ident name; ExprPtr domain; };
struct Quantifier
{
  QuantKind kind;
  std::vector<QuantBinder> binders;
  ExprPtr body;
};
struct Interval { ExprPtr lo; ExprPtr hi; };
/// kind(channels |-> (src |-> dst) |-> msg). The channels variable itself is
/// implicit and never stored.
struct ChannelCall { ChannelKind kind; ExprPtr src; ExprPtr dst; ExprPtr msg; };
struct FuncOverride { ExprPtr base; ExprPtr updates; };
/// partition(S, B1, ..., Bn)
struct Partition { ExprPtr set; std::vector<ExprPtr> blocks; };

using ExprNode = std::variant<
  IntLit, BoolLit, Var, EnumElem, Apply, Maplet, Binary, Unary, SetExt, SetComprehension,
  Quantifier, Interval, ChannelCall, FuncOverride, Partition>;

struct Expr
{
  ExprNode node;
  SourceSpan span;

  template <class T>
  const T * as() const
  {
    return std::get_if<T>(&node);
  }
  template <class T>
  bool is() const
  {
    return std::holds_alternative<T>(node);
  }
};

ExprPtr make_expr(ExprNode node, SourceSpan span = {});

// Small constructors, mostly for tests and rewrites.
ExprPtr int_lit(long long v);
ExprPtr bool_lit(bool v);
ExprPtr var(Ident name);
ExprPtr apply(ExprPtr fn, ExprPtr arg);
ExprPtr maplet(ExprPtr l, ExprPtr r);
ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r);
ExprPtr unary(UnOp op, ExprPtr e);

/// Structural equality; spans are ignored.
bool structurally_equal(const Expr & a, const Expr & b);
bool structurally_equal(const ExprPtr & a, const ExprPtr & b);

/// Identifiers occurring free in `e` (binders excluded within their scope).
std::set<Ident> free_vars(const Expr & e);

/// Calls `f` on every node in pre-order.
void walk(const Expr & e, const std::function<void(const Expr &)> & f);

/// Flattens a left-nested maplet chain `a |-> b |-> c` into [a, b, c].
std::vector<ExprPtr> flatten_maplets(const ExprPtr & e);

/// Splits a conjunction into its conjuncts.
std::vector<ExprPtr> conjuncts(const ExprPtr & e);

/// Concrete ASCII syntax that parse_expr reads back to the same tree.
std::string to_source(const Expr & e);
std::string to_source(const ExprPtr & e);

// ---------------------------------------------------------------------------
// Models

struct Axiom
{
  Ident label;
  ExprPtr predicate;
  std::vector<Ident> annotations;  // process classes from trailing @Name markers
  SourceSpan span;
};

struct ContextModel
{
  Ident name;
  std::vector<Ident> extends;
  std::vector<Ident> sets;
  std::vector<Ident> constants;
  std::vector<Axiom> axioms;
  std::string file;

  const Axiom * find_axiom(std::string_view label) const;
  bool has_constant(std::string_view name) const;
  bool has_set(std::string_view name) const;
};

struct LabeledExpr
{
  Ident label;
  ExprPtr expr;
  SourceSpan span;
};

/// x(proc) := rhs
struct LocalAssign { Ident var; Ident proc; ExprPtr rhs; };
/// channels := send(...) / receive(...)
struct ChannelAssign { ChannelKind kind; ExprPtr src; ExprPtr dst; ExprPtr msg; };
/// x := rhs (whole-variable assignment; only legal in the initialisation)
struct WholeAssign { Ident var; ExprPtr rhs; };

struct Action
{
  Ident label;
  std::variant<LocalAssign, ChannelAssign, WholeAssign> body;
  SourceSpan span;

  /// Name of the variable written ("channels" for channel actions).
  Ident target() const;
};

struct EventParam
{
  Ident name;
  SourceSpan span;
};

struct EventDecl
{
  Ident name;
  std::vector<EventParam> params;
  std::vector<LabeledExpr> guards;
  std::vector<Action> actions;
  SourceSpan span;

  bool has_param(std::string_view name) const;
};

struct MachineModel
{
  Ident name;
  Ident sees;
  std::vector<Ident> variables;
  std::vector<LabeledExpr> invariants;
  std::vector<Action> initialisation;
  std::vector<EventDecl> events;
  std::string file;

  const LabeledExpr * find_invariant(std::string_view label) const;
  const EventDecl * find_event(std::string_view name) const;
};

enum class EventKind { Internal, Send, Receive };
const char * to_string(EventKind k);

/// Send iff a send action is present, Receive iff a receive action is present.
/// Fails with E_AMBIGUOUS_KIND when both are present.
Result<EventKind> classify_event(const EventDecl & e);

}  // namespace lb
