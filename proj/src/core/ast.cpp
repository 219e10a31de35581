// lb/core/ast.cpp
#include "lb/core/ast.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace lb
{

namespace
{
template <class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

bool is_valid_ident(std::string_view s)
{
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) {
    return false;
  }
  return std::all_of(s.begin() + 1, s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

const char * to_string(BinOp op)
{
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "mod";
    case BinOp::Eq: return "=";
    case BinOp::Neq: return "/=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::In: return "in";
    case BinOp::NotIn: return "/:";
    case BinOp::Subset: return "<:";
    case BinOp::Union: return "\\/";
    case BinOp::Inter: return "/\\";
    case BinOp::Diff: return "\\";
    case BinOp::And: return "&";
    case BinOp::Or: return "or";
    case BinOp::Implies: return "=>";
    case BinOp::TotalFn: return "-->";
    case BinOp::PartialFn: return "+->";
    case BinOp::Product: return "**";
  }
  return "?";
}

const char * to_string(UnOp op)
{
  switch (op) {
    case UnOp::Not: return "not";
    case UnOp::Neg: return "-";
    case UnOp::Card: return "card";
    case UnOp::Dom: return "dom";
    case UnOp::Pow: return "POW";
  }
  return "?";
}

const char * to_string(ChannelKind k)
{
  switch (k) {
    case ChannelKind::Send: return "send";
    case ChannelKind::Receive: return "receive";
    case ChannelKind::Lose: return "lose";
    case ChannelKind::Sent: return "sent";
    case ChannelKind::Received: return "received";
    case ChannelKind::InChannel: return "inChannel";
  }
  return "?";
}

std::optional<ChannelKind> channel_kind_from_name(std::string_view name)
{
  for (auto k : {ChannelKind::Send, ChannelKind::Receive, ChannelKind::Lose, ChannelKind::Sent,
                 ChannelKind::Received, ChannelKind::InChannel}) {
    if (name == to_string(k)) {
      return k;
    }
  }
  return std::nullopt;
}

const char * to_string(EventKind k)
{
  switch (k) {
    case EventKind::Internal: return "internal";
    case EventKind::Send: return "send";
    case EventKind::Receive: return "receive";
  }
  return "?";
}

ExprPtr make_expr(ExprNode node, SourceSpan span)
{
  return std::make_shared<const Expr>(Expr{std::move(node), std::move(span)});
}

ExprPtr int_lit(long long v) { return make_expr(IntLit{v}); }
ExprPtr bool_lit(bool v) { return make_expr(BoolLit{v}); }
ExprPtr var(Ident name) { return make_expr(Var{std::move(name)}); }
ExprPtr apply(ExprPtr fn, ExprPtr arg) { return make_expr(Apply{std::move(fn), std::move(arg)}); }
ExprPtr maplet(ExprPtr l, ExprPtr r) { return make_expr(Maplet{std::move(l), std::move(r)}); }
ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r)
{
  return make_expr(Binary{op, std::move(l), std::move(r)});
}
ExprPtr unary(UnOp op, ExprPtr e) { return make_expr(Unary{op, std::move(e)}); }

// ---------------------------------------------------------------------------
// Structural equality

bool structurally_equal(const ExprPtr & a, const ExprPtr & b)
{
  if (!a || !b) {
    return !a && !b;
  }
  return structurally_equal(*a, *b);
}

bool structurally_equal(const Expr & a, const Expr & b)
{
  if (a.node.index() != b.node.index()) {
    return false;
  }
  auto eq = [](const ExprPtr & x, const ExprPtr & y) { return structurally_equal(x, y); };
  auto eq_list = [&](const std::vector<ExprPtr> & x, const std::vector<ExprPtr> & y) {
    return std::equal(x.begin(), x.end(), y.begin(), y.end(), eq);
  };
  return std::visit(
    overloaded{
      [&](const IntLit & x) { return x.value == std::get<IntLit>(b.node).value; },
      [&](const BoolLit & x) { return x.value == std::get<BoolLit>(b.node).value; },
      [&](const Var & x) { return x.name == std::get<Var>(b.node).name; },
      [&](const EnumElem & x) {
        const auto & y = std::get<EnumElem>(b.node);
        return x.set == y.set && x.elem == y.elem;
      },
      [&](const Apply & x) {
        const auto & y = std::get<Apply>(b.node);
        return eq(x.fn, y.fn) && eq(x.arg, y.arg);
      },
      [&](const Maplet & x) {
        const auto & y = std::get<Maplet>(b.node);
        return eq(x.left, y.left) && eq(x.right, y.right);
      },
      [&](const Binary & x) {
        const auto & y = std::get<Binary>(b.node);
        return x.op == y.op && eq(x.lhs, y.lhs) && eq(x.rhs, y.rhs);
      },
      [&](const Unary & x) {
        const auto & y = std::get<Unary>(b.node);
        return x.op == y.op && eq(x.operand, y.operand);
      },
      [&](const SetExt & x) { return eq_list(x.elems, std::get<SetExt>(b.node).elems); },
      [&](const SetComprehension & x) {
        const auto & y = std::get<SetComprehension>(b.node);
        return x.binder == y.binder && eq(x.domain, y.domain) && eq(x.filter, y.filter) &&
               eq(x.body, y.body);
      },
      [&](const Quantifier & x) {
        const auto & y = std::get<Quantifier>(b.node);
        if (x.kind != y.kind || x.binders.size() != y.binders.size()) {
          return false;
        }
        for (size_t i = 0; i < x.binders.size(); ++i) {
          if (x.binders[i].name != y.binders[i].name ||
              !eq(x.binders[i].domain, y.binders[i].domain)) {
            return false;
          }
        }
        return eq(x.body, y.body);
      },
      [&](const Interval & x) {
        const auto & y = std::get<Interval>(b.node);
        return eq(x.lo, y.lo) && eq(x.hi, y.hi);
      },
      [&](const ChannelCall & x) {
        const auto & y = std::get<ChannelCall>(b.node);
        return x.kind == y.kind && eq(x.src, y.src) && eq(x.dst, y.dst) && eq(x.msg, y.msg);
      },
      [&](const FuncOverride & x) {
        const auto & y = std::get<FuncOverride>(b.node);
        return eq(x.base, y.base) && eq(x.updates, y.updates);
      },
      [&](const Partition & x) {
        const auto & y = std::get<Partition>(b.node);
        return eq(x.set, y.set) && eq_list(x.blocks, y.blocks);
      },
    },
    a.node);
}

// ---------------------------------------------------------------------------
// Traversal

void walk(const Expr & e, const std::function<void(const Expr &)> & f)
{
  f(e);
  auto go = [&](const ExprPtr & c) {
    if (c) {
      walk(*c, f);
    }
  };
  std::visit(
    overloaded{
      [](const IntLit &) {}, [](const BoolLit &) {}, [](const Var &) {}, [](const EnumElem &) {},
      [&](const Apply & x) { go(x.fn); go(x.arg); },
      [&](const Maplet & x) { go(x.left); go(x.right); },
      [&](const Binary & x) { go(x.lhs); go(x.rhs); },
      [&](const Unary & x) { go(x.operand); },
      [&](const SetExt & x) { std::for_each(x.elems.begin(), x.elems.end(), go); },
      [&](const SetComprehension & x) { go(x.domain); go(x.filter); go(x.body); },
      [&](const Quantifier & x) {
        for (const auto & b : x.binders) {
          go(b.domain);
        }
        go(x.body);
      },
      [&](const Interval & x) { go(x.lo); go(x.hi); },
      [&](const ChannelCall & x) { go(x.src); go(x.dst); go(x.msg); },
      [&](const FuncOverride & x) { go(x.base); go(x.updates); },
      [&](const Partition & x) {
        go(x.set);
        std::for_each(x.blocks.begin(), x.blocks.end(), go);
      },
    },
    e.node);
}

namespace
{
void collect_free(const Expr & e, std::set<Ident> & bound, std::set<Ident> & out)
{
  auto go = [&](const ExprPtr & c) {
    if (c) {
      collect_free(*c, bound, out);
    }
  };
  // Runs `body` with `names` bound, restoring the previous binding set after.
  auto with_bound = [&](const std::vector<Ident> & names, auto && body) {
    std::vector<Ident> added;
    for (const auto & n : names) {
      if (bound.insert(n).second) {
        added.push_back(n);
      }
    }
    body();
    for (const auto & n : added) {
      bound.erase(n);
    }
  };
  std::visit(
    overloaded{
      [](const IntLit &) {}, [](const BoolLit &) {}, [](const EnumElem &) {},
      [&](const Var & x) {
        if (!bound.count(x.name)) {
          out.insert(x.name);
        }
      },
      [&](const Apply & x) { go(x.fn); go(x.arg); },
      [&](const Maplet & x) { go(x.left); go(x.right); },
      [&](const Binary & x) { go(x.lhs); go(x.rhs); },
      [&](const Unary & x) { go(x.operand); },
      [&](const SetExt & x) { std::for_each(x.elems.begin(), x.elems.end(), go); },
      [&](const SetComprehension & x) {
        go(x.domain);
        with_bound({x.binder}, [&] { go(x.filter); go(x.body); });
      },
      [&](const Quantifier & x) {
        std::vector<Ident> names;
        for (const auto & b : x.binders) {
          // each domain sees the binders declared before it
          with_bound(names, [&] { go(b.domain); });
          names.push_back(b.name);
        }
        with_bound(names, [&] { go(x.body); });
      },
      [&](const Interval & x) { go(x.lo); go(x.hi); },
      [&](const ChannelCall & x) { go(x.src); go(x.dst); go(x.msg); },
      [&](const FuncOverride & x) { go(x.base); go(x.updates); },
      [&](const Partition & x) {
        go(x.set);
        std::for_each(x.blocks.begin(), x.blocks.end(), go);
      },
    },
    e.node);
}
}  // namespace

std::set<Ident> free_vars(const Expr & e)
{
  std::set<Ident> bound;
  std::set<Ident> out;
  collect_free(e, bound, out);
  return out;
}

std::vector<ExprPtr> flatten_maplets(const ExprPtr & e)
{
  std::vector<ExprPtr> out;
  ExprPtr cur = e;
  while (const auto * m = cur->as<Maplet>()) {
    out.push_back(m->right);
    cur = m->left;
  }
  out.push_back(cur);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<ExprPtr> conjuncts(const ExprPtr & e)
{
  std::vector<ExprPtr> out;
  std::function<void(const ExprPtr &)> go = [&](const ExprPtr & x) {
    const auto * b = x->as<Binary>();
    if (b && b->op == BinOp::And) {
      go(b->lhs);
      go(b->rhs);
    } else {
      out.push_back(x);
    }
  };
  go(e);
  return out;
}

// ---------------------------------------------------------------------------
// Pretty printing (inverse of the parser)

namespace
{
// Binding strength; larger binds tighter. Mirrors the parser's levels.
enum Prec : int {
  kQuant = 1,
  kImplies,
  kOr,
  kAnd,
  kNot,
  kCompare,
  kTypeOp,
  kInterval,
  kSetOp,
  kAdditive,
  kMultiplicative,
  kUnaryMinus,
  kMaplet,
  kAtom,
};

int binop_prec(BinOp op)
{
  switch (op) {
    case BinOp::Implies: return kImplies;
    case BinOp::Or: return kOr;
    case BinOp::And: return kAnd;
    case BinOp::Eq: case BinOp::Neq: case BinOp::Lt: case BinOp::Le: case BinOp::Gt:
    case BinOp::Ge: case BinOp::In: case BinOp::NotIn: case BinOp::Subset:
      return kCompare;
    case BinOp::TotalFn: case BinOp::PartialFn: return kTypeOp;
    case BinOp::Union: case BinOp::Inter: case BinOp::Diff: return kSetOp;
    case BinOp::Add: case BinOp::Sub: return kAdditive;
    case BinOp::Mul: case BinOp::Div: case BinOp::Mod: case BinOp::Product:
      return kMultiplicative;
  }
  return kAtom;
}

bool right_assoc(BinOp op)
{
  return op == BinOp::Implies || op == BinOp::TotalFn || op == BinOp::PartialFn;
}

int prec_of(const Expr & e)
{
  if (const auto * b = e.as<Binary>()) {
    return binop_prec(b->op);
  }
  if (e.is<FuncOverride>()) {
    return kSetOp;
  }
  if (e.is<Quantifier>()) {
    return kQuant;
  }
  if (e.is<Interval>()) {
    return kInterval;
  }
  if (e.is<Maplet>()) {
    return kMaplet;
  }
  if (const auto * u = e.as<Unary>()) {
    if (u->op == UnOp::Not) {
      return kNot;
    }
    if (u->op == UnOp::Neg) {
      return kUnaryMinus;
    }
  }
  if (const auto * i = e.as<IntLit>(); i && i->value < 0) {
    return kUnaryMinus;
  }
  return kAtom;
}

void print(const Expr & e, std::ostream & os);

// Prints `e`, parenthesized when it binds looser than `min_prec`.
void print_at(const ExprPtr & e, int min_prec, std::ostream & os)
{
  if (prec_of(*e) < min_prec) {
    os << '(';
    print(*e, os);
    os << ')';
  } else {
    print(*e, os);
  }
}

void print_binder_domains(const std::vector<QuantBinder> & binders, std::ostream & os)
{
  for (size_t i = 0; i < binders.size(); ++i) {
    if (i) {
      os << " & ";
    }
    os << binders[i].name << " in ";
    print_at(binders[i].domain, kCompare + 1, os);
  }
}

void print(const Expr & e, std::ostream & os)
{
  std::visit(
    overloaded{
      [&](const IntLit & x) { os << x.value; },
      [&](const BoolLit & x) { os << (x.value ? "TRUE" : "FALSE"); },
      [&](const Var & x) { os << x.name; },
      [&](const EnumElem & x) { os << x.elem; },
      [&](const Apply & x) {
        print_at(x.fn, kAtom, os);
        os << '(';
        print(*x.arg, os);
        os << ')';
      },
      [&](const Maplet & x) {
        print_at(x.left, kMaplet, os);
        os << " |-> ";
        print_at(x.right, kAtom, os);
      },
      [&](const Binary & x) {
        const int p = binop_prec(x.op);
        const bool ra = right_assoc(x.op);
        // comparisons are non-associative: both sides need to bind tighter
        const bool non_assoc = p == kCompare;
        print_at(x.lhs, (ra || non_assoc) ? p + 1 : p, os);
        os << ' ' << to_string(x.op) << ' ';
        print_at(x.rhs, ra ? p : p + 1, os);
      },
      [&](const Unary & x) {
        switch (x.op) {
          case UnOp::Not:
            os << "not ";
            print_at(x.operand, kNot, os);
            break;
          case UnOp::Neg:
            os << '-';
            print_at(x.operand, kMaplet, os);
            break;
          default:
            os << to_string(x.op) << '(';
            print(*x.operand, os);
            os << ')';
        }
      },
      [&](const SetExt & x) {
        os << '{';
        for (size_t i = 0; i < x.elems.size(); ++i) {
          if (i) {
            os << ", ";
          }
          print(*x.elems[i], os);
        }
        os << '}';
      },
      [&](const SetComprehension & x) {
        os << '{' << x.binder << " . " << x.binder << " in ";
        print_at(x.domain, kCompare + 1, os);
        if (x.filter) {
          os << " & ";
          print_at(x.filter, kAnd + 1, os);
        }
        os << " | ";
        print(*x.body, os);
        os << '}';
      },
      [&](const Quantifier & x) {
        os << (x.kind == QuantKind::ForAll ? '!' : '#');
        for (size_t i = 0; i < x.binders.size(); ++i) {
          os << (i ? ", " : "") << x.binders[i].name;
        }
        os << " . ";
        print_binder_domains(x.binders, os);
        if (x.kind == QuantKind::ForAll) {
          os << " => ";
          print_at(x.body, kImplies, os);
        } else {
          os << " & ";
          print_at(x.body, kAnd + 1, os);
        }
      },
      [&](const Interval & x) {
        print_at(x.lo, kSetOp, os);
        os << " .. ";
        print_at(x.hi, kSetOp, os);
      },
      [&](const ChannelCall & x) {
        os << to_string(x.kind) << "(channels |-> (";
        print_at(x.src, kMaplet, os);
        os << " |-> ";
        print_at(x.dst, kAtom, os);
        os << ") |-> ";
        print_at(x.msg, kAtom, os);
        os << ')';
      },
      [&](const FuncOverride & x) {
        print_at(x.base, kSetOp, os);
        os << " <+ ";
        print_at(x.updates, kSetOp + 1, os);
      },
      [&](const Partition & x) {
        os << "partition(";
        print(*x.set, os);
        for (const auto & b : x.blocks) {
          os << ", ";
          print(*b, os);
        }
        os << ')';
      },
    },
    e.node);
}
}  // namespace

std::string to_source(const Expr & e)
{
  std::ostringstream os;
  print(e, os);
  return os.str();
}

std::string to_source(const ExprPtr & e) { return e ? to_source(*e) : std::string{}; }

// ---------------------------------------------------------------------------
// Models

const Axiom * ContextModel::find_axiom(std::string_view label) const
{
  auto it = std::find_if(axioms.begin(), axioms.end(), [&](const Axiom & a) {
    return a.label == label;
  });
  return it == axioms.end() ? nullptr : &*it;
}

bool ContextModel::has_constant(std::string_view name) const
{
  return std::find(constants.begin(), constants.end(), name) != constants.end();
}

bool ContextModel::has_set(std::string_view name) const
{
  return std::find(sets.begin(), sets.end(), name) != sets.end();
}

Ident Action::target() const
{
  return std::visit(
    overloaded{
      [](const LocalAssign & a) { return a.var; },
      [](const ChannelAssign &) { return Ident{"channels"}; },
      [](const WholeAssign & a) { return a.var; },
    },
    body);
}

bool EventDecl::has_param(std::string_view n) const
{
  return std::any_of(params.begin(), params.end(), [&](const EventParam & p) {
    return p.name == n;
  });
}

const LabeledExpr * MachineModel::find_invariant(std::string_view label) const
{
  auto it = std::find_if(invariants.begin(), invariants.end(), [&](const LabeledExpr & i) {
    return i.label == label;
  });
  return it == invariants.end() ? nullptr : &*it;
}

const EventDecl * MachineModel::find_event(std::string_view n) const
{
  auto it = std::find_if(events.begin(), events.end(), [&](const EventDecl & e) {
    return e.name == n;
  });
  return it == events.end() ? nullptr : &*it;
}

Result<EventKind> classify_event(const EventDecl & e)
{
  bool has_send = false;
  bool has_receive = false;
  for (const auto & a : e.actions) {
    if (const auto * c = std::get_if<ChannelAssign>(&a.body)) {
      has_send |= c->kind == ChannelKind::Send;
      has_receive |= c->kind == ChannelKind::Receive;
    }
  }
  if (has_send && has_receive) {
    return Diagnostics{make_error(
      "E_AMBIGUOUS_KIND", "event '" + e.name + "' both sends and receives a message", e.span)};
  }
  if (has_send) {
    return EventKind::Send;
  }
  if (has_receive) {
    return EventKind::Receive;
  }
  return EventKind::Internal;
}

}  // namespace lb
