// tests/expr_gen.hpp - random well-formed expression trees for property tests
#pragma once

#include <random>
#include <string>
#include <vector>

#include "lb/core/ast.hpp"

namespace lb::test
{

class ExprGen
{
public:
  explicit ExprGen(std::uint64_t seed) : rng_(seed) {}

  ExprPtr gen(int depth)
  {
    if (depth <= 0 || pick(4) == 0) {
      return leaf();
    }
    switch (pick(13)) {
      case 0: return apply(var(name()), gen(depth - 1));
      case 1: return maplet(gen(depth - 1), gen(depth - 1));
      case 2: return binary(binop(), gen(depth - 1), gen(depth - 1));
      case 3: {
        // the parser folds a minus sign into an integer literal
        const UnOp op = unop();
        ExprPtr arg = gen(depth - 1);
        if (op == UnOp::Neg && arg->is<IntLit>()) {
          return int_lit(-arg->as<IntLit>()->value);
        }
        return unary(op, arg);
      }
      case 4: {
        SetExt s;
        for (int i = pick(4); i > 0; --i) {
          s.elems.push_back(gen(depth - 1));
        }
        return make_expr(std::move(s));
      }
      case 5: {
        const Ident b = name();
        return make_expr(SetComprehension{b, gen(depth - 1), pick(2) ? gen(depth - 1) : nullptr,
                                          gen(depth - 1)});
      }
      case 6: {
        Quantifier q{pick(2) ? QuantKind::ForAll : QuantKind::Exists, {}, gen(depth - 1)};
        for (int i = 1 + pick(2); i > 0; --i) {
          q.binders.push_back({name(), gen(depth - 1)});
        }
        return make_expr(std::move(q));
      }
      case 7: return make_expr(Interval{gen(depth - 1), gen(depth - 1)});
      case 8: {
        static const ChannelKind kinds[] = {ChannelKind::Sent, ChannelKind::Received,
                                            ChannelKind::InChannel};
        return make_expr(ChannelCall{kinds[pick(3)], gen(depth - 1), gen(depth - 1), gen(depth - 1)});
      }
      case 9: return make_expr(FuncOverride{gen(depth - 1), gen(depth - 1)});
      case 10: {
        Partition p{gen(depth - 1), {}};
        for (int i = 1 + pick(3); i > 0; --i) {
          p.blocks.push_back(gen(depth - 1));
        }
        return make_expr(std::move(p));
      }
      case 11: return apply(apply(var(name()), gen(depth - 1)), gen(depth - 1));
      default: return binary(BinOp::And, gen(depth - 1), gen(depth - 1));
    }
  }

  int pick(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }

private:
  ExprPtr leaf()
  {
    switch (pick(3)) {
      case 0: return int_lit(pick(100));
      case 1: return bool_lit(pick(2) == 1);
      default: return var(name());
    }
  }

  Ident name()
  {
    static const char * names[] = {"a", "b", "c", "x", "y", "proc", "network", "pc", "S", "f"};
    return names[pick(10)];
  }

  BinOp binop()
  {
    static const BinOp ops[] = {
      BinOp::Add, BinOp::Sub,   BinOp::Mul,   BinOp::Div,     BinOp::Mod,     BinOp::Eq,
      BinOp::Neq, BinOp::Lt,    BinOp::Le,    BinOp::Gt,      BinOp::Ge,      BinOp::In,
      BinOp::NotIn, BinOp::Subset, BinOp::Union, BinOp::Inter, BinOp::Diff,  BinOp::And,
      BinOp::Or,  BinOp::Implies, BinOp::TotalFn, BinOp::PartialFn, BinOp::Product};
    return ops[pick(static_cast<int>(std::size(ops)))];
  }

  UnOp unop()
  {
    static const UnOp ops[] = {UnOp::Not, UnOp::Neg, UnOp::Card, UnOp::Dom, UnOp::Pow};
    return ops[pick(5)];
  }

  std::mt19937_64 rng_;
};

/// Checks that every subexpression's free variables, minus the names bound
/// on the path to it, are free in the whole.
inline bool free_vars_monotone(const Expr & whole)
{
  const auto top = free_vars(whole);
  bool ok = true;
  std::function<void(const Expr &, std::set<Ident>)> go = [&](const Expr & e, std::set<Ident> bound) {
    for (const auto & v : free_vars(e)) {
      if (!bound.count(v) && !top.count(v)) {
        ok = false;
      }
    }
    std::visit(
      [&](const auto & n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, SetComprehension>) {
          go(*n.domain, bound);
          auto inner = bound;
          inner.insert(n.binder);
          if (n.filter) {
            go(*n.filter, inner);
          }
          go(*n.body, inner);
        } else if constexpr (std::is_same_v<T, Quantifier>) {
          auto inner = bound;
          for (const auto & b : n.binders) {
            go(*b.domain, inner);
            inner.insert(b.name);
          }
          go(*n.body, inner);
        } else if constexpr (std::is_same_v<T, Apply>) {
          go(*n.fn, bound);
          go(*n.arg, bound);
        } else if constexpr (std::is_same_v<T, Maplet>) {
          go(*n.left, bound);
          go(*n.right, bound);
        } else if constexpr (std::is_same_v<T, Binary>) {
          go(*n.lhs, bound);
          go(*n.rhs, bound);
        } else if constexpr (std::is_same_v<T, Unary>) {
          go(*n.operand, bound);
        } else if constexpr (std::is_same_v<T, SetExt>) {
          for (const auto & x : n.elems) {
            go(*x, bound);
          }
        } else if constexpr (std::is_same_v<T, Interval>) {
          go(*n.lo, bound);
          go(*n.hi, bound);
        } else if constexpr (std::is_same_v<T, ChannelCall>) {
          go(*n.src, bound);
          go(*n.dst, bound);
          go(*n.msg, bound);
        } else if constexpr (std::is_same_v<T, FuncOverride>) {
          go(*n.base, bound);
          go(*n.updates, bound);
        } else if constexpr (std::is_same_v<T, Partition>) {
          go(*n.set, bound);
          for (const auto & x : n.blocks) {
            go(*x, bound);
          }
        }
      },
      e.node);
  };
  go(whole, {});
  return ok;
}

}  // namespace lb::test
