// lb/sim/eval.cpp - expression evaluation against a simulator state
#include <algorithm>
#include <functional>

#include "lb/sim/sim.hpp"

namespace lb::sim
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

class Evaluator
{
public:
  Evaluator(const SimState & s, Binding env) : s_(s), env_(std::move(env)) {}

  Value operator()(const ExprPtr & e) { return eval(*e); }

private:
  [[noreturn]] void fail(const std::string & msg, const Expr & e, const char * code = "E_EVAL")
  {
    throw EvalError(code, msg + " in '" + to_source(e) + "'", e.span);
  }

  Value name(const Ident & n, const Expr & e)
  {
    if (auto it = env_.find(n); it != env_.end()) {
      return it->second;
    }
    if (auto it = s_.vars.find(n); it != s_.vars.end()) {
      return it->second;
    }
    const World & w = *s_.world;
    if (auto it = w.constants.find(n); it != w.constants.end()) {
      return it->second;
    }
    if (auto it = w.names.find(n); it != w.names.end()) {
      return it->second;
    }
    fail("'" + n + "' has no value", e, "E_UNDECLARED");
  }

  Value counter(const ChannelCall & c)
  {
    ChannelKey key{eval(*c.src), eval(*c.dst), eval(*c.msg)};
    auto it = s_.channels.find(key);
    if (it == s_.channels.end()) {
      return Value::integer(0);
    }
    switch (c.kind) {
      case ChannelKind::Sent: return Value::integer(it->second.sent);
      case ChannelKind::Received: return Value::integer(it->second.received);
      case ChannelKind::InChannel: return Value::integer(it->second.in_channel);
      default: break;
    }
    return Value::integer(0);
  }

  Value with(const std::vector<std::pair<Ident, Value>> & binds, const ExprPtr & e)
  {
    Binding saved = env_;
    for (const auto & [k, v] : binds) {
      env_[k] = v;
    }
    Value out = eval(*e);
    env_ = std::move(saved);
    return out;
  }

  bool quantify(const Quantifier & q, size_t i, std::vector<std::pair<Ident, Value>> & binds)
  {
    if (i == q.binders.size()) {
      return with(binds, q.body).as_bool();
    }
    const Value dom = with(binds, q.binders[i].domain);
    for (const auto & x : dom.elements()) {
      binds.emplace_back(q.binders[i].name, x);
      const bool r = quantify(q, i + 1, binds);
      binds.pop_back();
      if (q.kind == QuantKind::ForAll && !r) {
        return false;
      }
      if (q.kind == QuantKind::Exists && r) {
        return true;
      }
    }
    return q.kind == QuantKind::ForAll;
  }

  Value set_op(BinOp op, const Value & a, const Value & b, const Expr & e)
  {
    if (!a.is_finite_set() || !b.is_finite_set()) {
      fail("set operation on a non-finite set", e);
    }
    const auto xs = a.elements();
    const auto ys = b.elements();
    std::vector<Value> out;
    switch (op) {
      case BinOp::Union:
        std::set_union(xs.begin(), xs.end(), ys.begin(), ys.end(), std::back_inserter(out));
        break;
      case BinOp::Inter:
        std::set_intersection(xs.begin(), xs.end(), ys.begin(), ys.end(), std::back_inserter(out));
        break;
      default:
        std::set_difference(xs.begin(), xs.end(), ys.begin(), ys.end(), std::back_inserter(out));
        break;
    }
    return Value::make_set(std::move(out));
  }

  Value binary(const Binary & b, const Expr & e)
  {
    switch (b.op) {
      case BinOp::And: return Value::boolean(eval(*b.lhs).as_bool() && eval(*b.rhs).as_bool());
      case BinOp::Or: return Value::boolean(eval(*b.lhs).as_bool() || eval(*b.rhs).as_bool());
      case BinOp::Implies:
        return Value::boolean(!eval(*b.lhs).as_bool() || eval(*b.rhs).as_bool());
      default: break;
    }
    const Value l = eval(*b.lhs);
    const Value r = eval(*b.rhs);
    switch (b.op) {
      case BinOp::Add: return Value::integer(l.as_int() + r.as_int());
      case BinOp::Sub: return Value::integer(l.as_int() - r.as_int());
      case BinOp::Mul: return Value::integer(l.as_int() * r.as_int());
      case BinOp::Div:
      case BinOp::Mod:
        if (r.as_int() == 0) {
          fail("division by zero", e);
        }
        return Value::integer(b.op == BinOp::Div ? l.as_int() / r.as_int() : l.as_int() % r.as_int());
      case BinOp::Eq: return Value::boolean(l == r);
      case BinOp::Neq: return Value::boolean(l != r);
      case BinOp::Lt: return Value::boolean(l.as_int() < r.as_int());
      case BinOp::Le: return Value::boolean(l.as_int() <= r.as_int());
      case BinOp::Gt: return Value::boolean(l.as_int() > r.as_int());
      case BinOp::Ge: return Value::boolean(l.as_int() >= r.as_int());
      case BinOp::In: return Value::boolean(member(l, r));
      case BinOp::NotIn: return Value::boolean(!member(l, r));
      case BinOp::Subset: {
        const auto xs = l.elements();
        return Value::boolean(
          std::all_of(xs.begin(), xs.end(), [&](const Value & x) { return member(x, r); }));
      }
      case BinOp::Union:
      case BinOp::Inter:
      case BinOp::Diff: return set_op(b.op, l, r, e);
      case BinOp::TotalFn: return Value::type("-->", {l, r});
      case BinOp::PartialFn: return Value::type("+->", {l, r});
      case BinOp::Product: return Value::type("**", {l, r});
      default: break;
    }
    fail("unsupported operator", e);
  }

  Value eval(const Expr & e)
  {
    return std::visit(
      overloaded{
        [&](const IntLit & x) { return Value::integer(x.value); },
        [&](const BoolLit & x) { return Value::boolean(x.value); },
        [&](const Var & x) { return name(x.name, e); },
        [&](const EnumElem & x) { return Value::enum_elem(x.set, x.elem); },
        [&](const Apply & x) {
          const Value f = eval(*x.fn);
          const Value a = eval(*x.arg);
          const Value * r = f.lookup(a);
          if (!r) {
            fail("'" + a.to_string() + "' is outside the domain", e);
          }
          return *r;
        },
        [&](const Maplet & x) { return Value::pair(eval(*x.left), eval(*x.right)); },
        [&](const Binary & x) { return binary(x, e); },
        [&](const Unary & x) {
          const Value v = eval(*x.operand);
          switch (x.op) {
            case UnOp::Not: return Value::boolean(!v.as_bool());
            case UnOp::Neg: return Value::integer(-v.as_int());
            case UnOp::Card: return Value::integer(static_cast<long long>(v.size()));
            case UnOp::Dom:
              if (v.is(Value::Kind::Set) && v.items.empty()) {
                return v;
              }
              if (!v.is(Value::Kind::Map)) {
                fail("dom of a non-function", e);
              }
              return Value::make_set(v.items);
            case UnOp::Pow: return Value::type("POW", {v});
          }
          fail("unsupported unary operator", e);
        },
        [&](const SetExt & x) {
          std::vector<Value> out;
          for (const auto & el : x.elems) {
            out.push_back(eval(*el));
          }
          return Value::make_set(std::move(out));
        },
        [&](const SetComprehension & x) {
          const Value dom = eval(*x.domain);
          std::vector<Value> out;
          for (const auto & v : dom.elements()) {
            if (x.filter && !with({{x.binder, v}}, x.filter).as_bool()) {
              continue;
            }
            out.push_back(with({{x.binder, v}}, x.body));
          }
          return Value::make_set(std::move(out));
        },
        [&](const Quantifier & x) {
          std::vector<std::pair<Ident, Value>> binds;
          return Value::boolean(quantify(x, 0, binds));
        },
        [&](const Interval & x) {
          const long long lo = eval(*x.lo).as_int();
          const long long hi = eval(*x.hi).as_int();
          if (hi - lo > 1000000) {
            fail("interval too large", e, "E_INFINITE_DOMAIN");
          }
          std::vector<Value> out;
          for (long long i = lo; i <= hi; ++i) {
            out.push_back(Value::integer(i));
          }
          return Value::make_set(std::move(out));
        },
        [&](const ChannelCall & x) {
          if (x.kind == ChannelKind::Send || x.kind == ChannelKind::Receive ||
              x.kind == ChannelKind::Lose) {
            fail("channel update used as a value", e);
          }
          return counter(x);
        },
        [&](const FuncOverride & x) { return override_with(eval(*x.base), eval(*x.updates)); },
        [&](const Partition & x) {
          const Value whole = eval(*x.set);
          std::vector<Value> seen;
          size_t total = 0;
          for (const auto & b : x.blocks) {
            const Value blk = eval(*b);
            total += blk.size();
            const auto els = blk.elements();
            seen.insert(seen.end(), els.begin(), els.end());
          }
          const Value u = Value::make_set(seen);
          return Value::boolean(total == u.size() && u == whole);
        },
      },
      e.node);
  }

  const SimState & s_;
  Binding env_;
};

}  // namespace

Value eval(const ExprPtr & e, const SimState & s, const Binding & env)
{
  return Evaluator(s, env)(e);
}

}  // namespace lb::sim
