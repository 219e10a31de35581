// lb/sim/value.cpp
#include "lb/sim/value.hpp"

#include <algorithm>

namespace lb::sim
{

Value Value::integer(long long v)
{
  Value x;
  x.kind = Kind::Int;
  x.num = v;
  return x;
}

Value Value::boolean(bool v)
{
  Value x;
  x.kind = Kind::Bool;
  x.num = v ? 1 : 0;
  return x;
}

Value Value::proc(Ident n)
{
  Value x;
  x.kind = Kind::Proc;
  x.name = std::move(n);
  return x;
}

Value Value::enum_elem(Ident set, Ident elem)
{
  Value x;
  x.kind = Kind::Enum;
  x.set = std::move(set);
  x.name = std::move(elem);
  return x;
}

Value Value::state(Ident n)
{
  Value x;
  x.kind = Kind::State;
  x.name = std::move(n);
  return x;
}

Value Value::tuple(std::vector<Value> elems)
{
  Value x;
  x.kind = Kind::Tuple;
  x.items = std::move(elems);
  return x;
}

Value Value::pair(Value a, Value b) { return tuple({std::move(a), std::move(b)}); }

Value Value::empty_set()
{
  Value x;
  x.kind = Kind::Set;
  return x;
}

Value Value::make_set(std::vector<Value> elems)
{
  std::sort(elems.begin(), elems.end());
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  const bool pairs = !elems.empty() && std::all_of(elems.begin(), elems.end(), [](const Value & v) {
    return v.kind == Kind::Tuple && v.items.size() == 2;
  });
  if (pairs) {
    bool distinct_keys = true;
    for (size_t i = 1; i < elems.size(); ++i) {
      if (elems[i - 1].items[0] == elems[i].items[0]) {
        distinct_keys = false;
        break;
      }
    }
    if (distinct_keys) {
      Value m;
      m.kind = Kind::Map;
      for (auto & e : elems) {
        m.items.push_back(std::move(e.items[0]));
        m.values.push_back(std::move(e.items[1]));
      }
      return m;
    }
  }
  Value x;
  x.kind = Kind::Set;
  x.items = std::move(elems);
  return x;
}

Value Value::make_map(std::vector<Value> keys, std::vector<Value> vals)
{
  std::vector<Value> pairs;
  pairs.reserve(keys.size());
  for (size_t i = 0; i < keys.size(); ++i) {
    pairs.push_back(pair(std::move(keys[i]), std::move(vals[i])));
  }
  return make_set(std::move(pairs));
}

Value Value::type(Ident ctor, std::vector<Value> operands)
{
  Value x;
  x.kind = Kind::Type;
  x.name = std::move(ctor);
  x.items = std::move(operands);
  return x;
}

bool Value::as_bool() const
{
  if (kind != Kind::Bool) {
    throw EvalError("E_EVAL", "expected a boolean, got " + to_string());
  }
  return num != 0;
}

long long Value::as_int() const
{
  if (kind != Kind::Int) {
    throw EvalError("E_EVAL", "expected an integer, got " + to_string());
  }
  return num;
}

std::vector<Value> Value::elements() const
{
  if (kind == Kind::Set) {
    return items;
  }
  if (kind == Kind::Map) {
    std::vector<Value> out;
    out.reserve(items.size());
    for (size_t i = 0; i < items.size(); ++i) {
      out.push_back(pair(items[i], values[i]));
    }
    return out;
  }
  throw EvalError("E_INFINITE_DOMAIN", "not a finite set: " + to_string());
}

size_t Value::size() const
{
  if (!is_finite_set()) {
    throw EvalError("E_INFINITE_DOMAIN", "not a finite set: " + to_string());
  }
  return items.size();
}

const Value * Value::lookup(const Value & key) const
{
  if (kind != Kind::Map) {
    return nullptr;
  }
  auto it = std::lower_bound(items.begin(), items.end(), key);
  if (it == items.end() || *it != key) {
    return nullptr;
  }
  return &values[static_cast<size_t>(it - items.begin())];
}

int Value::compare(const Value & o) const
{
  if (kind != o.kind) {
    return kind < o.kind ? -1 : 1;
  }
  switch (kind) {
    case Kind::Int:
    case Kind::Bool:
      return num < o.num ? -1 : (num > o.num ? 1 : 0);
    case Kind::Enum:
      if (int c = set.compare(o.set)) {
        return c < 0 ? -1 : 1;
      }
      [[fallthrough]];
    case Kind::Proc:
    case Kind::State: {
      const int c = name.compare(o.name);
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case Kind::Type:
      if (int c = name.compare(o.name)) {
        return c < 0 ? -1 : 1;
      }
      [[fallthrough]];
    case Kind::Tuple:
    case Kind::Set:
    case Kind::Map: {
      auto lex = [](const std::vector<Value> & a, const std::vector<Value> & b) {
        for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
          if (int c = a[i].compare(b[i])) {
            return c;
          }
        }
        return a.size() == b.size() ? 0 : (a.size() < b.size() ? -1 : 1);
      };
      if (int c = lex(items, o.items)) {
        return c;
      }
      return lex(values, o.values);
    }
  }
  return 0;
}

std::string Value::to_string() const
{
  auto list = [](const std::vector<Value> & v, const char * sep) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
      out += (i ? sep : "") + v[i].to_string();
    }
    return out;
  };
  switch (kind) {
    case Kind::Int: return std::to_string(num);
    case Kind::Bool: return num ? "TRUE" : "FALSE";
    case Kind::Proc:
    case Kind::Enum:
    case Kind::State: return name;
    case Kind::Tuple: {
      std::string out;
      for (size_t i = 0; i < items.size(); ++i) {
        const bool nested = items[i].kind == Kind::Tuple;
        out += (i ? " |-> " : "") + (nested ? "(" + items[i].to_string() + ")" : items[i].to_string());
      }
      return out;
    }
    case Kind::Set: return "{" + list(items, ", ") + "}";
    case Kind::Map: {
      std::string out = "{";
      for (size_t i = 0; i < items.size(); ++i) {
        out += (i ? ", " : "") + pair(items[i], values[i]).to_string();
      }
      return out + "}";
    }
    case Kind::Type:
      if (items.empty()) {
        return name;
      }
      if (name == "POW") {
        return "POW(" + items[0].to_string() + ")";
      }
      return "(" + items[0].to_string() + " " + name + " " + items[1].to_string() + ")";
  }
  return "?";
}

bool member(const Value & x, const Value & s)
{
  using K = Value::Kind;
  switch (s.kind) {
    case K::Set: return std::binary_search(s.items.begin(), s.items.end(), x);
    case K::Map: {
      if (x.kind != K::Tuple || x.items.size() != 2) {
        return false;
      }
      const Value * v = s.lookup(x.items[0]);
      return v && *v == x.items[1];
    }
    case K::Type: break;
    default: throw EvalError("E_EVAL", "not a set: " + s.to_string());
  }
  const Ident & c = s.name;
  if (c == "ANY") {
    return true;
  }
  if (c == "INT") {
    return x.kind == K::Int;
  }
  if (c == "NAT") {
    return x.kind == K::Int && x.num >= 0;
  }
  if (c == "NAT1") {
    return x.kind == K::Int && x.num >= 1;
  }
  if (c == "POW") {
    if (!x.is_finite_set()) {
      return false;
    }
    const auto elems = x.elements();
    return std::all_of(elems.begin(), elems.end(),
                       [&](const Value & e) { return member(e, s.items[0]); });
  }
  if (c == "**") {
    return x.kind == K::Tuple && x.items.size() == 2 && member(x.items[0], s.items[0]) &&
           member(x.items[1], s.items[1]);
  }
  if (c == "-->" || c == "+->") {
    if (!x.is_finite_set()) {
      return false;
    }
    if (x.kind == K::Set && !x.items.empty()) {
      return false;  // a relation that is not a function
    }
    for (size_t i = 0; i < x.items.size(); ++i) {
      if (!member(x.items[i], s.items[0]) || !member(x.values[i], s.items[1])) {
        return false;
      }
    }
    if (c == "-->") {
      const Value & dom = s.items[0];
      if (!dom.is_finite_set()) {
        throw EvalError("E_INFINITE_DOMAIN", "total function over an infinite domain");
      }
      return dom.size() == x.items.size();
    }
    return true;
  }
  throw EvalError("E_EVAL", "unknown set constructor " + c);
}

Value override_with(const Value & f, const Value & g)
{
  auto as_map = [](const Value & v) -> const Value & {
    if (v.kind == Value::Kind::Map || (v.kind == Value::Kind::Set && v.items.empty())) {
      return v;
    }
    throw EvalError("E_EVAL", "override of a non-function: " + v.to_string());
  };
  const Value & a = as_map(f);
  const Value & b = as_map(g);
  std::vector<Value> keys = b.items;
  std::vector<Value> vals = b.values;
  for (size_t i = 0; i < a.items.size(); ++i) {
    if (!b.lookup(a.items[i])) {
      keys.push_back(a.items[i]);
      vals.push_back(a.values[i]);
    }
  }
  return Value::make_map(std::move(keys), std::move(vals));
}

}  // namespace lb::sim
