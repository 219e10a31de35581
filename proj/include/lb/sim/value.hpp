// lb/sim/value.hpp - runtime values of the LB simulator
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "lb/core/ast.hpp"
#include "lb/core/diagnostic.hpp"

namespace lb::sim
{

/// Evaluation failure with a stable diagnostic code.
class EvalError : public std::runtime_error
{
public:
  EvalError(std::string code, const std::string & what, SourceSpan span = {})
  : std::runtime_error(what), code_(std::move(code)), span_(std::move(span))
  {
  }
  const std::string & code() const { return code_; }
  const SourceSpan & span() const { return span_; }

private:
  std::string code_;
  SourceSpan span_;
};

/// Immutable-by-convention value. Sets are kept sorted and duplicate free;
/// a non-empty set of pairs with distinct first components is stored as a
/// Map, and an empty Map is stored as the empty Set, so equal values always
/// have equal representations.
struct Value
{
  enum class Kind : unsigned char { Int, Bool, Proc, Enum, State, Tuple, Set, Map, Type };

  Kind kind = Kind::Int;
  long long num = 0;         // Int, Bool
  Ident name;                // Proc, Enum element, State, Type constructor
  Ident set;                 // Enum: the enumerated set
  std::vector<Value> items;  // Tuple elements, Set elements, Map keys, Type operands
  std::vector<Value> values; // Map values, parallel to items

  static Value integer(long long v);
  static Value boolean(bool v);
  static Value proc(Ident n);
  static Value enum_elem(Ident set, Ident elem);
  static Value state(Ident n);
  static Value tuple(std::vector<Value> elems);
  static Value pair(Value a, Value b);
  static Value make_set(std::vector<Value> elems);
  static Value make_map(std::vector<Value> keys, std::vector<Value> vals);
  static Value empty_set();
  /// Symbolic set: NAT, NAT1, INT, ANY, or a constructor (-->, +->, POW, **)
  /// applied to operand sets.
  static Value type(Ident ctor, std::vector<Value> operands = {});

  bool is(Kind k) const { return kind == k; }
  bool is_finite_set() const { return kind == Kind::Set || kind == Kind::Map; }
  bool as_bool() const;
  long long as_int() const;

  /// Elements of a finite set; a Map yields its pairs.
  std::vector<Value> elements() const;
  size_t size() const;

  /// Map lookup; nullptr when absent.
  const Value * lookup(const Value & key) const;

  int compare(const Value & o) const;
  friend bool operator==(const Value & a, const Value & b) { return a.compare(b) == 0; }
  friend bool operator!=(const Value & a, const Value & b) { return a.compare(b) != 0; }
  friend bool operator<(const Value & a, const Value & b) { return a.compare(b) < 0; }

  /// LB-like rendering: `{q1 |-> 5}`, `answer |-> 7`, `TRUE`.
  std::string to_string() const;
};

/// x in s for finite and symbolic sets.
bool member(const Value & x, const Value & s);

/// Functional update: f <+ g (either may be the empty set).
Value override_with(const Value & f, const Value & g);

}  // namespace lb::sim
