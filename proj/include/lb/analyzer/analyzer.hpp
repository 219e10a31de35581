// lb/analyzer/analyzer.hpp - LB well-formedness, locality and event-shape rules
//
// The analyzer turns a parsed context/machine pair into an AnalyzedProgram:
// the process classes with their local constants, local variables, control
// states and the events observable in each state. Every rule violation is
// reported with a stable diagnostic code; analysis is all-or-nothing.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lb/core/ast.hpp"
#include "lb/core/diagnostic.hpp"

namespace lb::analyzer
{

/// Constants of the communication layer. Their axioms are opaque; the
/// simulator implements their meaning natively.
inline const std::vector<Ident> kCommunicationConstants{
  "Channels", "emptyChannel", "send", "receive", "lose", "sent", "received", "inChannel"};

/// Names usable as typing domains without declaration.
inline const std::set<Ident> kBuiltinSets{"NAT", "NAT1", "INT", "BOOL"};

inline constexpr const char * kDoneState = "done";

struct ClassPartition
{
  std::vector<Ident> names;                    // partition order
  std::map<Ident, std::vector<Ident>> members; // classes with an enumerating axiom only
};

/// Reads the `Nodes` axiom and the optional per-class member enumerations.
/// Errors: E_MISSING_NODES_AXIOM, E_MALFORMED_PARTITION.
Result<ClassPartition> extract_classes(const ContextModel & ctx);

struct LocalConstants
{
  std::vector<Ident> constants;  // network first (when local), then declaration order
  std::vector<Ident> enum_sets;  // enumerated sets annotated for the class

  std::vector<Ident> all() const;
};

/// LC(class): constants typed `class --> T` or `Nodes --> T`, constants whose
/// typing axiom is annotated with the class, and annotated enumerated sets.
LocalConstants compute_local_constants(const ContextModel & ctx, const Ident & cls);

/// LV(class): variables typed `class --> T` or `Nodes --> T` by their
/// `<var>_typing` invariant. Fails with E_UNTYPED_VARIABLE.
Result<std::vector<Ident>> compute_local_variables(const MachineModel & mch, const Ident & cls);

struct MatchGuard
{
  Ident param;
  ExprPtr pattern;
};

struct EventInfo
{
  EventDecl decl;  // enumerated-set elements already resolved
  EventKind kind = EventKind::Internal;
  Ident process_class;
  Ident proc_param;
  Ident state;                                     // from the pc(proc) = st guard
  std::vector<std::pair<Ident, ExprPtr>> param_domains;  // typing domain per non-process parameter
  std::vector<ExprPtr> conditions;                 // guards other than typing/pc, declaration order
  std::vector<ExprPtr> general_guards;
  std::vector<ExprPtr> history_guards;             // top-level sent/received comparisons
  std::vector<MatchGuard> match_guards;            // receive events only
  // Receive events: the message and source patterns the handler matches.
  ExprPtr receive_message;
  ExprPtr receive_source;

  std::vector<Ident> extra_params() const;
  const ChannelAssign * channel_action() const;
};

struct InitialValue
{
  Ident var;
  Ident binder;
  ExprPtr expr;
};

struct ProcessClassInfo
{
  Ident name;
  std::vector<Ident> explicit_members;
  bool enumerated = false;  // an axiom lists the members
  LocalConstants local_constants;
  std::vector<Ident> local_variables;
  std::vector<Ident> states;  // StatesSet(class) in States-axiom order, then done
  std::map<Ident, std::vector<EventInfo>> events_by_state;
  std::vector<InitialValue> initial_values;  // one per local variable, LV order

  /// Events of a state in machine declaration order (empty when none).
  const std::vector<EventInfo> & events_in(const Ident & state) const;
  bool is_local_function(const Ident & name) const;
};

struct TopologyEntry
{
  Ident cls;
  Ident binder;
  ExprPtr neighbors;
};

struct EnumSet
{
  Ident set;
  std::vector<Ident> elems;
  std::vector<Ident> annotations;
};

/// A `cst_value` axiom: either per-class comprehensions or a plain value.
struct ConstantDef
{
  Ident constant;
  std::vector<TopologyEntry> per_class;
  ExprPtr scalar;
};

struct Hole
{
  enum class Kind { ClassSize, Constant };
  Kind kind;
  Ident name;  // NQ for class sizes, the constant otherwise
  Ident cls;   // class for ClassSize holes

  std::string marker() const { return "#" + name + " - to be configured"; }
};

struct AnalyzedProgram
{
  ContextModel context;
  MachineModel machine;  // enumerated-set elements resolved
  std::vector<ProcessClassInfo> classes;
  std::vector<TopologyEntry> topology;
  std::vector<EnumSet> enums;
  std::vector<Ident> states;  // States partition order
  std::vector<Ident> unbound_constants;
  std::vector<Ident> typed_constants;  // constants with a `_typing` axiom except network
  std::vector<ConstantDef> constant_defs;
  std::map<Ident, ExprPtr> constant_types;
  std::map<Ident, ExprPtr> variable_types;

  const ProcessClassInfo * find_class(const Ident & name) const;
  const ProcessClassInfo * class_of_member(const Ident & member) const;
  const EnumSet * enum_of_elem(const Ident & elem) const;
  const ConstantDef * find_constant_def(const Ident & name) const;
  bool is_state(const Ident & name) const;
  bool is_class(const Ident & name) const;
  /// Class sizes of non-enumerated classes, then unbound constants.
  std::vector<Hole> holes() const;
};

/// Everything check_event needs to know about the surrounding program.
struct ProgramScope
{
  const ContextModel * context = nullptr;
  const MachineModel * machine = nullptr;
  std::vector<Ident> classes;
  std::map<Ident, LocalConstants> local_constants;
  std::map<Ident, std::vector<Ident>> local_variables;
  std::set<Ident> states;
  std::map<Ident, Ident> enum_elem_set;  // element -> enumerated set
  std::set<Ident> scalar_local_constants; // annotated constants that are not functions

  bool is_local_function(const Ident & cls, const Ident & name) const;
};

/// Builds the scope from the structural parts of the model. Diagnostics
/// for the context/machine structure go to `diags`.
ProgramScope build_scope(const ContextModel & ctx, const MachineModel & mch, Diagnostics & diags);

/// Rewrites free occurrences of enumerated-set elements into EnumElem nodes.
ExprPtr resolve_enums(const ExprPtr & e, const std::map<Ident, Ident> & elem_set,
                      const std::set<Ident> & shadowed = {});

/// Verifies one event against every LB event rule.
Result<EventInfo> check_event(const EventDecl & e, const ProgramScope & scope);

/// Whole-program analysis.
Result<AnalyzedProgram> analyze(const ContextModel & ctx, const MachineModel & mch);

/// Convenience: parse both files' contents and analyze.
Result<AnalyzedProgram> analyze_sources(std::string_view ctx_text, const std::string & ctx_file,
                                        std::string_view mch_text, const std::string & mch_file);

}  // namespace lb::analyzer
