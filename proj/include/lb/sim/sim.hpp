// lb/sim/sim.hpp - direct execution of analyzed LB models
//
// Each process runs the events of its class; the distributed system is the
// interleaving of those events, picked by a seeded scheduler. Channels are
// (sent, in_channel, received) counters per (source, destination, message).
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "lb/analyzer/analyzer.hpp"
#include "lb/sim/value.hpp"

namespace lb::sim
{

struct SimConfig
{
  std::map<Ident, long long> class_sizes;
  std::map<Ident, ExprPtr> constant_values;                   // `name = expr`
  std::map<Ident, std::map<Ident, ExprPtr>> constant_entries; // `name.proc = expr`
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 10000;
  bool lossy = false;
  double loss_prob = 0.0;
};

struct ChannelKey
{
  Value src;
  Value dst;
  Value msg;

  friend bool operator<(const ChannelKey & a, const ChannelKey & b)
  {
    if (int c = a.src.compare(b.src)) {
      return c < 0;
    }
    if (int c = a.dst.compare(b.dst)) {
      return c < 0;
    }
    return a.msg < b.msg;
  }
  friend bool operator==(const ChannelKey & a, const ChannelKey & b)
  {
    return a.src == b.src && a.dst == b.dst && a.msg == b.msg;
  }
};

struct ChannelCounters
{
  long long sent = 0;
  long long in_channel = 0;
  long long received = 0;

  friend bool operator==(const ChannelCounters & a, const ChannelCounters & b)
  {
    return a.sent == b.sent && a.in_channel == b.in_channel && a.received == b.received;
  }
};

/// Immutable part of an instance: processes and constant values.
struct World
{
  const analyzer::AnalyzedProgram * prog = nullptr;
  std::vector<Value> procs;                 // class order, then member order
  std::map<Value, Ident> class_of;          // proc -> class
  std::map<Ident, Value> class_sets;        // class -> set of procs
  std::map<Ident, Value> constants;  // declared constants with a value
  std::map<Ident, Value> names;      // procs, states, classes, carrier and builtin sets
};

struct SimState
{
  std::shared_ptr<const World> world;
  std::map<Ident, Value> vars;  // local variable -> map proc -> value
  std::map<ChannelKey, ChannelCounters> channels;
  std::uint64_t step_count = 0;
  std::uint64_t rng_seed = 0;

  const Value & var_at(const Ident & var, const Value & proc) const;
  /// Canonical text of vars and channels, for state hashing and comparison.
  std::string fingerprint() const;
};

using Binding = std::map<Ident, Value>;

struct Choice
{
  const analyzer::EventInfo * event = nullptr;  // null for a lose step
  Value proc;
  Binding params;
  std::optional<ChannelKey> lost;  // lose steps only
};

struct TraceEvent
{
  std::uint64_t step = 0;
  Ident event;
  Ident proc;
  Binding params;
  struct Delta
  {
    ChannelKind kind;
    Value src;
    Value dst;
    Value msg;
  };
  std::optional<Delta> channel;
};

enum class Outcome { Terminated, StepLimit, InvariantViolation };
const char * to_string(Outcome o);

struct RunResult
{
  Outcome outcome = Outcome::StepLimit;
  std::vector<TraceEvent> trace;
  SimState final_state;
  std::vector<std::string> violations;  // invariant labels or conservation failures
  bool deadlock = false;                // stopped with nothing enabled before all reached done
};

/// Builds the processes, constants and the initial state.
/// Errors: E_MISSING_CONFIG, E_INFINITE_DOMAIN, E_EVAL.
Result<SimState> init_state(const analyzer::AnalyzedProgram & prog, const SimConfig & cfg);

/// Every (event, proc, binding) whose guards hold in `s`, in process,
/// event-declaration and binding order.
std::vector<Choice> enabled_events(const SimState & s);

/// Lose choices: one per channel key with a message in transit.
std::vector<Choice> lose_choices(const SimState & s);

/// Applies a choice. Actions read the pre-state. Throws EvalError with
/// E_NEGATIVE_COUNTER on a counter underflow.
SimState fire_event(const SimState & s, const Choice & c, TraceEvent * out = nullptr);

/// Labels of violated machine invariants, plus `pc_statesset` when a
/// process is in a state foreign to its class.
std::vector<std::string> check_invariants(const SimState & s);

/// Channel conservation: sent = in_channel + received (reliable) or
/// sent >= in_channel + received (lossy), all counters non-negative.
std::vector<std::string> check_conservation(const SimState & s, bool lossy);

RunResult run(const analyzer::AnalyzedProgram & prog, const SimConfig & cfg);
/// Runs from an already initialised state.
RunResult run_from(SimState s, const SimConfig & cfg);

bool all_done(const SimState & s);

struct ExploreResult
{
  std::size_t states = 0;
  std::vector<SimState> terminal;  // distinct states with no enabled event
  bool complete = true;            // false when the state bound was hit
};

/// Exhaustive reliable-channel exploration of all interleavings.
ExploreResult explore(const SimState & init, std::size_t max_states = 100000);

/// Evaluates an expression in a state with local bindings.
Value eval(const ExprPtr & e, const SimState & s, const Binding & env = {});

nlohmann::json state_to_json(const SimState & s);
nlohmann::json trace_to_json(const RunResult & r, const SimConfig & cfg);

}  // namespace lb::sim
