// lb/sim/sim.cpp
#include "lb/sim/sim.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <random>
#include <unordered_set>

namespace lb::sim
{

using analyzer::AnalyzedProgram;
using analyzer::EventInfo;

const char * to_string(Outcome o)
{
  switch (o) {
    case Outcome::Terminated: return "Terminated";
    case Outcome::StepLimit: return "StepLimit";
    case Outcome::InvariantViolation: return "InvariantViolation";
  }
  return "?";
}

const Value & SimState::var_at(const Ident & var, const Value & proc) const
{
  auto it = vars.find(var);
  const Value * v = it == vars.end() ? nullptr : it->second.lookup(proc);
  if (!v) {
    throw EvalError("E_EVAL", "no value of '" + var + "' at " + proc.to_string());
  }
  return *v;
}

std::string SimState::fingerprint() const
{
  std::string out;
  for (const auto & [k, v] : vars) {
    out += k + "=" + v.to_string() + ";";
  }
  for (const auto & [k, c] : channels) {
    out += "[" + k.src.to_string() + "," + k.dst.to_string() + "," + k.msg.to_string() + "]" +
           std::to_string(c.sent) + "/" + std::to_string(c.in_channel) + "/" +
           std::to_string(c.received) + ";";
  }
  return out;
}

bool all_done(const SimState & s)
{
  for (const auto & p : s.world->procs) {
    if (s.var_at("pc", p).name != analyzer::kDoneState) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Initial state

namespace
{

std::string lowercase(std::string s)
{
  for (auto & c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

bool is_infinite_domain(const ExprPtr & d, const World & w)
{
  const auto * v = d->as<Var>();
  if (!v) {
    return false;
  }
  auto it = w.names.find(v->name);
  return it != w.names.end() && it->second.is(Value::Kind::Type);
}

}  // namespace

Result<SimState> init_state(const AnalyzedProgram & prog, const SimConfig & cfg)
{
  auto world = std::make_shared<World>();
  World & w = *world;
  w.prog = &prog;
  Diagnostics diags;
  const SourceSpan no_span{};

  // processes
  std::vector<std::string> missing;
  for (const auto & c : prog.classes) {
    std::vector<Ident> members;
    auto size = cfg.class_sizes.find(c.name);
    if (c.enumerated) {
      members = c.explicit_members;
      if (size != cfg.class_sizes.end() && size->second != static_cast<long long>(members.size())) {
        diags.push_back(make_error("E_BAD_CONFIG",
                                   "size." + c.name + " contradicts the " +
                                     std::to_string(members.size()) + " enumerated members",
                                   no_span));
      }
    } else if (size == cfg.class_sizes.end()) {
      missing.push_back("N" + c.name);
    } else {
      for (long long i = 1; i <= size->second; ++i) {
        members.push_back(lowercase(c.name) + std::to_string(i));
      }
    }
    std::vector<Value> set;
    for (const auto & m : members) {
      Value p = Value::proc(m);
      if (w.class_of.count(p)) {
        diags.push_back(make_error("E_BAD_CONFIG", "duplicate process name '" + m + "'", no_span));
      }
      w.procs.push_back(p);
      w.class_of[p] = c.name;
      w.names[m] = p;
      set.push_back(p);
    }
    w.class_sets[c.name] = Value::make_set(set);
    w.names[c.name] = w.class_sets[c.name];
  }
  for (const auto & u : prog.unbound_constants) {
    if (!cfg.constant_values.count(u) && !cfg.constant_entries.count(u)) {
      missing.push_back(u);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto & m : missing) {
      list += (list.empty() ? "" : ", ") + m;
    }
    diags.push_back(make_error("E_MISSING_CONFIG", "unfilled holes: " + list, no_span));
  }
  if (has_errors(diags)) {
    return diags;
  }

  // carrier sets, states, enums and builtins
  w.names["Nodes"] = Value::make_set(w.procs);
  std::vector<Value> states;
  for (const auto & st : prog.states) {
    w.names[st] = Value::state(st);
    states.push_back(Value::state(st));
  }
  w.names["States"] = Value::make_set(states);
  for (const auto & e : prog.enums) {
    std::vector<Value> elems;
    for (const auto & el : e.elems) {
      elems.push_back(Value::enum_elem(e.set, el));
      w.names[el] = elems.back();
    }
    w.names[e.set] = Value::make_set(elems);
  }
  for (const auto & s : prog.context.sets) {
    w.names.emplace(s, Value::type("ANY"));
  }
  for (const char * b : {"NAT", "NAT1", "INT"}) {
    w.names[b] = Value::type(b);
  }
  w.names["BOOL"] = Value::make_set({Value::boolean(false), Value::boolean(true)});
  w.names["Channels"] = Value::type("ANY");

  SimState s;
  s.world = world;
  s.rng_seed = cfg.seed;

  try {
    auto per_class = [&](const std::vector<analyzer::TopologyEntry> & entries) {
      std::vector<Value> keys, vals;
      for (const auto & t : entries) {
        for (const auto & p : w.class_sets.at(t.cls).items) {
          keys.push_back(p);
          vals.push_back(eval(t.neighbors, s, {{t.binder, p}}));
        }
      }
      return Value::make_map(std::move(keys), std::move(vals));
    };
    w.constants["network"] = per_class(prog.topology);

    for (const auto & c : prog.context.constants) {
      if (const auto * def = prog.find_constant_def(c)) {
        w.constants[c] = def->scalar ? eval(def->scalar, s) : per_class(def->per_class);
      } else if (auto it = cfg.constant_values.find(c); it != cfg.constant_values.end()) {
        w.constants[c] = eval(it->second, s);
      } else if (auto jt = cfg.constant_entries.find(c); jt != cfg.constant_entries.end()) {
        std::vector<Value> keys, vals;
        for (const auto & [proc, expr] : jt->second) {
          auto p = w.names.find(proc);
          if (p == w.names.end() || !p->second.is(Value::Kind::Proc)) {
            diags.push_back(make_error("E_BAD_CONFIG",
                                       "'" + c + "." + proc + "': '" + proc + "' is not a process",
                                       expr->span));
            continue;
          }
          keys.push_back(p->second);
          vals.push_back(eval(expr, s));
        }
        w.constants[c] = Value::make_map(std::move(keys), std::move(vals));
      }
    }
    for (const auto & [name, _] : cfg.constant_values) {
      if (!std::count(prog.unbound_constants.begin(), prog.unbound_constants.end(), name)) {
        diags.push_back(make_warning("W_UNKNOWN_CONFIG_KEY",
                                     "'" + name + "' is not an unbound constant; ignored", no_span));
      }
    }
    for (const auto & [name, _] : cfg.constant_entries) {
      if (!std::count(prog.unbound_constants.begin(), prog.unbound_constants.end(), name)) {
        diags.push_back(make_warning("W_UNKNOWN_CONFIG_KEY",
                                     "'" + name + "' is not an unbound constant; ignored", no_span));
      }
    }
    for (const auto & c : prog.typed_constants) {
      auto it = w.constants.find(c);
      if (it != w.constants.end() && !member(it->second, eval(prog.constant_types.at(c), s))) {
        diags.push_back(make_error("E_EVAL",
                                   "value " + it->second.to_string() + " of '" + c +
                                     "' violates its typing axiom",
                                   no_span));
      }
    }

    // local variables
    std::map<Ident, std::pair<std::vector<Value>, std::vector<Value>>> vars;
    for (const auto & ci : prog.classes) {
      for (const auto & iv : ci.initial_values) {
        auto & [keys, vals] = vars[iv.var];
        for (const auto & p : w.class_sets.at(ci.name).items) {
          keys.push_back(p);
          vals.push_back(eval(iv.expr, s, {{iv.binder, p}}));
        }
      }
    }
    for (auto & [v, kv] : vars) {
      s.vars[v] = Value::make_map(std::move(kv.first), std::move(kv.second));
    }
    if (!s.vars.count("pc")) {
      s.vars["pc"] = Value::empty_set();
    }

    for (const auto & ci : prog.classes) {
      for (const auto & [st, events] : ci.events_by_state) {
        for (const auto & ev : events) {
          if (ev.kind == EventKind::Receive) {
            continue;
          }
          for (const auto & [p, d] : ev.param_domains) {
            if (is_infinite_domain(d, w)) {
              diags.push_back(make_error("E_INFINITE_DOMAIN",
                                         "parameter '" + p + "' of event '" + ev.decl.name +
                                           "' ranges over the infinite set '" + to_source(d) + "'",
                                         ev.decl.span));
            }
          }
        }
      }
    }
  } catch (const EvalError & ex) {
    diags.push_back(make_error(ex.code(), ex.what(), ex.span()));
  }
  if (has_errors(diags)) {
    return diags;
  }
  return Result<SimState>(std::move(s), std::move(diags));
}

// ---------------------------------------------------------------------------
// Enabling

namespace
{

/// Matches a receive pattern against a value, binding free parameters.
bool match(const ExprPtr & pat, const Value & v, Binding & env, const std::set<Ident> & params,
           const SimState & s)
{
  if (const auto * var = pat->as<Var>(); var && params.count(var->name)) {
    auto it = env.find(var->name);
    if (it == env.end()) {
      env[var->name] = v;
      return true;
    }
    return it->second == v;
  }
  if (const auto * m = pat->as<Maplet>()) {
    if (!v.is(Value::Kind::Tuple) || v.items.size() != 2) {
      return false;
    }
    return match(m->left, v.items[0], env, params, s) &&
           match(m->right, v.items[1], env, params, s);
  }
  return eval(pat, s, env) == v;
}

void enumerate(const SimState & s, const EventInfo & ev, const Value & proc, size_t i, Binding & env,
               std::vector<Choice> & out)
{
  if (i == ev.param_domains.size()) {
    for (const auto & g : ev.conditions) {
      if (!eval(g, s, env).as_bool()) {
        return;
      }
    }
    Binding params = env;
    params.erase(ev.proc_param);
    out.push_back(Choice{&ev, proc, std::move(params), std::nullopt});
    return;
  }
  const auto & [name, dom] = ev.param_domains[i];
  const Value d = eval(dom, s, env);
  if (!d.is_finite_set()) {
    throw EvalError("E_INFINITE_DOMAIN",
                    "parameter '" + name + "' of event '" + ev.decl.name + "' has no finite domain",
                    ev.decl.span);
  }
  for (const auto & x : d.elements()) {
    env[name] = x;
    enumerate(s, ev, proc, i + 1, env, out);
  }
  env.erase(name);
}

void enumerate_receive(const SimState & s, const EventInfo & ev, const Value & proc,
                       std::vector<Choice> & out)
{
  const ChannelAssign * act = ev.channel_action();
  std::set<Ident> params;
  for (const auto & p : ev.decl.params) {
    if (p.name != ev.proc_param) {
      params.insert(p.name);
    }
  }
  for (const auto & [key, counters] : s.channels) {
    if (counters.in_channel <= 0 || key.dst != proc) {
      continue;
    }
    Binding env{{ev.proc_param, proc}};
    if (!match(act->src, key.src, env, params, s) || !match(act->msg, key.msg, env, params, s)) {
      continue;
    }
    bool ok = true;
    for (const auto & m : ev.match_guards) {
      auto it = env.find(m.param);
      if (it == env.end() || !match(m.pattern, Value(it->second), env, params, s)) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      continue;
    }
    for (const auto & p : params) {
      if (!env.count(p)) {
        ok = false;  // a parameter the message does not determine
      }
    }
    for (const auto & [p, d] : ev.param_domains) {
      if (ok && !member(env.at(p), eval(d, s, env))) {
        ok = false;
      }
    }
    if (ok) {
      for (const auto & g : ev.conditions) {
        if (!eval(g, s, env).as_bool()) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      env.erase(ev.proc_param);
      out.push_back(Choice{&ev, proc, std::move(env), std::nullopt});
    }
  }
}

}  // namespace

std::vector<Choice> enabled_events(const SimState & s)
{
  std::vector<Choice> out;
  const AnalyzedProgram & prog = *s.world->prog;
  for (const auto & proc : s.world->procs) {
    const auto * ci = prog.find_class(s.world->class_of.at(proc));
    const Ident & st = s.var_at("pc", proc).name;
    for (const auto & ev : ci->events_in(st)) {
      if (ev.kind == EventKind::Receive) {
        enumerate_receive(s, ev, proc, out);
      } else {
        Binding env{{ev.proc_param, proc}};
        enumerate(s, ev, proc, 0, env, out);
      }
    }
  }
  return out;
}

std::vector<Choice> lose_choices(const SimState & s)
{
  std::vector<Choice> out;
  for (const auto & [key, c] : s.channels) {
    if (c.in_channel > 0) {
      out.push_back(Choice{nullptr, key.src, {}, key});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Firing

SimState fire_event(const SimState & s, const Choice & c, TraceEvent * trace)
{
  SimState next = s;
  ++next.step_count;
  TraceEvent te;
  te.step = next.step_count;
  te.proc = c.proc.name;

  if (!c.event) {
    auto & counters = next.channels[*c.lost];
    if (--counters.in_channel < 0) {
      throw EvalError("E_NEGATIVE_COUNTER", "lose on an empty channel");
    }
    te.event = "lose";
    te.channel = TraceEvent::Delta{ChannelKind::Lose, c.lost->src, c.lost->dst, c.lost->msg};
    if (trace) {
      *trace = std::move(te);
    }
    return next;
  }

  const EventInfo & ev = *c.event;
  Binding env = c.params;
  env[ev.proc_param] = c.proc;
  te.event = ev.decl.name;
  te.params = c.params;

  // evaluate every right-hand side in the pre-state
  std::vector<std::pair<Ident, Value>> writes;
  std::optional<std::pair<ChannelKind, ChannelKey>> channel;
  for (const auto & a : ev.decl.actions) {
    if (const auto * la = std::get_if<LocalAssign>(&a.body)) {
      writes.emplace_back(la->var, eval(la->rhs, s, env));
    } else if (const auto * ca = std::get_if<ChannelAssign>(&a.body)) {
      channel.emplace(ca->kind,
                      ChannelKey{eval(ca->src, s, env), eval(ca->dst, s, env), eval(ca->msg, s, env)});
    }
  }
  for (auto & [var, v] : writes) {
    next.vars[var] = override_with(next.vars[var], Value::make_map({c.proc}, {std::move(v)}));
  }
  if (channel) {
    auto & counters = next.channels[channel->second];
    if (channel->first == ChannelKind::Send) {
      ++counters.sent;
      ++counters.in_channel;
    } else {
      if (--counters.in_channel < 0) {
        throw EvalError("E_NEGATIVE_COUNTER",
                        "receive of a message not in transit in event '" + ev.decl.name + "'");
      }
      ++counters.received;
    }
    te.channel = TraceEvent::Delta{channel->first, channel->second.src, channel->second.dst,
                                   channel->second.msg};
  }
  if (trace) {
    *trace = std::move(te);
  }
  return next;
}

// ---------------------------------------------------------------------------
// Monitoring

std::vector<std::string> check_invariants(const SimState & s)
{
  std::vector<std::string> out;
  const AnalyzedProgram & prog = *s.world->prog;
  for (const auto & inv : prog.machine.invariants) {
    if (free_vars(*inv.expr).count("channels")) {
      continue;  // channel typing is enforced by check_conservation
    }
    if (!eval(inv.expr, s).as_bool()) {
      out.push_back(inv.label);
    }
  }
  for (const auto & p : s.world->procs) {
    const auto * ci = prog.find_class(s.world->class_of.at(p));
    const Value & pc = s.var_at("pc", p);
    if (!pc.is(Value::Kind::State) ||
        std::find(ci->states.begin(), ci->states.end(), pc.name) == ci->states.end()) {
      out.push_back("pc_statesset");
      break;
    }
  }
  return out;
}

std::vector<std::string> check_conservation(const SimState & s, bool lossy)
{
  std::vector<std::string> out;
  for (const auto & [k, c] : s.channels) {
    const bool negative = c.sent < 0 || c.in_channel < 0 || c.received < 0;
    const bool balanced = lossy ? c.sent >= c.in_channel + c.received
                                : c.sent == c.in_channel + c.received;
    if (negative || !balanced) {
      out.push_back("conservation(" + k.src.to_string() + ", " + k.dst.to_string() + ", " +
                    k.msg.to_string() + ")");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Runs

RunResult run_from(SimState s, const SimConfig & cfg)
{
  RunResult r;
  std::mt19937_64 rng(cfg.seed);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto monitor = [&](const SimState & st) {
    auto v = check_invariants(st);
    auto c = check_conservation(st, cfg.lossy);
    v.insert(v.end(), c.begin(), c.end());
    return v;
  };
  try {
    r.violations = monitor(s);
    if (!r.violations.empty()) {
      r.outcome = Outcome::InvariantViolation;
      r.final_state = std::move(s);
      return r;
    }
    while (true) {
      const auto enabled = enabled_events(s);
      if (enabled.empty() && all_done(s)) {
        r.outcome = Outcome::Terminated;
        break;
      }
      if (s.step_count >= cfg.max_steps) {
        r.outcome = Outcome::StepLimit;
        break;
      }
      const auto losses = cfg.lossy ? lose_choices(s) : std::vector<Choice>{};
      if (enabled.empty() && losses.empty()) {
        r.outcome = Outcome::StepLimit;
        r.deadlock = true;
        break;
      }
      const bool lose = !losses.empty() && (enabled.empty() || unit() < cfg.loss_prob);
      const auto & pool = lose ? losses : enabled;
      const Choice & c = pool[rng() % pool.size()];
      TraceEvent te;
      s = fire_event(s, c, &te);
      r.trace.push_back(std::move(te));
      r.violations = monitor(s);
      if (!r.violations.empty()) {
        r.outcome = Outcome::InvariantViolation;
        break;
      }
    }
  } catch (const EvalError & ex) {
    r.outcome = Outcome::InvariantViolation;
    r.violations.push_back(ex.code() + ": " + ex.what());
  }
  r.final_state = std::move(s);
  return r;
}

RunResult run(const AnalyzedProgram & prog, const SimConfig & cfg)
{
  auto init = init_state(prog, cfg);
  if (!init) {
    RunResult r;
    r.outcome = Outcome::InvariantViolation;
    for (const auto & d : init.diagnostics()) {
      r.violations.push_back(d.code + ": " + d.message);
    }
    return r;
  }
  return run_from(init.value(), cfg);
}

ExploreResult explore(const SimState & init, std::size_t max_states)
{
  ExploreResult out;
  std::unordered_set<std::string> seen{init.fingerprint()};
  std::unordered_set<std::string> terminal_seen;
  std::deque<SimState> queue{init};
  while (!queue.empty()) {
    SimState s = std::move(queue.front());
    queue.pop_front();
    ++out.states;
    const auto enabled = enabled_events(s);
    if (enabled.empty()) {
      s.step_count = 0;
      if (terminal_seen.insert(s.fingerprint()).second) {
        out.terminal.push_back(std::move(s));
      }
      continue;
    }
    for (const auto & c : enabled) {
      SimState n = fire_event(s, c);
      if (seen.insert(n.fingerprint()).second) {
        if (seen.size() > max_states) {
          out.complete = false;
          return out;
        }
        queue.push_back(std::move(n));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json state_to_json(const SimState & s)
{
  nlohmann::json vars = nlohmann::json::object();
  for (const auto & [name, v] : s.vars) {
    nlohmann::json per = nlohmann::json::object();
    for (size_t i = 0; i < v.items.size() && i < v.values.size(); ++i) {
      per[v.items[i].to_string()] = v.values[i].to_string();
    }
    vars[name] = std::move(per);
  }
  nlohmann::json channels = nlohmann::json::array();
  for (const auto & [k, c] : s.channels) {
    channels.push_back({{"src", k.src.to_string()},
                        {"dst", k.dst.to_string()},
                        {"msg", k.msg.to_string()},
                        {"sent", c.sent},
                        {"in_channel", c.in_channel},
                        {"received", c.received}});
  }
  return {{"vars", std::move(vars)}, {"channels", std::move(channels)}};
}

nlohmann::json trace_to_json(const RunResult & r, const SimConfig & cfg)
{
  nlohmann::json trace = nlohmann::json::array();
  for (const auto & t : r.trace) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto & [k, v] : t.params) {
      params[k] = v.to_string();
    }
    nlohmann::json channel = nullptr;
    if (t.channel) {
      channel = {{"kind", to_string(t.channel->kind)},
                 {"src", t.channel->src.to_string()},
                 {"dst", t.channel->dst.to_string()},
                 {"msg", t.channel->msg.to_string()}};
    }
    trace.push_back({{"step", t.step},
                     {"event", t.event},
                     {"proc", t.proc},
                     {"params", std::move(params)},
                     {"channel", std::move(channel)}});
  }
  nlohmann::json out = {{"outcome", to_string(r.outcome)},
                        {"seed", cfg.seed},
                        {"lossy", cfg.lossy},
                        {"loss_prob", cfg.loss_prob},
                        {"steps", r.trace.size()},
                        {"deadlock", r.deadlock},
                        {"violations", r.violations},
                        {"trace", std::move(trace)}};
  if (r.final_state.world) {
    out["final_state"] = state_to_json(r.final_state);
  }
  return out;
}

}  // namespace lb::sim
