#include "doctest.h"
#include "lb/analyzer/analyzer.hpp"
#include "lb/parser/parser.hpp"
#include "support.hpp"

#include <algorithm>
#include <random>

using namespace lb;
using namespace lb::analyzer;

namespace
{

std::string replaced(std::string text, const std::string & from, const std::string & to)
{
  const auto pos = text.find(from);
  REQUIRE_MESSAGE(pos != std::string::npos, from);
  text.replace(pos, from.size(), to);
  return text;
}

ContextModel parse_ctx(const std::string & text)
{
  auto r = parser::parse_context(text);
  REQUIRE_MESSAGE(r.ok(), format_diagnostic(r.diagnostics().front()));
  return r.value();
}

MachineModel parse_mch(const std::string & text)
{
  auto r = parser::parse_machine(text);
  REQUIRE_MESSAGE(r.ok(), format_diagnostic(r.diagnostics().front()));
  return r.value();
}

std::vector<std::string> error_codes(const Diagnostics & ds)
{
  std::vector<std::string> out;
  for (const auto & d : ds) {
    if (d.severity == Severity::Error) {
      out.push_back(d.code);
    }
  }
  return out;
}

std::vector<std::string> codes_for_machine(const std::string & mch)
{
  auto r = test::analyze_fixture(mch);
  return r.ok() ? std::vector<std::string>{} : error_codes(r.diagnostics());
}

std::vector<std::string> codes_for_context(const std::string & ctx)
{
  auto r = analyze_sources(ctx, "c.lbc", test::fixture_machine_text(), "m.lbm");
  return r.ok() ? std::vector<std::string>{} : error_codes(r.diagnostics());
}

bool has_code(const std::vector<std::string> & cs, const std::string & c)
{
  return std::find(cs.begin(), cs.end(), c) != cs.end();
}

const EventInfo & event_info(const AnalyzedProgram & prog, const std::string & name)
{
  for (const auto & c : prog.classes) {
    for (const auto & [st, evs] : c.events_by_state) {
      for (const auto & e : evs) {
        if (e.decl.name == name) {
          return e;
        }
      }
    }
  }
  FAIL("no event " << name);
  throw;
}

bool is_membership_in(const ExprPtr & g, const Ident & x)
{
  const auto * b = g->as<Binary>();
  const auto * v = b && b->op == BinOp::In ? b->lhs->as<Var>() : nullptr;
  return v && v->name == x;
}

/// Independent restatement of the LB event rules over the raw declaration.
bool satisfies_event_rules(const AnalyzedProgram & prog, const ProcessClassInfo & cls,
                           const EventInfo & ev)
{
  const EventDecl & d = ev.decl;
  if (d.params.empty()) {
    return false;
  }
  const Ident proc = ev.proc_param;
  bool proc_typed = false;
  int pc_guards = 0;
  for (const auto & g : d.guards) {
    const auto * b = g.expr->as<Binary>();
    if (is_membership_in(g.expr, proc) && b->rhs->is<Var>() &&
        b->rhs->as<Var>()->name == cls.name) {
      proc_typed = true;
    }
    if (b && b->op == BinOp::Eq) {
      const auto * ap = b->lhs->as<Apply>();
      if (ap && ap->fn->is<Var>() && ap->fn->as<Var>()->name == "pc" && ap->arg->is<Var>() &&
          ap->arg->as<Var>()->name == proc) {
        ++pc_guards;
      }
    }
  }
  if (!proc_typed || pc_guards != 1) {
    return false;
  }
  for (const auto & p : d.params) {
    const auto n = std::count_if(d.guards.begin(), d.guards.end(),
                                 [&](const LabeledExpr & g) { return is_membership_in(g.expr, p.name); });
    if (n < 1) {
      return false;
    }
  }
  int channel_actions = 0;
  for (const auto & a : d.actions) {
    if (const auto * la = std::get_if<LocalAssign>(&a.body)) {
      if (la->proc != proc) {
        return false;
      }
      if (std::find(cls.local_variables.begin(), cls.local_variables.end(), la->var) ==
          cls.local_variables.end()) {
        return false;
      }
    } else if (const auto * ca = std::get_if<ChannelAssign>(&a.body)) {
      ++channel_actions;
      const ExprPtr & own = ca->kind == ChannelKind::Send ? ca->src : ca->dst;
      if (!own->is<Var>() || own->as<Var>()->name != proc) {
        return false;
      }
    } else {
      return false;
    }
  }
  if (channel_actions > 1) {
    return false;
  }
  if (ev.kind == EventKind::Receive && !ev.general_guards.empty()) {
    return false;
  }
  (void)prog;
  return true;
}

/// Names an event may mention: LC, LV, parameters, enum elements, states and
/// the carrier sets used by typing guards.
std::set<Ident> allowed_names(const AnalyzedProgram & prog, const ProcessClassInfo & cls,
                              const EventInfo & ev)
{
  std::set<Ident> ok;
  for (const auto & c : cls.local_constants.all()) {
    ok.insert(c);
  }
  ok.insert(cls.local_variables.begin(), cls.local_variables.end());
  for (const auto & p : ev.decl.params) {
    ok.insert(p.name);
  }
  ok.insert(prog.states.begin(), prog.states.end());
  return ok;
}

}  // namespace

TEST_CASE("extract_classes on the fixture")
{
  auto r = extract_classes(parse_ctx(test::fixture_context_text()));
  REQUIRE(r.ok());
  CHECK(r->names == std::vector<Ident>{"P", "Q"});
  CHECK(r->members.at("P") == std::vector<Ident>{"p"});
  CHECK(r->members.count("Q") == 0);
}

TEST_CASE("extract_classes with a single block")
{
  auto r = extract_classes(parse_ctx("CONTEXT C SETS Nodes CONSTANTS A AXIOMS @Nodes: partition(Nodes, A) END"));
  REQUIRE(r.ok());
  CHECK(r->names == std::vector<Ident>{"A"});
}

TEST_CASE("extract_classes rejects a duplicate block")
{
  auto r = extract_classes(parse_ctx("CONTEXT C SETS Nodes CONSTANTS A AXIOMS @Nodes: partition(Nodes, A, A) END"));
  REQUIRE_FALSE(r.ok());
  CHECK(r.diagnostics().front().code == "E_MALFORMED_PARTITION");
}

TEST_CASE("extract_classes needs the Nodes axiom")
{
  auto r = extract_classes(parse_ctx("CONTEXT C SETS Nodes CONSTANTS A AXIOMS END"));
  REQUIRE_FALSE(r.ok());
  CHECK(r.diagnostics().front().code == "E_MISSING_NODES_AXIOM");
}

TEST_CASE("extract_classes rejects non-singleton member blocks")
{
  auto r = extract_classes(parse_ctx(
    "CONTEXT C SETS Nodes CONSTANTS A a b AXIOMS @Nodes: partition(Nodes, A) @A: partition(A, {a, b}) END"));
  REQUIRE_FALSE(r.ok());
  CHECK(r.diagnostics().front().code == "E_MALFORMED_PARTITION");
}

TEST_CASE("local constants")
{
  const ContextModel ctx = parse_ctx(test::fixture_context_text());
  const LocalConstants q = compute_local_constants(ctx, "Q");
  CHECK(q.constants == std::vector<Ident>{"network", "availableResources"});
  CHECK(q.enum_sets == std::vector<Ident>{"MessagePrefixes"});
  const LocalConstants p = compute_local_constants(ctx, "P");
  CHECK(p.constants == std::vector<Ident>{"network"});
  CHECK(p.enum_sets == std::vector<Ident>{"MessagePrefixes"});

  const ContextModel bare = parse_ctx("CONTEXT C SETS Nodes CONSTANTS A k AXIOMS @Nodes: partition(Nodes, A) @k_typing: k in NAT END");
  CHECK(compute_local_constants(bare, "A").all().empty());
}

TEST_CASE("local variables")
{
  const MachineModel m = parse_mch(test::fixture_machine_text());
  CHECK(compute_local_variables(m, "P").value() == std::vector<Ident>{"pc", "result"});
  CHECK(compute_local_variables(m, "Q").value() == std::vector<Ident>{"pc"});
  for (const char * c : {"P", "Q"}) {
    const auto lv = compute_local_variables(m, c).value();
    CHECK(std::find(lv.begin(), lv.end(), "channels") == lv.end());
  }
}

TEST_CASE("a variable without a typing invariant")
{
  const std::string text = replaced(test::fixture_machine_text(),
                                    "  @result_typing: result in P --> (Nodes +-> NAT)\n", "");
  auto r = compute_local_variables(parse_mch(text), "P");
  REQUIRE_FALSE(r.ok());
  CHECK(r.diagnostics().front().code == "E_UNTYPED_VARIABLE");
}

TEST_CASE("check_event classifies sendRequest")
{
  const auto & info = event_info(test::fixture(), "sendRequest");
  CHECK(info.kind == EventKind::Send);
  CHECK(info.state == "sr");
  CHECK(info.process_class == "P");
  CHECK(info.proc_param == "proc");
  CHECK(info.history_guards.size() == 1);
  CHECK(info.match_guards.empty());
}

TEST_CASE("check_event on a receive event")
{
  const auto & info = event_info(test::fixture(), "receiveAnswer");
  CHECK(info.kind == EventKind::Receive);
  CHECK(info.state == "wa");
  CHECK(info.general_guards.empty());
  REQUIRE(info.match_guards.size() == 1);
  CHECK(info.match_guards[0].param == "msg");
  REQUIRE(info.receive_message);
  REQUIRE(info.receive_source);
  CHECK(to_source(info.receive_source) == "source");
}

TEST_CASE("check_event rejects assignment to another process's variable")
{
  // q is a parameter of sendRequest but not its process parameter
  const std::string bad = replaced(
    test::fixture_machine_text(), "    @act1: channels := send(channels |-> (proc |-> q) |-> request)\n",
    "    @act1: channels := send(channels |-> (proc |-> q) |-> request)\n"
    "    @act2: result(q) := {}\n");
  CHECK(codes_for_machine(bad) == std::vector<std::string>{"E_FOREIGN_ASSIGN"});
}

TEST_CASE("check_event rejects a general guard on a receive event")
{
  const std::string bad = replaced(test::fixture_machine_text(), "    @grd5: msg = request\n",
                                   "    @grd5: msg = request\n    @grd6: availableResources(proc) > 0\n");
  CHECK(codes_for_machine(bad) == std::vector<std::string>{"E_RECV_GENERAL_GUARD"});
}

TEST_CASE("check_event rejects an event without a process parameter")
{
  const std::string bad = replaced(test::fixture_machine_text(),
                                   "  any proc where\n    @grd1: proc in P\n    @grd2: pc(proc) = sr\n",
                                   "  any proc where\n    @grd1: proc in Nodes\n    @grd2: pc(proc) = sr\n");
  CHECK(has_code(codes_for_machine(bad), "E_NO_PROC_PARAM"));
}

TEST_CASE("check_event rejects two channel actions")
{
  const std::string bad = replaced(
    test::fixture_machine_text(),
    "    @act1: channels := send(channels |-> (proc |-> q) |-> request)\n",
    "    @act1: channels := send(channels |-> (proc |-> q) |-> request)\n"
    "    @act2: channels := send(channels |-> (proc |-> q) |-> answer)\n");
  const auto codes = codes_for_machine(bad);
  CHECK_FALSE(codes.empty());
  CHECK(has_code(codes, "E_MULTI_CHANNEL_ACTION"));
}

TEST_CASE("history guards beyond > 0 and = 0 are unsupported")
{
  const std::string bad = replaced(test::fixture_machine_text(),
                                   "    @grd4: sent(channels |-> (proc |-> q) |-> request) = 0\n",
                                   "    @grd4: sent(channels |-> (proc |-> q) |-> request) = 2\n");
  CHECK(codes_for_machine(bad) == std::vector<std::string>{"E_UNSUPPORTED_HISTORY"});
}

TEST_CASE("send peer orientation")
{
  const std::string bad = replaced(test::fixture_machine_text(),
                                   "    @act1: channels := send(channels |-> (proc |-> q) |-> request)\n",
                                   "    @act1: channels := send(channels |-> (q |-> proc) |-> request)\n");
  CHECK(codes_for_machine(bad) == std::vector<std::string>{"E_BAD_PEER"});
}

TEST_CASE("analyze the fixture")
{
  auto r = test::analyze_fixture(test::fixture_machine_text());
  REQUIRE(r.ok());
  CHECK(r.diagnostics().empty());
  const AnalyzedProgram & prog = r.value();
  REQUIRE(prog.classes.size() == 2);
  CHECK(prog.classes[0].name == "P");
  CHECK(prog.classes[0].states == std::vector<Ident>{"sr", "wa", "done"});
  CHECK(prog.classes[0].explicit_members == std::vector<Ident>{"p"});
  CHECK(prog.classes[1].name == "Q");
  CHECK(prog.classes[1].states == std::vector<Ident>{"wr", "done"});
  CHECK_FALSE(prog.classes[1].enumerated);
  CHECK(prog.unbound_constants == std::vector<Ident>{"availableResources"});
  const auto holes = prog.holes();
  REQUIRE(holes.size() == 2);
  CHECK(holes[0].name == "NQ");
  CHECK(holes[0].kind == Hole::Kind::ClassSize);
  CHECK(holes[1].name == "availableResources");
  CHECK(holes[0].marker() == "#NQ - to be configured");
  REQUIRE(prog.enums.size() == 1);
  CHECK(prog.enums[0].set == "MessagePrefixes");
  CHECK(prog.enums[0].elems == std::vector<Ident>{"request", "answer"});
  CHECK(prog.topology.size() == 2);
}

TEST_CASE("enum elements are resolved by analysis")
{
  const auto & info = event_info(test::fixture(), "sendRequest");
  const auto * ch = info.channel_action();
  REQUIRE(ch);
  REQUIRE(ch->msg->is<EnumElem>());
  CHECK(ch->msg->as<EnumElem>()->set == "MessagePrefixes");
}

TEST_CASE("missing initialisation")
{
  const std::string bad =
    replaced(test::fixture_machine_text(), "    @act3: result := {proc . proc in P | proc |-> {}}\n", "");
  CHECK(has_code(codes_for_machine(bad), "E_UNINITIALISED"));
}

TEST_CASE("missing topology")
{
  const std::string bad = replaced(test::fixture_context_text(),
                                   "  @network_value: network = {proc · proc ∈ P | proc ↦ Q} ∪ {q · q ∈ Q | q ↦ {p}}\n",
                                   "");
  CHECK(has_code(codes_for_context(bad), "E_NO_TOPOLOGY"));
}

TEST_CASE("States must contain done")
{
  const std::string bad = replaced(test::fixture_context_text(), "{wr}, {done})", "{wr})");
  CHECK_FALSE(codes_for_context(bad).empty());
}

TEST_CASE("duplicate control states are rejected")
{
  const std::string bad = replaced(test::fixture_context_text(), "{sr}, {wa}", "{sr}, {sr}");
  CHECK(has_code(codes_for_context(bad), "E_MALFORMED_PARTITION"));
}

TEST_CASE("annotations must name process classes")
{
  const std::string bad = replaced(test::fixture_context_text(), "{answer}) @P @Q", "{answer}) @P @R");
  CHECK(has_code(codes_for_context(bad), "E_UNKNOWN_ANNOTATION"));
}

TEST_CASE("negative suite: each variant yields exactly its code")
{
  const std::vector<std::pair<const char *, const char *>> cases{
    {"nonlocal_guard", "E_NONLOCAL_REF"},
    {"missing_pc_guard", "E_NO_PC_GUARD"},
    {"untyped_param", "E_UNTYPED_PARAM"},
    {"foreign_assign", "E_FOREIGN_ASSIGN"},
    {"recv_general_guard", "E_RECV_GENERAL_GUARD"},
  };
  for (const auto & [file, code] : cases) {
    const std::string text =
      test::read_file(test::source_path(std::string("tests/fixtures/negative/") + file + ".lbm"));
    INFO(file);
    CHECK(codes_for_machine(text) == std::vector<std::string>{code});
  }
}

TEST_CASE("every accepted event satisfies the event rules")
{
  const AnalyzedProgram & prog = test::fixture();
  for (const auto & cls : prog.classes) {
    for (const auto & [st, evs] : cls.events_by_state) {
      for (const auto & ev : evs) {
        INFO(ev.decl.name);
        CHECK(satisfies_event_rules(prog, cls, ev));
      }
    }
  }
}

TEST_CASE("guard deletion never yields an accepted program that breaks the rules")
{
  // Drop one guard at random and re-analyze: either the analyzer rejects the
  // model or every event still satisfies the independent rule check.
  const MachineModel base = parse_mch(test::fixture_machine_text());
  const ContextModel ctx = parse_ctx(test::fixture_context_text());
  std::mt19937_64 rng(5);
  int accepted = 0, rejected = 0;
  for (int i = 0; i < 60; ++i) {
    MachineModel m = base;
    auto & ev = m.events[rng() % m.events.size()];
    ev.guards.erase(ev.guards.begin() + static_cast<long>(rng() % ev.guards.size()));
    auto r = analyze(ctx, m);
    if (!r.ok()) {
      ++rejected;
      continue;
    }
    ++accepted;
    for (const auto & cls : r->classes) {
      for (const auto & [st, evs] : cls.events_by_state) {
        for (const auto & e : evs) {
          CHECK(satisfies_event_rules(r.value(), cls, e));
        }
      }
    }
  }
  CHECK(rejected > 0);
  (void)accepted;
}

TEST_CASE("locality closure of guards and actions")
{
  const AnalyzedProgram & prog = test::fixture();
  for (const auto & cls : prog.classes) {
    for (const auto & [st, evs] : cls.events_by_state) {
      for (const auto & ev : evs) {
        const auto ok = allowed_names(prog, cls, ev);
        auto check = [&](const ExprPtr & e) {
          for (const auto & v : free_vars(*e)) {
            INFO(ev.decl.name << ": " << v);
            CHECK(ok.count(v));
          }
        };
        for (const auto & g : ev.conditions) {
          check(g);
        }
        for (const auto & a : ev.decl.actions) {
          if (const auto * la = std::get_if<LocalAssign>(&a.body)) {
            check(la->rhs);
          } else if (const auto * ca = std::get_if<ChannelAssign>(&a.body)) {
            check(ca->src);
            check(ca->dst);
            check(ca->msg);
          }
        }
      }
    }
  }
}

TEST_CASE("events_by_state partitions the events of each class")
{
  const AnalyzedProgram & prog = test::fixture();
  std::map<Ident, int> seen;
  for (const auto & cls : prog.classes) {
    for (const auto & [st, evs] : cls.events_by_state) {
      CHECK(std::find(cls.states.begin(), cls.states.end(), st) != cls.states.end());
      for (const auto & ev : evs) {
        CHECK(ev.state == st);
        CHECK(ev.process_class == cls.name);
        ++seen[ev.decl.name];
      }
    }
  }
  CHECK(seen.size() == prog.machine.events.size());
  for (const auto & [name, n] : seen) {
    CHECK_MESSAGE(n == 1, name);
  }
}

TEST_CASE("events keep declaration order within a state")
{
  const auto & wr = test::fixture().find_class("Q")->events_in("wr");
  REQUIRE(wr.size() == 3);
  CHECK(wr[0].decl.name == "receiveRequest");
  CHECK(wr[1].decl.name == "sendAnswer");
  CHECK(wr[2].decl.name == "terminateQ");
}

TEST_CASE("accepted literal partitions are disjoint and cover their set")
{
  const AnalyzedProgram & prog = test::fixture();
  for (const auto & ax : prog.context.axioms) {
    const auto * p = ax.predicate->as<Partition>();
    if (!p) {
      continue;
    }
    std::set<std::string> seen;
    size_t total = 0;
    for (const auto & b : p->blocks) {
      if (const auto * s = b->as<SetExt>()) {
        for (const auto & el : s->elems) {
          seen.insert(to_source(el));
          ++total;
        }
      }
    }
    CHECK_MESSAGE(seen.size() == total, ax.label);
  }
}
