// lb/analyzer/analyzer.cpp
#include "lb/analyzer/analyzer.hpp"

#include <algorithm>

#include "lb/parser/parser.hpp"

namespace lb::analyzer
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

const Var * as_var(const ExprPtr & e) { return e ? e->as<Var>() : nullptr; }

bool is_var(const ExprPtr & e, std::string_view name)
{
  const auto * v = as_var(e);
  return v && v->name == name;
}

template <class C, class V>
bool contains(const C & c, const V & v)
{
  return std::find(c.begin(), c.end(), v) != c.end();
}

/// `x in T` -> (x, T)
std::optional<std::pair<Ident, ExprPtr>> membership(const ExprPtr & e)
{
  const auto * b = e->as<Binary>();
  if (!b || b->op != BinOp::In) {
    return std::nullopt;
  }
  const auto * v = as_var(b->lhs);
  if (!v) {
    return std::nullopt;
  }
  return std::make_pair(v->name, b->rhs);
}

/// Domain of a function type `D --> T` / `D +-> T`, or null.
ExprPtr function_domain(const ExprPtr & type)
{
  const auto * b = type ? type->as<Binary>() : nullptr;
  if (b && (b->op == BinOp::TotalFn || b->op == BinOp::PartialFn)) {
    return b->lhs;
  }
  return nullptr;
}

/// partition(S, {a}, {b}, ...) with singleton blocks -> [a, b, ...]
std::optional<std::vector<Ident>> singleton_partition(const ExprPtr & e, const Ident & set)
{
  const auto * p = e->as<Partition>();
  if (!p || !is_var(p->set, set)) {
    return std::nullopt;
  }
  std::vector<Ident> out;
  for (const auto & b : p->blocks) {
    const auto * s = b->as<SetExt>();
    if (!s || s->elems.size() != 1 || !as_var(s->elems[0])) {
      return std::nullopt;
    }
    out.push_back(as_var(s->elems[0])->name);
  }
  return out;
}

bool has_duplicates(std::vector<Ident> v)
{
  std::sort(v.begin(), v.end());
  return std::adjacent_find(v.begin(), v.end()) != v.end();
}

/// Splits `{b . b in C | b |-> e} \/ ...` into per-class entries.
std::optional<std::vector<TopologyEntry>> per_class_comprehensions(const ExprPtr & e)
{
  std::vector<TopologyEntry> out;
  std::function<bool(const ExprPtr &)> go = [&](const ExprPtr & x) {
    if (const auto * b = x->as<Binary>(); b && b->op == BinOp::Union) {
      return go(b->lhs) && go(b->rhs);
    }
    const auto * c = x->as<SetComprehension>();
    if (!c || c->filter || !as_var(c->domain)) {
      return false;
    }
    const auto * m = c->body->as<Maplet>();
    if (!m || !is_var(m->left, c->binder)) {
      return false;
    }
    out.push_back(TopologyEntry{as_var(c->domain)->name, c->binder, m->right});
    return true;
  };
  if (!go(e)) {
    return std::nullopt;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<Ident> LocalConstants::all() const
{
  std::vector<Ident> out = constants;
  out.insert(out.end(), enum_sets.begin(), enum_sets.end());
  return out;
}

std::vector<Ident> EventInfo::extra_params() const
{
  std::vector<Ident> out;
  for (const auto & p : decl.params) {
    if (p.name != proc_param) {
      out.push_back(p.name);
    }
  }
  return out;
}

const ChannelAssign * EventInfo::channel_action() const
{
  for (const auto & a : decl.actions) {
    if (const auto * c = std::get_if<ChannelAssign>(&a.body)) {
      return c;
    }
  }
  return nullptr;
}

const std::vector<EventInfo> & ProcessClassInfo::events_in(const Ident & state) const
{
  static const std::vector<EventInfo> kEmpty;
  auto it = events_by_state.find(state);
  return it == events_by_state.end() ? kEmpty : it->second;
}

bool ProcessClassInfo::is_local_function(const Ident & n) const
{
  return contains(local_constants.constants, n) || contains(local_variables, n);
}

const ProcessClassInfo * AnalyzedProgram::find_class(const Ident & n) const
{
  for (const auto & c : classes) {
    if (c.name == n) {
      return &c;
    }
  }
  return nullptr;
}

const ProcessClassInfo * AnalyzedProgram::class_of_member(const Ident & member) const
{
  for (const auto & c : classes) {
    if (contains(c.explicit_members, member)) {
      return &c;
    }
  }
  return nullptr;
}

const EnumSet * AnalyzedProgram::enum_of_elem(const Ident & elem) const
{
  for (const auto & e : enums) {
    if (contains(e.elems, elem)) {
      return &e;
    }
  }
  return nullptr;
}

const ConstantDef * AnalyzedProgram::find_constant_def(const Ident & n) const
{
  for (const auto & d : constant_defs) {
    if (d.constant == n) {
      return &d;
    }
  }
  return nullptr;
}

bool AnalyzedProgram::is_state(const Ident & n) const { return contains(states, n); }
bool AnalyzedProgram::is_class(const Ident & n) const { return find_class(n) != nullptr; }

std::vector<Hole> AnalyzedProgram::holes() const
{
  std::vector<Hole> out;
  for (const auto & c : classes) {
    if (!c.enumerated) {
      out.push_back(Hole{Hole::Kind::ClassSize, "N" + c.name, c.name});
    }
  }
  for (const auto & u : unbound_constants) {
    out.push_back(Hole{Hole::Kind::Constant, u, {}});
  }
  return out;
}

bool ProgramScope::is_local_function(const Ident & cls, const Ident & n) const
{
  if (auto it = local_variables.find(cls); it != local_variables.end() && contains(it->second, n)) {
    return true;
  }
  auto it = local_constants.find(cls);
  return it != local_constants.end() && contains(it->second.constants, n) &&
         !scalar_local_constants.count(n);
}

// ---------------------------------------------------------------------------
// Classes, local constants, local variables

Result<ClassPartition> extract_classes(const ContextModel & ctx)
{
  const Axiom * nodes = ctx.find_axiom("Nodes");
  if (!nodes) {
    return Diagnostics{make_error(
      "E_MISSING_NODES_AXIOM", "context has no axiom labelled 'Nodes' partitioning the processes",
      SourceSpan{ctx.file, 0, 0, 1})};
  }
  const auto * p = nodes->predicate->as<Partition>();
  auto malformed = [&](const std::string & why, const SourceSpan & span) {
    return Diagnostics{make_error("E_MALFORMED_PARTITION", why, span)};
  };
  if (!p || !is_var(p->set, "Nodes") || p->blocks.empty()) {
    return malformed("axiom 'Nodes' must be 'partition(Nodes, PCl1, ..., PCln)'", nodes->span);
  }
  ClassPartition out;
  for (const auto & b : p->blocks) {
    const auto * v = as_var(b);
    if (!v || !ctx.has_constant(v->name)) {
      return malformed("process classes in 'Nodes' must be declared constants", nodes->span);
    }
    out.names.push_back(v->name);
  }
  if (has_duplicates(out.names)) {
    return malformed("process classes in 'Nodes' must be pairwise distinct", nodes->span);
  }

  std::vector<Ident> all_members;
  for (const auto & cls : out.names) {
    const Axiom * ax = ctx.find_axiom(cls);
    if (!ax) {
      continue;
    }
    auto members = singleton_partition(ax->predicate, cls);
    if (!members) {
      return malformed("axiom '" + cls + "' must be 'partition(" + cls + ", {m1}, ..., {mk})'",
                       ax->span);
    }
    for (const auto & m : *members) {
      if (!ctx.has_constant(m)) {
        return malformed("process '" + m + "' is not a declared constant", ax->span);
      }
    }
    all_members.insert(all_members.end(), members->begin(), members->end());
    out.members[cls] = std::move(*members);
  }
  if (has_duplicates(all_members)) {
    return malformed("explicitly enumerated processes must be pairwise distinct", nodes->span);
  }
  return out;
}

LocalConstants compute_local_constants(const ContextModel & ctx, const Ident & cls)
{
  LocalConstants lc;
  for (const auto & c : ctx.constants) {
    const Axiom * ax = ctx.find_axiom(c + "_typing");
    if (!ax) {
      continue;
    }
    bool local = contains(ax->annotations, cls);
    if (auto mem = membership(ax->predicate); mem && mem->first == c) {
      const ExprPtr dom = function_domain(mem->second);
      local = local || is_var(dom, cls) || is_var(dom, "Nodes");
    }
    if (local) {
      lc.constants.push_back(c);
    }
  }
  if (auto it = std::find(lc.constants.begin(), lc.constants.end(), "network");
      it != lc.constants.end()) {
    std::rotate(lc.constants.begin(), it, it + 1);
  }
  for (const auto & s : ctx.sets) {
    const Axiom * ax = ctx.find_axiom(s);
    if (ax && singleton_partition(ax->predicate, s) && contains(ax->annotations, cls)) {
      lc.enum_sets.push_back(s);
    }
  }
  return lc;
}

Result<std::vector<Ident>> compute_local_variables(const MachineModel & mch, const Ident & cls)
{
  std::vector<Ident> out;
  Diagnostics diags;
  for (const auto & v : mch.variables) {
    const LabeledExpr * inv = mch.find_invariant(v + "_typing");
    if (!inv) {
      diags.push_back(make_error("E_UNTYPED_VARIABLE",
                                 "variable '" + v + "' has no typing invariant '" + v + "_typing'",
                                 SourceSpan{mch.file, 0, 0, 1}));
      continue;
    }
    if (v == "channels") {
      continue;
    }
    if (auto mem = membership(inv->expr); mem && mem->first == v) {
      const ExprPtr dom = function_domain(mem->second);
      if (is_var(dom, cls) || is_var(dom, "Nodes")) {
        out.push_back(v);
      }
    }
  }
  if (!diags.empty()) {
    return diags;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enumerated-set resolution

ExprPtr resolve_enums(const ExprPtr & e, const std::map<Ident, Ident> & elem_set,
                      const std::set<Ident> & shadowed)
{
  if (!e) {
    return e;
  }
  auto go = [&](const ExprPtr & c) { return resolve_enums(c, elem_set, shadowed); };
  auto go_with = [&](const ExprPtr & c, const std::vector<Ident> & names) {
    std::set<Ident> s = shadowed;
    s.insert(names.begin(), names.end());
    return resolve_enums(c, elem_set, s);
  };
  ExprNode node = std::visit(
    overloaded{
      [&](const Var & x) -> ExprNode {
        auto it = elem_set.find(x.name);
        if (it != elem_set.end() && !shadowed.count(x.name)) {
          return EnumElem{it->second, x.name};
        }
        return x;
      },
      [&](const IntLit & x) -> ExprNode { return x; },
      [&](const BoolLit & x) -> ExprNode { return x; },
      [&](const EnumElem & x) -> ExprNode { return x; },
      [&](const Apply & x) -> ExprNode { return Apply{go(x.fn), go(x.arg)}; },
      [&](const Maplet & x) -> ExprNode { return Maplet{go(x.left), go(x.right)}; },
      [&](const Binary & x) -> ExprNode { return Binary{x.op, go(x.lhs), go(x.rhs)}; },
      [&](const Unary & x) -> ExprNode { return Unary{x.op, go(x.operand)}; },
      [&](const SetExt & x) -> ExprNode {
        SetExt out;
        for (const auto & el : x.elems) {
          out.elems.push_back(go(el));
        }
        return out;
      },
      [&](const SetComprehension & x) -> ExprNode {
        return SetComprehension{x.binder, go(x.domain), go_with(x.filter, {x.binder}),
                                go_with(x.body, {x.binder})};
      },
      [&](const Quantifier & x) -> ExprNode {
        Quantifier out{x.kind, {}, nullptr};
        std::vector<Ident> names;
        for (const auto & b : x.binders) {
          out.binders.push_back(QuantBinder{b.name, go_with(b.domain, names)});
          names.push_back(b.name);
        }
        out.body = go_with(x.body, names);
        return out;
      },
      [&](const Interval & x) -> ExprNode { return Interval{go(x.lo), go(x.hi)}; },
      [&](const ChannelCall & x) -> ExprNode {
        return ChannelCall{x.kind, go(x.src), go(x.dst), go(x.msg)};
      },
      [&](const FuncOverride & x) -> ExprNode { return FuncOverride{go(x.base), go(x.updates)}; },
      [&](const Partition & x) -> ExprNode {
        Partition out{go(x.set), {}};
        for (const auto & b : x.blocks) {
          out.blocks.push_back(go(b));
        }
        return out;
      },
    },
    e->node);
  return make_expr(std::move(node), e->span);
}

namespace
{

std::set<Ident> param_names(const EventDecl & e)
{
  std::set<Ident> out;
  for (const auto & p : e.params) {
    out.insert(p.name);
  }
  return out;
}

EventDecl resolve_event(const EventDecl & raw, const std::map<Ident, Ident> & elem_set)
{
  EventDecl e = raw;
  const auto shadow = param_names(raw);
  for (auto & g : e.guards) {
    g.expr = resolve_enums(g.expr, elem_set, shadow);
  }
  for (auto & a : e.actions) {
    std::visit(
      overloaded{
        [&](LocalAssign & x) { x.rhs = resolve_enums(x.rhs, elem_set, shadow); },
        [&](ChannelAssign & x) {
          x.src = resolve_enums(x.src, elem_set, shadow);
          x.dst = resolve_enums(x.dst, elem_set, shadow);
          x.msg = resolve_enums(x.msg, elem_set, shadow);
        },
        [&](WholeAssign & x) { x.rhs = resolve_enums(x.rhs, elem_set, shadow); },
      },
      a.body);
  }
  return e;
}

// ---------------------------------------------------------------------------
// Locality

struct LocalityChecker
{
  const ProgramScope & scope;
  const Ident & cls;
  const Ident & proc;
  std::set<Ident> params;  // event parameters (or the comprehension binder)
  bool allow_history = false;
  Diagnostics & diags;
  Ident owner;  // "event 'x'" for messages

  void report(const std::string & code, const std::string & msg, const SourceSpan & span)
  {
    diags.push_back(make_error(code, owner + ": " + msg, span));
  }

  const SourceSpan & span_of(const Expr & e, const SourceSpan & fallback) const
  {
    return e.span.valid() ? e.span : fallback;
  }

  void check(const ExprPtr & e, const SourceSpan & at) { check(e, {}, at); }

  void check(const ExprPtr & e, std::set<Ident> binders, const SourceSpan & at)
  {
    if (!e) {
      return;
    }
    const SourceSpan & here = span_of(*e, at);
    auto go = [&](const ExprPtr & c) { check(c, binders, at); };
    auto go_bound = [&](const ExprPtr & c, const std::vector<Ident> & names) {
      auto b = binders;
      b.insert(names.begin(), names.end());
      check(c, b, at);
    };
    std::visit(
      overloaded{
        [](const IntLit &) {}, [](const BoolLit &) {},
        [&](const Var & x) { check_name(x.name, binders, here); },
        [&](const EnumElem & x) {
          const auto & lc = scope.local_constants.at(cls);
          if (!contains(lc.enum_sets, x.set)) {
            report("E_NONLOCAL_REF",
                   "'" + x.elem + "' belongs to '" + x.set + "', which is not annotated @" + cls,
                   here);
          }
        },
        [&](const Apply & x) {
          const auto * f = as_var(x.fn);
          if (f && !binders.count(f->name) && !params.count(f->name) &&
              scope.is_local_function(cls, f->name)) {
            if (!is_var(x.arg, proc) || binders.count(proc)) {
              report("E_NONLOCAL_REF",
                     "'" + f->name + "' is local to " + cls + " and may only be applied to '" +
                       proc + "', not to '" + to_source(x.arg) + "'",
                     here);
            }
            return;
          }
          go(x.fn);
          go(x.arg);
        },
        [&](const Maplet & x) { go(x.left); go(x.right); },
        [&](const Binary & x) { go(x.lhs); go(x.rhs); },
        [&](const Unary & x) { go(x.operand); },
        [&](const SetExt & x) { std::for_each(x.elems.begin(), x.elems.end(), go); },
        [&](const SetComprehension & x) {
          go(x.domain);
          go_bound(x.filter, {x.binder});
          go_bound(x.body, {x.binder});
        },
        [&](const Quantifier & x) {
          std::vector<Ident> names;
          for (const auto & b : x.binders) {
            go_bound(b.domain, names);
            names.push_back(b.name);
          }
          go_bound(x.body, names);
        },
        [&](const Interval & x) { go(x.lo); go(x.hi); },
        [&](const ChannelCall & x) {
          if (!allow_history) {
            report("E_BAD_CHANNEL_USE",
                   std::string("'") + to_string(x.kind) + "' may not appear here", here);
            return;
          }
          if (x.kind == ChannelKind::Sent) {
            if (!is_var(x.src, proc)) {
              report("E_BAD_PEER", "sent(...) must query messages sent by '" + proc + "'", here);
            }
            go(x.dst);
          } else if (x.kind == ChannelKind::Received) {
            if (!is_var(x.dst, proc)) {
              report("E_BAD_PEER",
                     "received(...) must query messages received by '" + proc + "'", here);
            }
            go(x.src);
          } else {
            report(x.kind == ChannelKind::InChannel ? "E_UNSUPPORTED_HISTORY" : "E_BAD_CHANNEL_USE",
                   std::string("'") + to_string(x.kind) + "' may not appear in a guard", here);
            return;
          }
          go(x.msg);
        },
        [&](const FuncOverride & x) { go(x.base); go(x.updates); },
        [&](const Partition & x) {
          report("E_BAD_EXPR", "partition(...) may only appear in context axioms", here);
          (void)x;
        },
      },
      e->node);
  }

  void check_name(const Ident & n, const std::set<Ident> & binders, const SourceSpan & span)
  {
    if (binders.count(n) || params.count(n)) {
      return;
    }
    if (scope.is_local_function(cls, n)) {
      report("E_NONLOCAL_REF", "'" + n + "' is local to " + cls + " and must be applied to '" +
                                 proc + "'",
             span);
      return;
    }
    const auto & lc = scope.local_constants.at(cls);
    if (scope.scalar_local_constants.count(n) && contains(lc.constants, n)) {
      return;
    }
    if (scope.states.count(n) || kBuiltinSets.count(n) || scope.context->has_set(n) ||
        contains(scope.classes, n)) {
      return;
    }
    if (n == "channels") {
      report("E_BAD_CHANNEL_USE", "'channels' may only be used through channel primitives", span);
      return;
    }
    if (scope.context->has_constant(n) || contains(scope.machine->variables, n)) {
      report("E_NONLOCAL_REF", "'" + n + "' is not local to " + cls, span);
      return;
    }
    report("E_UNDECLARED", "'" + n + "' is not declared", span);
  }
};

/// sent(...) > 0, sent(...) = 0 and the received(...) equivalents.
bool is_history_comparison(const Expr & e)
{
  const auto * b = e.as<Binary>();
  if (!b || (b->op != BinOp::Gt && b->op != BinOp::Eq)) {
    return false;
  }
  const auto * call = b->lhs->as<ChannelCall>();
  const auto * zero = b->rhs->as<IntLit>();
  return call && zero && zero->value == 0 &&
         (call->kind == ChannelKind::Sent || call->kind == ChannelKind::Received);
}

/// Reports sent/received queries that are not in a supported comparison form.
void check_history_forms(const ExprPtr & g, Diagnostics & diags, const Ident & owner)
{
  std::set<const Expr *> allowed;
  walk(*g, [&](const Expr & e) {
    if (is_history_comparison(e)) {
      allowed.insert(e.as<Binary>()->lhs.get());
    }
  });
  walk(*g, [&](const Expr & e) {
    const auto * call = e.as<ChannelCall>();
    if (call && (call->kind == ChannelKind::Sent || call->kind == ChannelKind::Received) &&
        !allowed.count(&e)) {
      diags.push_back(make_error(
        "E_UNSUPPORTED_HISTORY",
        owner + ": only '" + to_string(call->kind) + "(...) > 0' and '" + to_string(call->kind) +
          "(...) = 0' history guards are supported",
        e.span));
    }
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// Scope construction

ProgramScope build_scope(const ContextModel & ctx, const MachineModel & mch, Diagnostics & diags)
{
  ProgramScope scope;
  scope.context = &ctx;
  scope.machine = &mch;

  auto classes = extract_classes(ctx);
  if (classes) {
    scope.classes = classes->names;
  } else {
    diags.insert(diags.end(), classes.diagnostics().begin(), classes.diagnostics().end());
  }

  const SourceSpan ctx_span{ctx.file, 0, 0, 1};
  for (const char * s : {"Nodes", "States", "Messages"}) {
    if (!ctx.has_set(s)) {
      diags.push_back(
        make_error("E_MISSING_BUILTIN", std::string("context must declare the set '") + s + "'",
                   ctx_span));
    }
  }
  for (const auto & c : kCommunicationConstants) {
    if (!ctx.has_constant(c)) {
      diags.push_back(make_error(
        "E_MISSING_BUILTIN", "context must declare the communication constant '" + c + "'",
        ctx_span));
    }
  }

  if (const Axiom * st = ctx.find_axiom("States")) {
    if (auto states = singleton_partition(st->predicate, "States")) {
      for (const auto & s : *states) {
        if (!ctx.has_constant(s)) {
          diags.push_back(
            make_error("E_UNDECLARED", "state '" + s + "' is not a declared constant", st->span));
        }
      }
      if (has_duplicates(*states)) {
        diags.push_back(
          make_error("E_MALFORMED_PARTITION", "control states must be distinct", st->span));
      }
      scope.states.insert(states->begin(), states->end());
      if (!scope.states.count(kDoneState)) {
        diags.push_back(make_error("E_NO_DONE_STATE",
                                   "the States partition must contain the terminal state 'done'",
                                   st->span));
      }
    } else {
      diags.push_back(make_error("E_MALFORMED_PARTITION",
                                 "axiom 'States' must be 'partition(States, {st1}, ..., {stn})'",
                                 st->span));
    }
  } else {
    diags.push_back(
      make_error("E_NO_STATES", "context has no axiom labelled 'States'", ctx_span));
  }

  for (const auto & s : ctx.sets) {
    if (s == "Nodes" || s == "States" || s == "Messages") {
      continue;
    }
    const Axiom * ax = ctx.find_axiom(s);
    if (!ax) {
      continue;
    }
    auto elems = singleton_partition(ax->predicate, s);
    if (!elems) {
      diags.push_back(make_error(
        "E_MALFORMED_PARTITION",
        "enumerated set '" + s + "' must be defined by 'partition(" + s + ", {e1}, ..., {en})'",
        ax->span));
      continue;
    }
    for (const auto & el : *elems) {
      if (!ctx.has_constant(el)) {
        diags.push_back(
          make_error("E_UNDECLARED", "element '" + el + "' is not a declared constant", ax->span));
      }
      scope.enum_elem_set[el] = s;
    }
  }

  for (const auto & ax : ctx.axioms) {
    for (const auto & a : ax.annotations) {
      if (classes && !contains(scope.classes, a)) {
        diags.push_back(make_error("E_UNKNOWN_ANNOTATION",
                                   "annotation '@" + a + "' does not name a process class",
                                   ax.span));
      }
    }
  }

  for (const auto & cls : scope.classes) {
    scope.local_constants[cls] = compute_local_constants(ctx, cls);
  }
  for (const auto & c : ctx.constants) {
    const Axiom * ax = ctx.find_axiom(c + "_typing");
    if (!ax || ax->annotations.empty()) {
      continue;
    }
    auto mem = membership(ax->predicate);
    if (!mem || !function_domain(mem->second)) {
      scope.scalar_local_constants.insert(c);
    }
  }

  bool lv_failed = false;
  for (const auto & cls : scope.classes) {
    auto lv = compute_local_variables(mch, cls);
    if (lv) {
      scope.local_variables[cls] = lv.value();
    } else if (!lv_failed) {
      lv_failed = true;
      for (auto d : lv.diagnostics()) {
        diags.push_back(std::move(d));
      }
    }
  }
  return scope;
}

// ---------------------------------------------------------------------------
// Events

Result<EventInfo> check_event(const EventDecl & raw, const ProgramScope & scope)
{
  Diagnostics diags;
  const Ident owner = "event '" + raw.name + "'";
  auto err = [&](const std::string & code, const std::string & msg, const SourceSpan & span) {
    diags.push_back(make_error(code, owner + ": " + msg, span.valid() ? span : raw.span));
  };

  EventInfo info;
  info.decl = resolve_event(raw, scope.enum_elem_set);
  const EventDecl & e = info.decl;

  // typing guards: the first `p in S` guard for each parameter
  std::map<Ident, size_t> typing;
  for (size_t i = 0; i < e.guards.size(); ++i) {
    if (auto mem = membership(e.guards[i].expr); mem && e.has_param(mem->first) &&
                                                 !typing.count(mem->first)) {
      typing[mem->first] = i;
    }
  }

  // pc(x) = st guards
  struct PcGuard
  {
    size_t index;
    Ident proc;
    Ident state;
  };
  std::vector<PcGuard> pc_guards;
  for (size_t i = 0; i < e.guards.size(); ++i) {
    const auto * b = e.guards[i].expr->as<Binary>();
    if (!b || b->op != BinOp::Eq) {
      continue;
    }
    const auto * app = b->lhs->as<Apply>();
    if (app && is_var(app->fn, "pc") && as_var(app->arg) && as_var(b->rhs)) {
      pc_guards.push_back(PcGuard{i, as_var(app->arg)->name, as_var(b->rhs)->name});
    }
  }

  // the process parameter
  std::vector<std::pair<Ident, Ident>> candidates;  // (param, class)
  for (const auto & p : e.params) {
    auto it = typing.find(p.name);
    if (it == typing.end()) {
      continue;
    }
    const auto * dom = as_var(membership(e.guards[it->second].expr)->second);
    if (dom && contains(scope.classes, dom->name)) {
      candidates.emplace_back(p.name, dom->name);
    }
  }
  if (candidates.empty()) {
    err("E_NO_PROC_PARAM", "no parameter is typed by a guard 'proc in PCl' with PCl a process class",
        e.span);
    return diags;
  }
  auto chosen = candidates.front();
  if (candidates.size() > 1) {
    for (const auto & c : candidates) {
      for (const auto & g : pc_guards) {
        if (g.proc == c.first) {
          chosen = c;
        }
      }
    }
  }
  info.proc_param = chosen.first;
  info.process_class = chosen.second;
  const Ident & proc = info.proc_param;
  const Ident & cls = info.process_class;

  std::optional<size_t> pc_index;
  for (const auto & g : pc_guards) {
    if (g.proc != proc) {
      continue;
    }
    if (pc_index) {
      err("E_MULTI_PC_GUARD", "more than one 'pc(" + proc + ") = st' guard",
          e.guards[g.index].span);
      continue;
    }
    pc_index = g.index;
    info.state = g.state;
    if (!scope.states.count(g.state)) {
      err("E_UNKNOWN_STATE", "'" + g.state + "' is not a control state", e.guards[g.index].span);
    }
  }
  if (!pc_index) {
    err("E_NO_PC_GUARD", "missing guard 'pc(" + proc + ") = st'", e.span);
  }

  for (const auto & p : e.params) {
    if (!typing.count(p.name)) {
      err("E_UNTYPED_PARAM", "parameter '" + p.name + "' has no typing guard '" + p.name +
                               " in S'",
          p.span);
    }
  }

  LocalityChecker loc{scope, cls, proc, param_names(e), false, diags, owner};

  // actions
  std::set<Ident> assigned;
  std::vector<const ChannelAssign *> channel_actions;
  const auto & lv = scope.local_variables.count(cls) ? scope.local_variables.at(cls)
                                                     : std::vector<Ident>{};
  for (const auto & a : e.actions) {
    if (!assigned.insert(a.target()).second) {
      err("E_DUPLICATE_ASSIGN", "'" + a.target() + "' is assigned more than once", a.span);
    }
    std::visit(
      overloaded{
        [&](const LocalAssign & x) {
          if (x.var == "channels") {
            err("E_BAD_CHANNEL_ACTION", "channels can only be updated by send or receive", a.span);
            return;
          }
          if (x.proc != proc) {
            err("E_FOREIGN_ASSIGN",
                "assignment to '" + x.var + "(" + x.proc + ")' does not target the process "
                  "parameter '" + proc + "'",
                a.span);
          } else if (!contains(lv, x.var)) {
            err("E_NONLOCAL_ASSIGN", "'" + x.var + "' is not a local variable of " + cls, a.span);
          }
          if (x.var == "pc") {
            const auto * st = as_var(x.rhs);
            if (!st || !scope.states.count(st->name)) {
              err("E_UNKNOWN_STATE", "pc must be assigned a control state", a.span);
            }
            return;
          }
          loc.check(x.rhs, a.span);
        },
        [&](const ChannelAssign & x) {
          channel_actions.push_back(&x);
          if (x.kind == ChannelKind::Send) {
            if (!is_var(x.src, proc)) {
              err("E_BAD_PEER", "send must have the form send(channels |-> (" + proc +
                                  " |-> dest) |-> msg)",
                  a.span);
            }
            loc.check(x.dst, a.span);
            loc.check(x.msg, a.span);
          } else if (!is_var(x.dst, proc)) {
            err("E_BAD_PEER",
                "receive must have the form receive(channels |-> (source |-> " + proc +
                  ") |-> msg)",
                a.span);
          }
        },
        [&](const WholeAssign & x) {
          if (x.var == "channels") {
            err("E_BAD_CHANNEL_ACTION", "channels can only be updated by send or receive", a.span);
          } else {
            err("E_FOREIGN_ASSIGN",
                "assignment must have the form '" + x.var + "(" + proc + ") := e'", a.span);
          }
        },
      },
      a.body);
  }

  if (auto kind = classify_event(e); kind) {
    info.kind = kind.value();
    if (channel_actions.size() > 1) {
      err("E_MULTI_CHANNEL_ACTION", "at most one channel action is allowed per event", e.span);
    }
  } else {
    for (auto d : kind.diagnostics()) {
      diags.push_back(std::move(d));
    }
  }

  // typing-guard domains
  for (const auto & p : e.params) {
    auto it = typing.find(p.name);
    if (it == typing.end()) {
      continue;
    }
    ExprPtr dom = membership(e.guards[it->second].expr)->second;
    loc.check(dom, e.guards[it->second].span);
    if (p.name != proc) {
      info.param_domains.emplace_back(p.name, dom);
    }
  }

  const ChannelAssign * recv = nullptr;
  if (info.kind == EventKind::Receive && !channel_actions.empty()) {
    recv = channel_actions.front();
  }
  const Var * recv_msg_param = recv ? as_var(recv->msg) : nullptr;
  const Var * recv_src_param = recv ? as_var(recv->src) : nullptr;
  if (recv_msg_param && !e.has_param(recv_msg_param->name)) {
    recv_msg_param = nullptr;
  }
  if (recv_src_param && !e.has_param(recv_src_param->name)) {
    recv_src_param = nullptr;
  }

  for (size_t i = 0; i < e.guards.size(); ++i) {
    const auto & g = e.guards[i];
    const bool is_typing = std::any_of(typing.begin(), typing.end(), [&](const auto & t) {
      return t.second == i;
    });
    if (is_typing || (pc_index && *pc_index == i)) {
      continue;
    }
    if (info.kind == EventKind::Receive) {
      const auto * b = g.expr->as<Binary>();
      const auto * lhs = b && b->op == BinOp::Eq ? as_var(b->lhs) : nullptr;
      const bool on_msg = lhs && recv_msg_param && lhs->name == recv_msg_param->name;
      const bool on_src = lhs && recv_src_param && lhs->name == recv_src_param->name;
      if (!on_msg && !on_src) {
        err("E_RECV_GENERAL_GUARD",
            "receive events may only carry typing, pc and matching guards (guard '" + g.label +
              "')",
            g.span);
        continue;
      }
      const bool duplicate = std::any_of(info.match_guards.begin(), info.match_guards.end(),
                                         [&](const MatchGuard & m) { return m.param == lhs->name; });
      if (duplicate) {
        err("E_RECV_GENERAL_GUARD", "more than one matching guard for '" + lhs->name + "'", g.span);
        continue;
      }
      loc.check(b->rhs, g.span);
      info.match_guards.push_back(MatchGuard{lhs->name, b->rhs});
      continue;
    }
    check_history_forms(g.expr, diags, owner);
    loc.allow_history = true;
    loc.check(g.expr, g.span);
    loc.allow_history = false;
    info.conditions.push_back(g.expr);
    if (is_history_comparison(*g.expr)) {
      info.history_guards.push_back(g.expr);
    } else {
      info.general_guards.push_back(g.expr);
    }
  }

  if (recv) {
    auto pattern_for = [&](const Var * param, const ExprPtr & fallback) -> ExprPtr {
      if (!param) {
        return fallback;
      }
      for (const auto & m : info.match_guards) {
        if (m.param == param->name) {
          return m.pattern;
        }
      }
      return nullptr;
    };
    info.receive_message = pattern_for(recv_msg_param, recv->msg);
    info.receive_source = pattern_for(recv_src_param, recv->src);
    if (!info.receive_message) {
      err("E_RECV_NO_MATCH",
          "receive event needs a matching guard '" + recv_msg_param->name + " = msgExpr'", e.span);
    }
    if (!info.receive_source) {
      info.receive_source = recv->src;  // unconstrained source: a free pattern variable
    }
    if (!recv_msg_param) {
      loc.check(recv->msg, e.span);
    }
    if (!recv_src_param) {
      loc.check(recv->src, e.span);
    }
  }

  if (has_errors(diags)) {
    return diags;
  }
  return info;
}

// ---------------------------------------------------------------------------
// Whole program

Result<AnalyzedProgram> analyze(const ContextModel & ctx, const MachineModel & mch)
{
  Diagnostics diags;
  const ProgramScope scope = build_scope(ctx, mch, diags);
  if (scope.classes.empty()) {
    return diags;
  }
  const SourceSpan ctx_span{ctx.file, 0, 0, 1};
  const SourceSpan mch_span{mch.file, 0, 0, 1};

  AnalyzedProgram prog;
  prog.context = ctx;
  prog.machine = mch;
  if (const Axiom * st = ctx.find_axiom("States")) {
    if (auto states = singleton_partition(st->predicate, "States")) {
      prog.states = *states;
    }
  }
  for (const auto & s : ctx.sets) {
    const Axiom * ax = ctx.find_axiom(s);
    if (s == "States" || s == "Nodes" || s == "Messages" || !ax) {
      continue;
    }
    if (auto elems = singleton_partition(ax->predicate, s)) {
      prog.enums.push_back(EnumSet{s, *elems, ax->annotations});
    }
  }
  auto resolve = [&](const ExprPtr & x) { return resolve_enums(x, scope.enum_elem_set); };
  auto resolve_bound = [&](const ExprPtr & x, const Ident & binder) {
    return resolve_enums(x, scope.enum_elem_set, {binder});
  };

  const auto partition = extract_classes(ctx).value();

  // topology
  const Axiom * net_typing = ctx.find_axiom("network_typing");
  const Axiom * net_value = ctx.find_axiom("network_value");
  if (!ctx.has_constant("network") || !net_typing || !net_value) {
    diags.push_back(make_error(
      "E_NO_TOPOLOGY",
      "context must declare 'network' with axioms 'network_typing' and 'network_value'",
      net_value ? net_value->span : ctx_span));
  } else {
    auto mem = membership(net_typing->predicate);
    const auto * fn = mem ? mem->second->as<Binary>() : nullptr;
    const auto * pow = fn ? fn->rhs->as<Unary>() : nullptr;
    if (!mem || mem->first != "network" || !fn || fn->op != BinOp::TotalFn ||
        !is_var(fn->lhs, "Nodes") || !pow || pow->op != UnOp::Pow || !is_var(pow->operand, "Nodes")) {
      diags.push_back(make_error("E_BAD_TOPOLOGY",
                                 "network_typing must read 'network in Nodes --> POW(Nodes)'",
                                 net_typing->span));
    }
    const auto * eq = net_value->predicate->as<Binary>();
    std::optional<std::vector<TopologyEntry>> entries;
    if (eq && eq->op == BinOp::Eq && is_var(eq->lhs, "network")) {
      entries = per_class_comprehensions(eq->rhs);
    }
    if (!entries) {
      diags.push_back(make_error(
        "E_BAD_TOPOLOGY",
        "network_value must be a union of '{proc . proc in PCl | proc |-> expr}' terms",
        net_value->span));
    } else {
      std::vector<Ident> covered;
      for (auto & t : *entries) {
        covered.push_back(t.cls);
        t.neighbors = resolve_bound(t.neighbors, t.binder);
      }
      auto sorted = covered;
      std::sort(sorted.begin(), sorted.end());
      auto expected = partition.names;
      std::sort(expected.begin(), expected.end());
      if (sorted != expected) {
        diags.push_back(make_error("E_BAD_TOPOLOGY",
                                   "network_value must give exactly one term per process class",
                                   net_value->span));
      }
      // emit in partition order
      for (const auto & cls : partition.names) {
        for (const auto & t : *entries) {
          if (t.cls == cls) {
            prog.topology.push_back(t);
            break;
          }
        }
      }
    }
  }

  // constants
  std::set<Ident> structural{"network"};
  structural.insert(kCommunicationConstants.begin(), kCommunicationConstants.end());
  structural.insert(partition.names.begin(), partition.names.end());
  for (const auto & [cls, members] : partition.members) {
    structural.insert(members.begin(), members.end());
  }
  structural.insert(scope.states.begin(), scope.states.end());
  for (const auto & [elem, set] : scope.enum_elem_set) {
    structural.insert(elem);
  }
  for (const auto & c : ctx.constants) {
    if (structural.count(c)) {
      continue;
    }
    const Axiom * typ = ctx.find_axiom(c + "_typing");
    const Axiom * val = ctx.find_axiom(c + "_value");
    if (typ) {
      auto mem = membership(typ->predicate);
      if (!mem || mem->first != c) {
        diags.push_back(make_error("E_BAD_TYPING_AXIOM",
                                   "axiom '" + typ->label + "' must read '" + c + " in T'",
                                   typ->span));
      } else {
        prog.constant_types[c] = mem->second;
        prog.typed_constants.push_back(c);
      }
    }
    if (val) {
      const auto * eq = val->predicate->as<Binary>();
      if (!eq || eq->op != BinOp::Eq || !is_var(eq->lhs, c)) {
        diags.push_back(make_error("E_BAD_VALUE_AXIOM",
                                   "axiom '" + val->label + "' must read '" + c + " = expr'",
                                   val->span));
        continue;
      }
      ConstantDef def{c, {}, nullptr};
      if (auto entries = per_class_comprehensions(eq->rhs)) {
        for (auto & t : *entries) {
          if (!contains(partition.names, t.cls)) {
            diags.push_back(make_error(
              "E_BAD_VALUE_AXIOM", "'" + t.cls + "' is not a process class", val->span));
          }
          t.neighbors = resolve_bound(t.neighbors, t.binder);
          def.per_class.push_back(t);
        }
      } else {
        def.scalar = resolve(eq->rhs);
      }
      prog.constant_defs.push_back(std::move(def));
    } else if (typ) {
      prog.unbound_constants.push_back(c);
    } else {
      diags.push_back(make_warning("W_UNTYPED_CONSTANT",
                                   "constant '" + c + "' has neither a typing nor a value axiom",
                                   ctx_span));
    }
  }

  // variables
  for (const char * required : {"pc", "channels"}) {
    if (!contains(mch.variables, required)) {
      diags.push_back(make_error("E_MISSING_VARIABLE",
                                 std::string("machine must declare the variable '") + required + "'",
                                 mch_span));
    }
  }
  for (const auto & v : mch.variables) {
    if (const LabeledExpr * inv = mch.find_invariant(v + "_typing")) {
      if (auto mem = membership(inv->expr); mem && mem->first == v) {
        prog.variable_types[v] = mem->second;
      } else {
        diags.push_back(make_error("E_BAD_TYPING_AXIOM",
                                   "invariant '" + inv->label + "' must read '" + v + " in T'",
                                   inv->span));
      }
    }
  }
  if (const LabeledExpr * pc = mch.find_invariant("pc_typing")) {
    const auto * fn = prog.variable_types.count("pc") ? prog.variable_types["pc"]->as<Binary>()
                                                      : nullptr;
    if (!fn || fn->op != BinOp::TotalFn || !is_var(fn->lhs, "Nodes") ||
        !is_var(fn->rhs, "States")) {
      diags.push_back(make_error("E_BAD_TYPING_AXIOM", "pc_typing must read 'pc in Nodes --> States'",
                                 pc->span));
    }
  }
  if (const LabeledExpr * ch = mch.find_invariant("channels_typing")) {
    if (!prog.variable_types.count("channels") ||
        !is_var(prog.variable_types["channels"], "Channels")) {
      diags.push_back(make_error("E_BAD_TYPING_AXIOM",
                                 "channels_typing must read 'channels in Channels'", ch->span));
    }
  }
  for (auto & inv : prog.machine.invariants) {
    inv.expr = resolve(inv.expr);
  }

  // classes
  for (const auto & name : partition.names) {
    ProcessClassInfo info;
    info.name = name;
    if (auto it = partition.members.find(name); it != partition.members.end()) {
      info.explicit_members = it->second;
      info.enumerated = true;
    }
    info.local_constants = scope.local_constants.at(name);
    if (auto it = scope.local_variables.find(name); it != scope.local_variables.end()) {
      info.local_variables = it->second;
    }
    prog.classes.push_back(std::move(info));
  }
  auto class_info = [&](const Ident & n) -> ProcessClassInfo & {
    return *std::find_if(prog.classes.begin(), prog.classes.end(),
                         [&](const ProcessClassInfo & c) { return c.name == n; });
  };

  // initialisation
  std::map<Ident, size_t> init_count;
  prog.machine.initialisation.clear();
  for (const auto & a : mch.initialisation) {
    const Ident target = a.target();
    if (++init_count[target] > 1) {
      diags.push_back(make_error("E_DUPLICATE_ASSIGN",
                                 "initialisation assigns '" + target + "' more than once", a.span));
    }
    const auto * whole = std::get_if<WholeAssign>(&a.body);
    if (!whole) {
      diags.push_back(make_error("E_BAD_INIT",
                                 "initialisation actions must assign whole variables", a.span));
      continue;
    }
    Action resolved = a;
    if (target == "channels") {
      if (!is_var(whole->rhs, "emptyChannel")) {
        diags.push_back(make_error("E_BAD_INIT", "channels must be initialised to emptyChannel",
                                   a.span));
      }
      prog.machine.initialisation.push_back(resolved);
      continue;
    }
    if (!contains(mch.variables, target)) {
      diags.push_back(
        make_error("E_UNDECLARED", "'" + target + "' is not a declared variable", a.span));
      continue;
    }
    auto entries = per_class_comprehensions(whole->rhs);
    if (!entries) {
      diags.push_back(make_error(
        "E_BAD_INIT",
        "'" + target + "' must be initialised by '{proc . proc in PCl | proc |-> expr}' terms",
        a.span));
      continue;
    }
    for (auto & t : *entries) {
      if (!contains(partition.names, t.cls)) {
        diags.push_back(
          make_error("E_BAD_INIT", "'" + t.cls + "' is not a process class", a.span));
        continue;
      }
      auto & ci = class_info(t.cls);
      if (!contains(ci.local_variables, target)) {
        diags.push_back(make_error(
          "E_BAD_INIT", "'" + target + "' is not a local variable of " + t.cls, a.span));
        continue;
      }
      t.neighbors = resolve_bound(t.neighbors, t.binder);
      // initial values may only use local constants of the process
      ProgramScope init_scope = scope;
      init_scope.local_variables[t.cls].clear();
      Diagnostics local_diags;
      LocalityChecker loc{init_scope, t.cls, t.binder, {t.binder}, false, local_diags,
                          "initialisation of '" + target + "'"};
      loc.check(t.neighbors, a.span);
      diags.insert(diags.end(), local_diags.begin(), local_diags.end());
      if (std::any_of(ci.initial_values.begin(), ci.initial_values.end(),
                      [&](const InitialValue & iv) { return iv.var == target; })) {
        diags.push_back(make_error("E_DUPLICATE_ASSIGN",
                                   "'" + target + "' is initialised twice for " + t.cls, a.span));
        continue;
      }
      ci.initial_values.push_back(InitialValue{target, t.binder, t.neighbors});
    }
    resolved.body = WholeAssign{target, resolve(whole->rhs)};
    prog.machine.initialisation.push_back(resolved);
  }
  for (const auto & v : mch.variables) {
    if (!init_count.count(v)) {
      diags.push_back(make_error("E_UNINITIALISED",
                                 "variable '" + v + "' is not assigned by the initialisation",
                                 mch_span));
    }
  }
  for (auto & ci : prog.classes) {
    for (const auto & v : ci.local_variables) {
      if (init_count.count(v) &&
          std::none_of(ci.initial_values.begin(), ci.initial_values.end(),
                       [&](const InitialValue & iv) { return iv.var == v; })) {
        diags.push_back(make_error("E_UNINITIALISED",
                                   "variable '" + v + "' has no initial value for class " + ci.name,
                                   mch_span));
      }
    }
    // LV order
    std::stable_sort(ci.initial_values.begin(), ci.initial_values.end(),
                     [&](const InitialValue & a, const InitialValue & b) {
                       auto pos = [&](const Ident & v) {
                         return std::find(ci.local_variables.begin(), ci.local_variables.end(), v) -
                                ci.local_variables.begin();
                       };
                       return pos(a.var) < pos(b.var);
                     });
  }

  // events
  for (size_t i = 0; i < mch.events.size(); ++i) {
    auto ev = check_event(mch.events[i], scope);
    if (!ev) {
      diags.insert(diags.end(), ev.diagnostics().begin(), ev.diagnostics().end());
      continue;
    }
    prog.machine.events[i] = ev->decl;
    auto & ci = class_info(ev->process_class);
    ci.events_by_state[ev->state].push_back(ev.value());
  }
  for (auto & ci : prog.classes) {
    for (const auto & st : prog.states) {
      if (ci.events_by_state.count(st) && st != kDoneState) {
        ci.states.push_back(st);
      }
    }
    ci.states.push_back(kDoneState);
  }

  if (has_errors(diags)) {
    return diags;
  }
  return Result<AnalyzedProgram>(std::move(prog), std::move(diags));
}

Result<AnalyzedProgram> analyze_sources(std::string_view ctx_text, const std::string & ctx_file,
                                        std::string_view mch_text, const std::string & mch_file)
{
  auto ctx = parser::parse_context(ctx_text, ctx_file);
  auto mch = parser::parse_machine(mch_text, mch_file);
  Diagnostics diags;
  if (!ctx) {
    diags.insert(diags.end(), ctx.diagnostics().begin(), ctx.diagnostics().end());
  }
  if (!mch) {
    diags.insert(diags.end(), mch.diagnostics().begin(), mch.diagnostics().end());
  }
  if (!ctx || !mch) {
    return diags;
  }
  return analyze(ctx.value(), mch.value());
}

}  // namespace lb::analyzer
