// lb/codegen/codegen.cpp
#include "lb/codegen/codegen.hpp"

#include <algorithm>
#include <sstream>

namespace lb::codegen
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

// Python operator precedence, loosest first.
enum Prec : int
{
  kTop = 0,
  kOr = 1,
  kAnd = 2,
  kNot = 3,
  kCmp = 4,
  kBitOr = 5,
  kBitAnd = 7,
  kAdd = 8,
  kMul = 9,
  kUnary = 10,
  kAtom = 11,
};

struct Out
{
  std::string text;
  int prec;
};

const Var * as_var(const ExprPtr & e) { return e ? e->as<Var>() : nullptr; }

bool is_var(const ExprPtr & e, std::string_view n)
{
  const auto * v = as_var(e);
  return v && v->name == n;
}

std::string join(const std::vector<std::string> & parts, const std::string & sep)
{
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    out += (i ? sep : "") + parts[i];
  }
  return out;
}

std::string pad(int n) { return std::string(static_cast<size_t>(n), ' '); }

[[noreturn]] void unsupported(const std::string & what, const Expr & e)
{
  throw UnsupportedConstruct("cannot translate " + what, e.span);
}

bool is_function_type(const ExprPtr & t)
{
  const auto * b = t ? t->as<Binary>() : nullptr;
  return b && (b->op == BinOp::TotalFn || b->op == BinOp::PartialFn);
}

class Translator
{
public:
  Translator(const GenConfig & cfg, bool bound) : cfg_(cfg), bound_(bound) {}

  std::string expr(const ExprPtr & e, int min_prec = kTop)
  {
    Out o = node(*e);
    return o.prec < min_prec ? "(" + o.text + ")" : o.text;
  }

  std::string message(const ExprPtr & msg)
  {
    std::vector<std::string> parts;
    for (const auto & p : flatten_maplets(msg)) {
      parts.push_back(expr(p, kOr));
    }
    if (parts.size() == 1) {
      return "(" + parts[0] + ", )";
    }
    return "(" + join(parts, ", ") + ")";
  }

  bool empty_is_dict = false;

private:
  bool is_bound(const Ident & n) const { return binders_.count(n) || cfg_.bound_vars.count(n); }

  bool localizing(const Ident & n) const
  {
    return cfg_.localize_for && cfg_.localize_for->second == n && !binders_.count(n);
  }

  bool is_local_function(const Ident & f) const
  {
    if (!cfg_.localize_for || !cfg_.prog || is_bound(f)) {
      return false;
    }
    const auto * c = cfg_.prog->find_class(cfg_.localize_for->first);
    return c && c->is_local_function(f);
  }

  std::string name(const Ident & n) const
  {
    if (localizing(n)) {
      return "self";
    }
    // Binders introduced inside the expression take the underscore only
    // within a history pattern; the configured bound variables take it in
    // bound mode as well.
    if (binders_.count(n)) {
      return in_pattern_ ? "_" + n : n;
    }
    if (cfg_.bound_vars.count(n)) {
      return bound_ || in_pattern_ ? "_" + n : n;
    }
    if (cfg_.prog && cfg_.prog->is_state(n)) {
      return "\"" + n + "\"";
    }
    if (cfg_.prog && cfg_.prog->is_class(n)) {
      return n + "Set";
    }
    return n;
  }

  // sent/received comparisons become history queries
  std::optional<Out> history(const Binary & b)
  {
    const auto * call = b.lhs->as<ChannelCall>();
    const auto * zero = b.rhs->as<IntLit>();
    if (!call || !zero || zero->value != 0 || (b.op != BinOp::Gt && b.op != BinOp::Eq)) {
      return std::nullopt;
    }
    if (call->kind != ChannelKind::Sent && call->kind != ChannelKind::Received) {
      return std::nullopt;
    }
    const bool saved = in_pattern_;
    in_pattern_ = true;
    std::string q;
    if (call->kind == ChannelKind::Sent) {
      q = "sent(" + message(call->msg) + ", to=" + expr(call->dst, kOr) + ")";
    } else {
      q = "received(" + message(call->msg) + ", from_=" + expr(call->src, kOr) + ")";
    }
    in_pattern_ = saved;
    if (b.op == BinOp::Gt) {
      return Out{"some(" + q + ")", kAtom};
    }
    return Out{"not(some(" + q + "))", kNot};
  }

  std::string with_binders(const std::vector<Ident> & names, const ExprPtr & e, int prec)
  {
    auto saved = binders_;
    binders_.insert(names.begin(), names.end());
    std::string out = expr(e, prec);
    binders_ = std::move(saved);
    return out;
  }

  Out binary(const Binary & b, const Expr & whole)
  {
    if (auto h = history(b)) {
      return *h;
    }
    struct OpInfo
    {
      const char * text;
      int prec;
    };
    OpInfo info{};
    switch (b.op) {
      case BinOp::Add: info = {"+", kAdd}; break;
      case BinOp::Sub: info = {"-", kAdd}; break;
      case BinOp::Mul: info = {"*", kMul}; break;
      case BinOp::Div: info = {"//", kMul}; break;
      case BinOp::Mod: info = {"%", kMul}; break;
      case BinOp::Eq: info = {"==", kCmp}; break;
      case BinOp::Neq: info = {"!=", kCmp}; break;
      case BinOp::Lt: info = {"<", kCmp}; break;
      case BinOp::Le: info = {"<=", kCmp}; break;
      case BinOp::Gt: info = {">", kCmp}; break;
      case BinOp::Ge: info = {">=", kCmp}; break;
      case BinOp::In: info = {"in", kCmp}; break;
      case BinOp::NotIn: info = {"not in", kCmp}; break;
      case BinOp::Subset: info = {"<=", kCmp}; break;
      case BinOp::Union: info = {"|", kBitOr}; break;
      case BinOp::Inter: info = {"&", kBitAnd}; break;
      case BinOp::Diff: info = {"-", kAdd}; break;
      case BinOp::And: info = {"and", kAnd}; break;
      case BinOp::Or: info = {"or", kOr}; break;
      case BinOp::Implies:
        return Out{"not(" + expr(b.lhs) + ") or " + expr(b.rhs, kOr), kOr};
      case BinOp::TotalFn:
      case BinOp::PartialFn:
      case BinOp::Product:
        unsupported(std::string("type constructor '") + to_string(b.op) + "'", whole);
    }
    // x in dom(f) -> x in f
    ExprPtr rhs = b.rhs;
    if (b.op == BinOp::In || b.op == BinOp::NotIn) {
      if (const auto * u = rhs->as<Unary>(); u && u->op == UnOp::Dom) {
        rhs = u->operand;
      }
    }
    const bool assoc = b.op == BinOp::And || b.op == BinOp::Or;
    const int lp = info.prec == kCmp ? kCmp + 1 : info.prec;
    const int rp = assoc ? info.prec : info.prec + 1;
    return Out{expr(b.lhs, lp) + " " + info.text + " " + expr(rhs, rp), info.prec};
  }

  Out node(const Expr & e)
  {
    return std::visit(
      overloaded{
        [&](const IntLit & x) -> Out {
          return Out{std::to_string(x.value), x.value < 0 ? kUnary : kAtom};
        },
        [&](const BoolLit & x) -> Out { return Out{x.value ? "True" : "False", kAtom}; },
        [&](const Var & x) -> Out { return Out{name(x.name), kAtom}; },
        [&](const EnumElem & x) -> Out { return Out{x.set + "." + x.elem, kAtom}; },
        [&](const Apply & x) -> Out {
          const auto * f = as_var(x.fn);
          if (f && is_local_function(f->name) && localizing_arg(x.arg)) {
            return Out{(cfg_.copied.count(f->name) ? "old_" : "self.") + f->name, kAtom};
          }
          return Out{expr(x.fn, kAtom) + "[" + expr(x.arg) + "]", kAtom};
        },
        [&](const Maplet & x) -> Out {
          return Out{"(" + expr(x.left, kOr) + ", " + expr(x.right, kOr) + ")", kAtom};
        },
        [&](const Binary & x) -> Out { return binary(x, e); },
        [&](const Unary & x) -> Out {
          switch (x.op) {
            case UnOp::Not: return Out{"not(" + expr(x.operand) + ")", kNot};
            case UnOp::Neg: return Out{"-" + expr(x.operand, kUnary), kUnary};
            case UnOp::Card: return Out{"len(" + expr(x.operand) + ")", kAtom};
            case UnOp::Dom: return Out{"set(" + expr(x.operand) + ")", kAtom};
            case UnOp::Pow: unsupported("power set", e);
          }
          unsupported("unary operator", e);
        },
        [&](const SetExt & x) -> Out {
          if (x.elems.empty()) {
            return Out{empty_is_dict ? "{}" : "set()", kAtom};
          }
          const bool all_maplets = std::all_of(x.elems.begin(), x.elems.end(), [](const ExprPtr & el) {
            return el->is<Maplet>();
          });
          std::vector<std::string> parts;
          for (const auto & el : x.elems) {
            if (all_maplets) {
              const auto & m = *el->as<Maplet>();
              parts.push_back(expr(m.left, kOr) + ": " + expr(m.right, kOr));
            } else {
              parts.push_back(expr(el, kOr));
            }
          }
          return Out{"{" + join(parts, ", ") + "}", kAtom};
        },
        [&](const SetComprehension & x) -> Out {
          const std::string dom = expr(x.domain, kOr);
          const std::string filter =
            x.filter ? with_binders({x.binder}, x.filter, kOr) : std::string();
          if (const auto * m = x.body->as<Maplet>()) {
            std::string out = "{" + with_binders({x.binder}, m->left, kOr) + ": " +
                              with_binders({x.binder}, m->right, kOr) + " for " + x.binder +
                              " in " + dom;
            if (x.filter) {
              out += " if " + filter;
            }
            return Out{out + "}", kAtom};
          }
          std::string out = "setof(" + with_binders({x.binder}, x.body, kOr) + ", " + x.binder +
                            " in " + dom;
          if (x.filter) {
            out += ", " + filter;
          }
          return Out{out + ")", kAtom};
        },
        [&](const Quantifier & x) -> Out {
          std::vector<std::string> parts;
          std::vector<Ident> names;
          for (const auto & b : x.binders) {
            parts.push_back(b.name + " in " + with_binders(names, b.domain, kOr));
            names.push_back(b.name);
          }
          if (!(x.kind == QuantKind::Exists && x.body->is<BoolLit>() &&
                x.body->as<BoolLit>()->value)) {
            parts.push_back("has=" + with_binders(names, x.body, kOr));
          }
          return Out{std::string(x.kind == QuantKind::ForAll ? "each(" : "some(") +
                       join(parts, ", ") + ")",
                     kAtom};
        },
        [&](const Interval & x) -> Out {
          return Out{"set(range(" + expr(x.lo, kOr) + ", " + expr(x.hi, kAdd) + " + 1))", kAtom};
        },
        [&](const ChannelCall & x) -> Out {
          unsupported(std::string("'") + to_string(x.kind) + "' outside a supported history guard",
                      e);
        },
        [&](const FuncOverride & x) -> Out {
          return Out{"{**" + expr(x.base, kAtom) + ", **" + expr(x.updates, kAtom) + "}", kAtom};
        },
        [&](const Partition &) -> Out { unsupported("partition(...)", e); },
      },
      e.node);
  }

  bool localizing_arg(const ExprPtr & arg) const
  {
    const auto * v = as_var(arg);
    return v && localizing(v->name);
  }

  const GenConfig & cfg_;
  bool bound_;
  bool in_pattern_ = false;
  std::set<Ident> binders_;
};

GenConfig local_config(const analyzer::AnalyzedProgram & prog, const Ident & cls,
                       const Ident & proc, std::set<Ident> bound = {})
{
  GenConfig cfg;
  cfg.prog = &prog;
  cfg.localize_for = std::make_pair(cls, proc);
  cfg.bound_vars = std::move(bound);
  return cfg;
}

bool contains_lv(const analyzer::ProcessClassInfo & ci, const Ident & n)
{
  return std::find(ci.local_variables.begin(), ci.local_variables.end(), n) !=
         ci.local_variables.end();
}

/// Local variables written by one action and read by another.
std::set<Ident> needs_copy(const analyzer::EventInfo & ev, const analyzer::ProcessClassInfo & ci)
{
  const Ident & proc = ev.proc_param;
  auto reads_of = [&](const Action & a) {
    std::set<Ident> out;
    auto scan = [&](const ExprPtr & e) {
      if (!e) {
        return;
      }
      walk(*e, [&](const Expr & n) {
        const auto * app = n.as<Apply>();
        const auto * f = app ? as_var(app->fn) : nullptr;
        if (f && is_var(app->arg, proc) && contains_lv(ci, f->name)) {
          out.insert(f->name);
        }
      });
    };
    std::visit(overloaded{
                 [&](const LocalAssign & x) { scan(x.rhs); },
                 [&](const ChannelAssign & x) {
                   scan(x.dst);
                   scan(x.msg);
                 },
                 [&](const WholeAssign & x) { scan(x.rhs); },
               },
               a.body);
    return out;
  };
  std::set<Ident> out;
  const auto & actions = ev.decl.actions;
  for (size_t i = 0; i < actions.size(); ++i) {
    const auto * w = std::get_if<LocalAssign>(&actions[i].body);
    if (!w) {
      continue;
    }
    for (size_t j = 0; j < actions.size(); ++j) {
      if (i != j && reads_of(actions[j]).count(w->var)) {
        out.insert(w->var);
      }
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string translate_expr(const ExprPtr & e, const GenConfig & cfg)
{
  return Translator(cfg, false).expr(e);
}

std::string translate_expr_bound(const ExprPtr & e, const GenConfig & cfg)
{
  return Translator(cfg, true).expr(e);
}

std::string translate_message(const ExprPtr & msg, const GenConfig & cfg, bool bound)
{
  return Translator(cfg, bound).message(msg);
}

std::string enum_module_name(const Ident & set) { return "enums_" + set; }

std::string GeneratedProgram::single_file() const
{
  // Imports are hoisted and deduplicated; those naming a module merged into
  // this file are dropped.
  std::set<std::string> merged;
  for (const auto & [name, src] : enum_sources) {
    merged.insert(enum_module_name(name));
  }
  for (const auto & [name, src] : class_sources) {
    merged.insert(name);
  }
  std::vector<std::string> imports;
  std::string body;
  auto take = [&](const std::string & src) {
    std::istringstream in(src);
    std::string chunk;
    bool leading = true;
    for (std::string line; std::getline(in, line);) {
      if (leading && line.rfind("from ", 0) == 0) {
        const std::string module = line.substr(5, line.find(' ', 5) - 5);
        if (!merged.count(module) &&
            std::find(imports.begin(), imports.end(), line) == imports.end()) {
          imports.push_back(line);
        }
        continue;
      }
      if (leading && line.empty()) {
        continue;
      }
      leading = false;
      chunk += line + "\n";
    }
    body += (body.empty() ? "" : "\n\n") + chunk;
  };
  for (const auto & [name, src] : enum_sources) {
    take(src);
  }
  for (const auto & [name, src] : class_sources) {
    take(src);
  }
  take(main_source);
  std::string out;
  for (const auto & i : imports) {
    out += i + "\n";
  }
  return out + (imports.empty() ? "" : "\n") + body;
}

// ---------------------------------------------------------------------------
// main

std::string gen_main(const analyzer::AnalyzedProgram & prog)
{
  GenConfig cfg;
  cfg.prog = &prog;
  const std::string in = pad(cfg.indent);
  std::ostringstream os;
  os << "def main():\n";

  for (const auto & c : prog.classes) {
    os << in << "N" << c.name << " = ";
    if (c.enumerated) {
      os << c.explicit_members.size() << "\n";
    } else {
      os << analyzer::Hole{analyzer::Hole::Kind::ClassSize, "N" + c.name, c.name}.marker() << "\n";
    }
  }
  os << "\n";

  for (const auto & c : prog.classes) {
    os << in << c.name << "Set = new(" << c.name << ", num=N" << c.name << ")\n";
    if (c.enumerated) {
      os << in << "(" << join(c.explicit_members, ", ")
         << (c.explicit_members.size() == 1 ? "," : "") << ") = list(" << c.name << "Set)\n";
    }
  }
  os << "\n";

  std::vector<std::string> sets;
  for (const auto & c : prog.classes) {
    sets.push_back(c.name + "Set");
  }
  os << in << "Nodes = set.union(" << join(sets, ", ") << ")\n";

  auto per_class = [&](const Ident & name, const std::vector<analyzer::TopologyEntry> & entries) {
    for (size_t i = 0; i < entries.size(); ++i) {
      GenConfig bound = cfg;
      bound.bound_vars = {entries[i].binder};
      const std::string comp = "{" + entries[i].binder + ":" +
                               translate_expr(entries[i].neighbors, bound) + " for " +
                               entries[i].binder + " in " + entries[i].cls + "Set}";
      if (i == 0) {
        os << in << name << " = " << comp << "\n";
      } else {
        os << in << name << ".update(" << comp << ")\n";
      }
    }
  };
  per_class("network", prog.topology);

  for (const auto & c : prog.typed_constants) {
    if (const auto * def = prog.find_constant_def(c)) {
      if (def->scalar) {
        os << in << c << " = " << translate_expr(def->scalar, cfg) << "\n";
      } else {
        per_class(c, def->per_class);
      }
    } else {
      os << in << c << " = " << analyzer::Hole{analyzer::Hole::Kind::Constant, c, {}}.marker() << "\n";
    }
  }
  os << "\n";

  for (const auto & c : prog.classes) {
    std::vector<std::string> args;
    for (const auto & k : c.local_constants.constants) {
      auto t = prog.constant_types.find(k);
      const bool function = k == "network" || (t != prog.constant_types.end() &&
                                               is_function_type(t->second));
      args.push_back(function ? k + "[proc]" : k);
    }
    std::string tuple = "(" + join(args, ", ") + (args.size() == 1 ? ",)" : ")");
    os << in << "for proc in " << c.name << "Set:\n";
    os << in << in << "setup({proc}, " << tuple << ")\n";
  }
  os << in << "start(Nodes)\n";
  return os.str();
}

std::string gen_enum_module(const Ident & set, const std::vector<Ident> & elems)
{
  std::ostringstream os;
  os << "from enum import Enum\n\n";
  os << "class " << set << "(Enum):\n";
  for (const auto & e : elems) {
    os << "    " << e << " = \"" << e << "\"\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// process classes

namespace
{

void gen_actions(std::ostream & os, const analyzer::AnalyzedProgram & prog,
                 const analyzer::ProcessClassInfo & ci, const analyzer::EventInfo & ev, int depth)
{
  const std::string in = pad(4 * depth);
  std::set<Ident> params;
  for (const auto & p : ev.decl.params) {
    params.insert(p.name);
  }
  GenConfig cfg = local_config(prog, ci.name, ev.proc_param, {});
  cfg.copied = needs_copy(ev, ci);
  size_t lines = 0;
  for (const auto & v : cfg.copied) {
    os << in << "old_" << v << " = deepcopy(self." << v << ")\n";
    ++lines;
  }
  for (const auto & a : ev.decl.actions) {
    if (const auto * la = std::get_if<LocalAssign>(&a.body)) {
      const auto * ov = la->rhs->as<FuncOverride>();
      const auto * base = ov ? ov->base->as<Apply>() : nullptr;
      const auto * upd = ov ? ov->updates->as<SetExt>() : nullptr;
      const bool self_update = base && is_var(base->fn, la->var) &&
                               is_var(base->arg, ev.proc_param) && upd && !upd->elems.empty() &&
                               std::all_of(upd->elems.begin(), upd->elems.end(),
                                           [](const ExprPtr & el) { return el->is<Maplet>(); });
      if (self_update) {
        for (const auto & el : upd->elems) {
          const auto & m = *el->as<Maplet>();
          os << in << "self." << la->var << "[" << translate_expr(m.left, cfg)
             << "] = " << translate_expr(m.right, cfg) << "\n";
          ++lines;
        }
        continue;
      }
      Translator t(cfg, false);
      auto ty = prog.variable_types.find(la->var);
      if (ty != prog.variable_types.end() && is_function_type(ty->second)) {
        t.empty_is_dict = is_function_type(ty->second->as<Binary>()->rhs);
      }
      os << in << "self." << la->var << " = " << t.expr(la->rhs) << "\n";
      ++lines;
    } else if (const auto * ca = std::get_if<ChannelAssign>(&a.body)) {
      if (ca->kind == ChannelKind::Send) {
        os << in << "send(" << translate_message(ca->msg, cfg) << ", to="
           << translate_expr(ca->dst, cfg) << ")\n";
        ++lines;
      }
    }
  }
  if (lines == 0) {
    os << in << "pass\n";
  }
}

}  // namespace

std::string gen_state_method(const analyzer::AnalyzedProgram & prog, const Ident & cls,
                             const Ident & st, const std::vector<analyzer::EventInfo> & events)
{
  const auto * ci = prog.find_class(cls);
  if (!ci) {
    throw UnsupportedConstruct("unknown process class '" + cls + "'", {});
  }
  const bool await = std::any_of(events.begin(), events.end(), [](const analyzer::EventInfo & e) {
    return e.kind == EventKind::Receive;
  });
  const std::string pc = "self.pc == \"" + st + "\"";
  std::ostringstream os;
  os << "def " << st << "():\n";
  if (await) {
    os << "    --" << st << "\n";
  }
  bool first = true;
  for (const auto & ev : events) {
    if (ev.kind == EventKind::Receive) {
      continue;
    }
    std::set<Ident> params;
    for (const auto & p : ev.decl.params) {
      params.insert(p.name);
    }
    const GenConfig dom_cfg = local_config(prog, cls, ev.proc_param);
    const GenConfig guard_cfg = local_config(prog, cls, ev.proc_param, params);
    std::vector<std::string> conds;
    for (const auto & g : ev.conditions) {
      conds.push_back(Translator(guard_cfg, false).expr(g, kAnd));
    }
    const std::string head = first ? (await ? "if await(" : "if(") : "elif(";
    first = false;
    os << "    # event " << ev.decl.name << "\n";
    if (!ev.param_domains.empty()) {
      std::vector<std::string> doms;
      for (const auto & [p, d] : ev.param_domains) {
        doms.push_back(p + " in " + Translator(dom_cfg, false).expr(d, kOr));
      }
      os << "    " << head << pc << " and\n";
      if (conds.empty()) {
        os << "        some(" << join(doms, ", ") << ")):\n";
      } else {
        os << "        some(" << join(doms, ", ") << ",\n";
        os << "            has=" << join(conds, " and ") << ")):\n";
      }
    } else if (conds.size() == 1 && ev.conditions[0]->is<Quantifier>()) {
      // a lone quantified guard puts its body on its own line
      const std::string & q = conds[0];
      const auto cut = q.find(", has=");
      os << "    " << head << pc << " and\n";
      if (cut == std::string::npos) {
        os << "        " << q << "):\n";
      } else {
        os << "        " << q.substr(0, cut + 1) << "\n";
        os << "            " << q.substr(cut + 2) << "):\n";
      }
    } else if (!conds.empty()) {
      os << "    " << head << pc << " and\n";
      os << "        " << join(conds, " and ") << "):\n";
    } else {
      os << "    " << head << pc << "):\n";
    }
    gen_actions(os, prog, *ci, ev, 2);
  }
  if (first) {
    // receive-only state: a vacuous branch keeps the yield point
    os << "    " << (await ? "if await(False):" : "if(False):") << "\n";
    os << "        pass\n";
  }
  os << "    elif(self.pc != \"" << st << "\"):\n";
  os << "        pass\n";
  return os.str();
}

std::string gen_receive_method(const analyzer::AnalyzedProgram & prog, const Ident & cls,
                               const analyzer::EventInfo & ev)
{
  const auto * ci = prog.find_class(cls);
  if (!ci || ev.kind != EventKind::Receive) {
    throw UnsupportedConstruct("not a receive event of '" + cls + "'", ev.decl.span);
  }
  const GenConfig cfg = local_config(prog, cls, ev.proc_param);
  std::ostringstream os;
  os << "def receive(msg=" << translate_message(ev.receive_message, cfg)
     << ", from_=" << translate_expr(ev.receive_source, cfg) << ",\n";
  os << "            at=(" << ev.state << ", )):\n";
  gen_actions(os, prog, *ci, ev, 1);
  return os.str();
}

namespace
{
std::string indent_block(const std::string & text, int n)
{
  std::istringstream is(text);
  std::string line, out;
  while (std::getline(is, line)) {
    out += line.empty() ? "\n" : pad(n) + line + "\n";
  }
  return out;
}
}  // namespace

std::string gen_process_class(const analyzer::AnalyzedProgram & prog, const Ident & cls)
{
  const auto * ci = prog.find_class(cls);
  if (!ci) {
    throw UnsupportedConstruct("unknown process class '" + cls + "'", {});
  }
  std::vector<std::string> methods;

  {
    std::ostringstream os;
    os << "def setup(" << join(ci->local_constants.constants, ", ") << "):\n";
    if (ci->initial_values.empty()) {
      os << "    pass\n";
    }
    for (const auto & iv : ci->initial_values) {
      GenConfig cfg = local_config(prog, cls, iv.binder);
      Translator t(cfg, false);
      auto ty = prog.variable_types.find(iv.var);
      if (ty != prog.variable_types.end() && is_function_type(ty->second)) {
        t.empty_is_dict = is_function_type(ty->second->as<Binary>()->rhs);
      }
      os << "    self." << iv.var << " = " << t.expr(iv.expr) << "\n";
    }
    methods.push_back(os.str());
  }

  std::vector<Ident> live;  // states with a method
  for (const auto & st : ci->states) {
    if (st != analyzer::kDoneState) {
      live.push_back(st);
    }
  }
  {
    std::ostringstream os;
    std::vector<std::string> entries;
    for (const auto & st : live) {
      entries.push_back("\"" + st + "\":" + st);
    }
    os << "def run():\n";
    os << "    stateFunctions = {" << join(entries, ", ") << "}\n";
    os << "    while (self.pc != \"" << analyzer::kDoneState << "\"):\n";
    os << "        stateFunctions[self.pc]()\n";
    methods.push_back(os.str());
  }

  bool copies = false;
  for (const auto & st : live) {
    const auto & events = ci->events_in(st);
    methods.push_back(gen_state_method(prog, cls, st, events));
    for (const auto & ev : events) {
      copies = copies || !needs_copy(ev, *ci).empty();
    }
  }
  for (const auto & st : live) {
    for (const auto & ev : ci->events_in(st)) {
      if (ev.kind == EventKind::Receive) {
        methods.push_back(gen_receive_method(prog, cls, ev));
      }
    }
  }

  std::ostringstream os;
  bool header = false;
  if (copies) {
    os << "from copy import deepcopy\n";
    header = true;
  }
  for (const auto & s : ci->local_constants.enum_sets) {
    os << "from " << enum_module_name(s) << " import " << s << "\n";
    header = true;
  }
  if (header) {
    os << "\n";
  }
  os << "class " << cls << "(process):\n";
  for (size_t i = 0; i < methods.size(); ++i) {
    os << (i ? "\n" : "") << indent_block(methods[i], 4);
  }
  return os.str();
}

Result<GeneratedProgram> generate(const analyzer::AnalyzedProgram & prog)
{
  GeneratedProgram out;
  try {
    std::ostringstream main;
    for (const auto & c : prog.classes) {
      main << "from " << c.name << " import " << c.name << "\n";
    }
    for (const auto & e : prog.enums) {
      main << "from " << enum_module_name(e.set) << " import " << e.set << "\n";
    }
    main << "\n" << gen_main(prog);
    out.main_source = main.str();
    for (const auto & c : prog.classes) {
      out.class_sources[c.name] = gen_process_class(prog, c.name);
    }
    for (const auto & e : prog.enums) {
      out.enum_sources[e.set] = gen_enum_module(e.set, e.elems);
    }
    for (const auto & h : prog.holes()) {
      out.holes.emplace_back(h.name, h.marker());
    }
  } catch (const UnsupportedConstruct & ex) {
    return Diagnostics{make_error("E_UNSUPPORTED", ex.what(), ex.span())};
  }
  return out;
}

}  // namespace lb::codegen
