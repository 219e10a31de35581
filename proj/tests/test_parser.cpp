#include "doctest.h"
#include "expr_gen.hpp"
#include "lb/parser/lexer.hpp"
#include "lb/parser/parser.hpp"
#include "support.hpp"

using namespace lb;

namespace
{

ExprPtr parse(const std::string & text)
{
  auto r = parser::parse_expr(text);
  REQUIRE_MESSAGE(r.ok(), text);
  return r.value();
}

std::vector<std::string> codes(const Diagnostics & ds)
{
  std::vector<std::string> out;
  for (const auto & d : ds) {
    out.push_back(d.code);
  }
  return out;
}

bool contains(const std::vector<Ident> & xs, const char * x)
{
  return std::find(xs.begin(), xs.end(), x) != xs.end();
}

void check_round_trip(const ExprPtr & e)
{
  const std::string text = to_source(e);
  auto again = parser::parse_expr(text);
  INFO(text);
  REQUIRE(again.ok());
  CHECK(structurally_equal(e, again.value()));
  CHECK(to_source(again.value()) == text);
}

const char * kMinimalMachine = R"(MACHINE M
SEES C
VARIABLES channels pc
INVARIANTS
  @channels_typing: channels in Channels
  @pc_typing: pc in Nodes --> States
EVENTS
  initialisation
  begin
    @act1: channels := emptyChannel
    @act2: pc := {proc . proc in A | proc |-> s0}
  end
END
)";

}  // namespace

TEST_CASE("fixture context parses with its sets and constants")
{
  auto r = parser::parse_context(test::fixture_context_text(), test::kFixtureContext);
  REQUIRE(r.ok());
  const ContextModel & c = r.value();
  CHECK(c.name == "CONTEXT_CM");
  CHECK(c.sets == std::vector<Ident>{"Nodes", "States", "Messages", "MessagePrefixes"});
  for (const char * k : {"network", "p", "Q", "availableResources"}) {
    CHECK_MESSAGE(contains(c.constants, k), k);
  }
  CHECK(c.constants.front() == "network");
  CHECK(c.axioms.front().label == "Nodes");
}

TEST_CASE("empty sections give an empty context")
{
  auto r = parser::parse_context("CONTEXT C SETS S CONSTANTS AXIOMS END");
  REQUIRE(r.ok());
  CHECK(r->name == "C");
  CHECK(r->sets == std::vector<Ident>{"S"});
  CHECK(r->constants.empty());
  CHECK(r->axioms.empty());
}

TEST_CASE("trailing @Name markers become annotations")
{
  auto r = parser::parse_context(
    "CONTEXT C SETS MessagePrefixes CONSTANTS request answer AXIOMS\n"
    "@MessagePrefixes: partition(MessagePrefixes, {request}, {answer}) @P @Q\nEND");
  REQUIRE(r.ok());
  REQUIRE(r->axioms.size() == 1);
  CHECK(r->axioms[0].annotations == std::vector<Ident>{"P", "Q"});
  CHECK(r->axioms[0].predicate->is<Partition>());
}

TEST_CASE("unicode symbols are accepted as aliases")
{
  const ExprPtr a = parse("network ∈ Nodes → ℙ(Nodes)");
  const ExprPtr b = parse("network in Nodes --> POW(Nodes)");
  CHECK(structurally_equal(a, b));
  CHECK(structurally_equal(parse("{proc · proc ∈ P | proc ↦ sr}"), parse("{proc . proc in P | proc |-> sr}")));
  CHECK(structurally_equal(parse("∀q · q ∈ S ⇒ q ≠ 0 ∧ ¬(q = 1)"),
                           parse("!q . q in S => q /= 0 & not(q = 1)")));
}

TEST_CASE("fixture machine parses")
{
  auto r = parser::parse_machine(test::fixture_machine_text(), test::kFixtureMachine);
  REQUIRE(r.ok());
  const MachineModel & m = r.value();
  CHECK(m.name == "CM");
  CHECK(m.sees == "CONTEXT_CM");
  CHECK(m.variables == std::vector<Ident>{"channels", "pc", "result"});
  CHECK(m.initialisation.size() == 3);
  std::vector<Ident> names;
  for (const auto & e : m.events) {
    names.push_back(e.name);
  }
  CHECK(names == std::vector<Ident>{"sendRequest", "stopSending", "receiveAnswer", "terminate",
                                    "receiveRequest", "sendAnswer", "terminateQ"});
}

TEST_CASE("receive event shape")
{
  auto r = parser::parse_machine(test::fixture_machine_text(), test::kFixtureMachine);
  REQUIRE(r.ok());
  const EventDecl * e = r->find_event("receiveAnswer");
  REQUIRE(e);
  CHECK(e->params.size() == 4);
  CHECK(e->params[0].name == "proc");
  REQUIRE(e->actions.size() == 2);
  const auto * ch = std::get_if<ChannelAssign>(&e->actions[0].body);
  REQUIRE(ch);
  CHECK(ch->kind == ChannelKind::Receive);
  const auto * la = std::get_if<LocalAssign>(&e->actions[1].body);
  REQUIRE(la);
  CHECK(la->var == "result");
  CHECK(la->proc == "proc");
  CHECK(la->rhs->is<FuncOverride>());
}

TEST_CASE("parser accepts two channel actions; classification rejects them")
{
  std::string text = kMinimalMachine;
  text.replace(text.find("END\n"), 4,
               "  event twice any proc q where\n"
               "    @grd1: proc in A\n    @grd2: pc(proc) = s0\n    @grd3: q in A\n"
               "  then\n"
               "    @act1: channels := send(channels |-> (proc |-> q) |-> m)\n"
               "    @act2: channels := receive(channels |-> (q |-> proc) |-> m)\n"
               "  end\nEND\n");
  auto r = parser::parse_machine(text);
  REQUIRE(r.ok());
  CHECK(classify_event(r->events.at(0)).diagnostics().front().code == "E_AMBIGUOUS_KIND");
}

TEST_CASE("history query parse")
{
  const ExprPtr e = parse("sent(channels |-> (p |-> q) |-> (request |-> 0)) = 1");
  const ExprPtr expected = binary(
    BinOp::Eq,
    make_expr(ChannelCall{ChannelKind::Sent, var("p"), var("q"), maplet(var("request"), int_lit(0))}),
    int_lit(1));
  CHECK(structurally_equal(e, expected));
}

TEST_CASE("comprehension parse")
{
  const ExprPtr e = parse("{proc . proc : P | proc |-> sr}");
  const ExprPtr expected =
    make_expr(SetComprehension{"proc", var("P"), nullptr, maplet(var("proc"), var("sr"))});
  CHECK(structurally_equal(e, expected));
}

TEST_CASE("comprehension with a filter")
{
  const auto * c = parse("{x . x in S & x > 2 | x + 1}")->as<SetComprehension>();
  REQUIRE(c);
  REQUIRE(c->filter);
  CHECK(to_source(c->filter) == "x > 2");
}

TEST_CASE("arithmetic precedence")
{
  CHECK(structurally_equal(parse("1 + 2 * 3"),
                           binary(BinOp::Add, int_lit(1), binary(BinOp::Mul, int_lit(2), int_lit(3)))));
  CHECK(structurally_equal(parse("1 - 2 - 3"),
                           binary(BinOp::Sub, binary(BinOp::Sub, int_lit(1), int_lit(2)), int_lit(3))));
}

TEST_CASE("logical precedence: quantifier weakest, then =>, or, &, not")
{
  const auto * imp = parse("a = 1 or b = 2 & c = 3 => d = 4")->as<Binary>();
  REQUIRE(imp);
  CHECK(imp->op == BinOp::Implies);
  const auto * disj = imp->lhs->as<Binary>();
  REQUIRE(disj);
  CHECK(disj->op == BinOp::Or);
  CHECK(disj->rhs->as<Binary>()->op == BinOp::And);

  const auto * q = parse("#x . x in S & (x = 1 or x = 2)")->as<Quantifier>();
  REQUIRE(q);
  CHECK(q->body->as<Binary>()->op == BinOp::Or);
}

TEST_CASE("application binds tighter than maplet")
{
  const auto * m = parse("f(x) |-> g(y)")->as<Maplet>();
  REQUIRE(m);
  CHECK(m->left->is<Apply>());
  CHECK(m->right->is<Apply>());
}

TEST_CASE("syntax errors carry a span and no model")
{
  auto r = parser::parse_expr("a + * b", "e.txt");
  REQUIRE_FALSE(r.ok());
  const Diagnostic & d = r.diagnostics().front();
  CHECK(d.code == "E_SYNTAX");
  CHECK(d.span.file == "e.txt");
  CHECK(d.span.line == 1);
  CHECK(d.span.column == 5);
}

TEST_CASE("duplicate declarations are rejected")
{
  auto r = parser::parse_context("CONTEXT C SETS S S CONSTANTS AXIOMS END");
  REQUIRE_FALSE(r.ok());
  CHECK(codes(r.diagnostics()) == std::vector<std::string>{"E_DUPLICATE_DECL"});

  auto r2 = parser::parse_context("CONTEXT C SETS CONSTANTS a AXIOMS @x: a = 1 @x: a = 2 END");
  REQUIRE_FALSE(r2.ok());
  CHECK(r2.diagnostics().front().code == "E_DUPLICATE_DECL");
}

TEST_CASE("unknown section keyword")
{
  auto r = parser::parse_context("CONTEXT C THEOREMS END");
  REQUIRE_FALSE(r.ok());
  CHECK(r.diagnostics().front().code == "E_UNKNOWN_KEYWORD");
}

TEST_CASE("initialisation must cover every variable")
{
  std::string text = kMinimalMachine;
  text.replace(text.find("VARIABLES channels pc"), 21, "VARIABLES channels pc extra");
  auto r = parser::parse_machine(text);
  REQUIRE_FALSE(r.ok());
  CHECK(codes(r.diagnostics()) == std::vector<std::string>{"E_UNINITIALISED"});
}

TEST_CASE("declaration lists keep source order")
{
  auto r = parser::parse_context("CONTEXT C SETS Z A M CONSTANTS c b a AXIOMS @k: a = 1 @j: b = 2 END");
  REQUIRE(r.ok());
  CHECK(r->sets == std::vector<Ident>{"Z", "A", "M"});
  CHECK(r->constants == std::vector<Ident>{"c", "b", "a"});
  CHECK(r->axioms[0].label == "k");
  CHECK(r->axioms[1].label == "j");
}

TEST_CASE("lexer skips comments and folds unicode")
{
  Diagnostics ds;
  const auto toks = parser::tokenize("a ∪ b // trailing\n@grd1: x", "t", ds);
  CHECK(ds.empty());
  REQUIRE(toks.size() == 6);
  CHECK(toks[1].kind == parser::Tok::Union);
  CHECK(toks[3].kind == parser::Tok::Label);
  CHECK(toks[3].span.line == 2);
}

TEST_CASE("round trip over every expression of the fixture")
{
  auto c = parser::parse_context(test::fixture_context_text(), test::kFixtureContext);
  auto m = parser::parse_machine(test::fixture_machine_text(), test::kFixtureMachine);
  REQUIRE(c.ok());
  REQUIRE(m.ok());
  for (const auto & ax : c->axioms) {
    check_round_trip(ax.predicate);
  }
  for (const auto & inv : m->invariants) {
    check_round_trip(inv.expr);
  }
  for (const auto & ev : m->events) {
    for (const auto & g : ev.guards) {
      check_round_trip(g.expr);
    }
    for (const auto & a : ev.actions) {
      if (const auto * la = std::get_if<LocalAssign>(&a.body)) {
        check_round_trip(la->rhs);
      }
    }
  }
}

TEST_CASE("round trip over negative fixtures and random trees")
{
  for (const char * f : {"nonlocal_guard", "missing_pc_guard", "untyped_param", "foreign_assign",
                         "recv_general_guard"}) {
    auto m = parser::parse_machine(
      test::read_file(test::source_path(std::string("tests/fixtures/negative/") + f + ".lbm")));
    REQUIRE(m.ok());
    for (const auto & ev : m->events) {
      for (const auto & g : ev.guards) {
        check_round_trip(g.expr);
      }
    }
  }
  test::ExprGen gen(2024);
  for (int i = 0; i < 2000; ++i) {
    check_round_trip(gen.gen(5));
  }
}

TEST_CASE("parsing is deterministic")
{
  const std::string text = test::fixture_machine_text();
  auto a = parser::parse_machine(text);
  auto b = parser::parse_machine(text);
  REQUIRE(a.ok());
  REQUIRE(b.ok());
  REQUIRE(a->events.size() == b->events.size());
  for (size_t i = 0; i < a->events.size(); ++i) {
    for (size_t g = 0; g < a->events[i].guards.size(); ++g) {
      CHECK(structurally_equal(a->events[i].guards[g].expr, b->events[i].guards[g].expr));
    }
  }
}
