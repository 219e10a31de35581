#include "doctest.h"
#include "lb/cli/commands.hpp"
#include "support.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace lb;
using namespace lb::cli;
namespace fs = std::filesystem;

namespace
{

struct Capture
{
  std::ostringstream out, err;
  Io io() { return Io{out, err, false}; }
};

struct TempDir
{
  fs::path path;
  TempDir()
  {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("lb_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string & name, const std::string & text) const
  {
    const fs::path p = path / name;
    std::ofstream(p, std::ios::binary) << text;
    return p.string();
  }
};

const std::string kCtx = test::source_path(test::kFixtureContext);
const std::string kMch = test::source_path(test::kFixtureMachine);
const std::string kCfg = test::source_path("models/request_answer/nq3.cfg");

std::string negative(const char * name)
{
  return test::source_path(std::string("tests/fixtures/negative/") + name + ".lbm");
}

}  // namespace

TEST_CASE("config with sizes and per-process values")
{
  auto r = load_config_text("size.Q = 3\navailableResources.q1 = 5\navailableResources.q2 = 7\n"
                            "availableResources.q3 = 11\n",
                            "c.cfg");
  REQUIRE(r.ok());
  CHECK(r->class_sizes.at("Q") == 3);
  CHECK(r->constant_entries.at("availableResources").size() == 3);
  CHECK(to_source(r->constant_entries.at("availableResources").at("q2")) == "7");
}

TEST_CASE("empty config is valid when the model has no holes")
{
  auto r = load_config_text("", "empty.cfg");
  REQUIRE(r.ok());
  CHECK(r->class_sizes.empty());
  CHECK(r->seed == 0);
  CHECK(r->max_steps == 10000);
  CHECK_FALSE(r->lossy);
  const auto prog = test::analyze_dir("tests/fixtures/single");
  CHECK(sim::init_state(prog, r.value()).ok());
}

TEST_CASE("class sizes must be natural numbers")
{
  for (const char * bad : {"size.Q = -1", "size.Q = x", "size.Q = 1.5", "size = 3"}) {
    auto r = load_config_text(std::string("# sizes\n") + bad + "\n", "c.cfg");
    INFO(bad);
    REQUIRE_FALSE(r.ok());
    CHECK(r.diagnostics().front().code == "E_CONFIG_PARSE");
    CHECK(r.diagnostics().front().span.line == 2);
  }
}

TEST_CASE("config values use the expression syntax")
{
  auto r = load_config_text("availableResources = {q1 |-> 5, q2 |-> 7}  # whole map\n", "c.cfg");
  REQUIRE(r.ok());
  CHECK(r->constant_values.at("availableResources")->is<SetExt>());
  CHECK_FALSE(load_config_text("x = 1 +\n", "c.cfg").ok());
  CHECK_FALSE(load_config_text("no equals sign\n", "c.cfg").ok());
}

TEST_CASE("unknown config keys warn")
{
  auto cfg = load_config_text(test::fixture_config_text(1) + "bogus = 3\n", "c.cfg");
  REQUIRE(cfg.ok());
  auto s = sim::init_state(test::fixture(), cfg.value());
  REQUIRE(s.ok());
  REQUIRE(s.diagnostics().size() == 1);
  CHECK(s.diagnostics().front().code == "W_UNKNOWN_CONFIG_KEY");
}

TEST_CASE("check on the fixture")
{
  Capture c;
  CHECK(cmd_check(kCtx, kMch, false, c.io()) == kExitOk);
  CHECK(c.out.str() == "ok: 2 process classes, 7 events\nholes: NQ, availableResources\n");
  CHECK(c.err.str().empty());
}

TEST_CASE("check reports the violated rule")
{
  Capture c;
  CHECK(cmd_check(kCtx, negative("foreign_assign"), false, c.io()) == kExitDiagnostics);
  CHECK(c.err.str().find("error[E_FOREIGN_ASSIGN]") != std::string::npos);
  CHECK(c.err.str().find("foreign_assign.lbm:") != std::string::npos);
}

TEST_CASE("check in JSON")
{
  Capture c;
  CHECK(cmd_check(kCtx, negative("nonlocal_guard"), true, c.io()) == kExitDiagnostics);
  const auto j = nlohmann::json::parse(c.out.str());
  CHECK(j["ok"] == false);
  REQUIRE(j["diagnostics"].size() == 1);
  CHECK(j["diagnostics"][0]["code"] == "E_NONLOCAL_REF");
  CHECK(j["diagnostics"][0]["line"].get<int>() > 0);

  Capture ok;
  CHECK(cmd_check(kCtx, kMch, true, ok.io()) == kExitOk);
  const auto k = nlohmann::json::parse(ok.out.str());
  CHECK(k["holes"].size() == 2);
  CHECK(k["holes"][0]["name"] == "NQ");
}

TEST_CASE("missing files exit 2")
{
  Capture c;
  CHECK(cmd_check("/nonexistent/c.lbc", kMch, false, c.io()) == kExitInput);
  CHECK(c.err.str().find("E_IO") != std::string::npos);
}

TEST_CASE("syntax errors exit 2")
{
  TempDir t;
  const std::string bad = t.file("bad.lbm", "MACHINE M SEES C VARIABLES x INVARIANTS @x_typing: x in ) END");
  Capture c;
  CHECK(cmd_check(kCtx, bad, false, c.io()) == kExitInput);
  CHECK(c.err.str().find("E_SYNTAX") != std::string::npos);
}

TEST_CASE("compile writes every file")
{
  TempDir t;
  Capture c;
  CompileOptions o;
  o.out_dir = (t.path / "out").string();
  REQUIRE(cmd_compile(kCtx, kMch, o, c.io()) == kExitOk);
  for (const char * f : {"main.da", "P.da", "Q.da", "enums_MessagePrefixes.py", "holes.txt"}) {
    CHECK_MESSAGE(fs::exists(t.path / "out" / f), f);
  }
  const std::string main = test::read_file((t.path / "out" / "main.da").string());
  CHECK(test::tokens(test::from_line(main, "def main():")) ==
        test::tokens(test::read_file(test::source_path("tests/golden/main.txt"))));
  CHECK(c.out.str().find("to be configured by hand") != std::string::npos);
  CHECK(test::read_file((t.path / "out" / "holes.txt").string()) ==
        "NQ\t#NQ - to be configured\navailableResources\t#availableResources - to be configured\n");
}

TEST_CASE("compile into one file")
{
  TempDir t;
  Capture c;
  CompileOptions o;
  o.out_dir = t.path.string();
  o.single_file = true;
  REQUIRE(cmd_compile(kCtx, kMch, o, c.io()) == kExitOk);
  CHECK(fs::exists(t.path / "program.da"));
  CHECK_FALSE(fs::exists(t.path / "main.da"));
}

TEST_CASE("compile of a failing model writes nothing")
{
  TempDir t;
  Capture c;
  CompileOptions o;
  o.out_dir = (t.path / "out").string();
  CHECK(cmd_compile(kCtx, negative("untyped_param"), o, c.io()) == kExitDiagnostics);
  CHECK_FALSE(fs::exists(t.path / "out"));
}

TEST_CASE("unwritable output exits 3")
{
  TempDir t;
  const std::string blocker = t.file("blocker", "x");
  Capture c;
  CompileOptions o;
  o.out_dir = blocker;
  CHECK(cmd_compile(kCtx, kMch, o, c.io()) == kExitWrite);
}

TEST_CASE("compile is reproducible")
{
  TempDir t;
  Capture c1, c2;
  CompileOptions a, b;
  a.out_dir = (t.path / "a").string();
  b.out_dir = (t.path / "b").string();
  REQUIRE(cmd_compile(kCtx, kMch, a, c1.io()) == kExitOk);
  REQUIRE(cmd_compile(kCtx, kMch, b, c2.io()) == kExitOk);
  for (const auto & e : fs::directory_iterator(t.path / "a")) {
    const auto other = t.path / "b" / e.path().filename();
    CHECK(test::read_file(e.path().string()) == test::read_file(other.string()));
  }
}

TEST_CASE("simulate the fixture")
{
  Capture c;
  SimulateOptions o;
  o.config_path = kCfg;
  o.seed = 42;
  CHECK(cmd_simulate(kCtx, kMch, o, c.io()) == kExitOk);
  CHECK(c.out.str().find("outcome: Terminated\n") != std::string::npos);
  CHECK(c.out.str().find("result = {p |-> {q1 |-> 5, q2 |-> 7, q3 |-> 11}}") != std::string::npos);
}

TEST_CASE("simulate writes identical traces for identical inputs")
{
  TempDir t;
  std::string traces[2];
  for (int i = 0; i < 2; ++i) {
    Capture c;
    SimulateOptions o;
    o.config_path = kCfg;
    o.seed = 42;
    o.trace_path = (t.path / ("t" + std::to_string(i) + ".json")).string();
    REQUIRE(cmd_simulate(kCtx, kMch, o, c.io()) == kExitOk);
    traces[i] = test::read_file(*o.trace_path);
  }
  CHECK(traces[0] == traces[1]);
  CHECK(nlohmann::json::parse(traces[0])["trace"].size() == 17);
}

TEST_CASE("simulate exit codes")
{
  {
    Capture c;
    SimulateOptions o;
    o.config_path = kCfg;
    o.max_steps = 1;
    CHECK(cmd_simulate(kCtx, kMch, o, c.io()) == kExitStepLimit);
  }
  {
    Capture c;
    CHECK(cmd_simulate(kCtx, kMch, SimulateOptions{}, c.io()) == kExitDiagnostics);
    CHECK(c.err.str().find("E_MISSING_CONFIG") != std::string::npos);
    CHECK(c.err.str().find("availableResources") != std::string::npos);
  }
  {
    Capture c;
    SimulateOptions o;
    o.config_path = "/nonexistent.cfg";
    CHECK(cmd_simulate(kCtx, kMch, o, c.io()) == kExitInput);
  }
  {
    Capture c;
    SimulateOptions o;
    o.config_path = kCfg;
    o.lossy = 1.5;
    CHECK(cmd_simulate(kCtx, kMch, o, c.io()) == kExitInput);
  }
  {
    Capture c;
    SimulateOptions o;
    o.config_path = kCfg;
    o.lossy = 1.0;
    o.seed = 2;
    CHECK(cmd_simulate(kCtx, kMch, o, c.io()) == kExitStepLimit);
  }
}

TEST_CASE("simulate summary in JSON")
{
  Capture c;
  SimulateOptions o;
  o.config_path = kCfg;
  o.json = true;
  CHECK(cmd_simulate(kCtx, kMch, o, c.io()) == kExitOk);
  const auto j = nlohmann::json::parse(c.out.str());
  CHECK(j["outcome"] == "Terminated");
  CHECK(j["counters"]["sent"] == 6);
  CHECK(j["counters"]["received"] == 6);
}

TEST_CASE("LB_COLOR")
{
  ::setenv("LB_COLOR", "always", 1);
  CHECK(use_color(1));
  ::setenv("LB_COLOR", "never", 1);
  CHECK_FALSE(use_color(1));
  ::unsetenv("LB_COLOR");
  const Diagnostic d = make_error("E_X", "m");
  CHECK(format_diagnostic(d, true) != format_diagnostic(d, false));
}
