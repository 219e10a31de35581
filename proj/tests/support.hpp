// tests/support.hpp - shared helpers for the unit and acceptance suites
#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lb/analyzer/analyzer.hpp"
#include "lb/cli/commands.hpp"
#include "lb/sim/sim.hpp"

namespace lb::test
{

inline std::string source_path(const std::string & rel) { return std::string(LB_SOURCE_DIR) + "/" + rel; }

inline std::string read_file(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const std::string kFixtureContext = "models/request_answer/context.lbc";
inline const std::string kFixtureMachine = "models/request_answer/machine.lbm";

inline std::string fixture_context_text() { return read_file(source_path(kFixtureContext)); }
inline std::string fixture_machine_text() { return read_file(source_path(kFixtureMachine)); }

inline Result<analyzer::AnalyzedProgram> analyze_fixture(const std::string & machine_text)
{
  return analyzer::analyze_sources(fixture_context_text(), kFixtureContext, machine_text,
                                   kFixtureMachine);
}

/// The request/answer fixture, analyzed once.
inline const analyzer::AnalyzedProgram & fixture()
{
  static const analyzer::AnalyzedProgram prog = [] {
    auto r = analyze_fixture(fixture_machine_text());
    if (!r) {
      throw std::runtime_error("fixture does not analyze: " +
                               format_diagnostic(r.diagnostics().front()));
    }
    return std::move(r).value();
  }();
  return prog;
}

/// Parses and analyzes `<dir>/context.lbc` and `<dir>/machine.lbm`.
inline analyzer::AnalyzedProgram analyze_dir(const std::string & rel_dir)
{
  const std::string c = rel_dir + "/context.lbc";
  const std::string m = rel_dir + "/machine.lbm";
  auto r = analyzer::analyze_sources(read_file(source_path(c)), c, read_file(source_path(m)), m);
  if (!r) {
    throw std::runtime_error(rel_dir + " does not analyze: " +
                             format_diagnostic(r.diagnostics().front()));
  }
  return std::move(r).value();
}

/// The i-th resource value handed to q_i: distinct primes so mixups show.
inline long long resource_of(int i)
{
  static const long long primes[] = {5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  return primes[(i - 1) % 10] + 100 * ((i - 1) / 10);
}

/// Configuration text for NQ answering processes.
inline std::string fixture_config_text(int nq)
{
  std::string out = "size.Q = " + std::to_string(nq) + "\n";
  for (int i = 1; i <= nq; ++i) {
    out += "availableResources.q" + std::to_string(i) + " = " + std::to_string(resource_of(i)) + "\n";
  }
  if (nq == 0) {
    out += "availableResources = {}\n";
  }
  return out;
}

inline sim::SimConfig fixture_config(int nq, std::uint64_t seed = 0)
{
  auto r = cli::load_config_text(fixture_config_text(nq), "<test>");
  if (!r) {
    throw std::runtime_error("bad test config: " + format_diagnostic(r.diagnostics().front()));
  }
  sim::SimConfig cfg = r.value();
  cfg.seed = seed;
  return cfg;
}

/// Whitespace-separated tokens: the normal form used for golden comparison.
inline std::vector<std::string> tokens(const std::string & text)
{
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string t; in >> t;) {
    out.push_back(t);
  }
  return out;
}

/// Text from the first line starting with `marker` to the end.
inline std::string from_line(const std::string & text, const std::string & marker)
{
  size_t pos = 0;
  while (pos < text.size()) {
    if (text.compare(pos, marker.size(), marker) == 0) {
      return text.substr(pos);
    }
    pos = text.find('\n', pos);
    if (pos == std::string::npos) {
      break;
    }
    ++pos;
  }
  return {};
}

}  // namespace lb::test
