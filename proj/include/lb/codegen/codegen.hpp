// lb/codegen/codegen.hpp - DistAlgo-style program text from an analyzed LB model
#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lb/analyzer/analyzer.hpp"

namespace lb::codegen
{

/// Raised for constructs the analyzer should already have excluded.
class UnsupportedConstruct : public std::runtime_error
{
public:
  UnsupportedConstruct(const std::string & what, SourceSpan span)
  : std::runtime_error(what), span_(std::move(span))
  {
  }
  const SourceSpan & span() const { return span_; }

private:
  SourceSpan span_;
};

struct GenConfig
{
  std::set<Ident> bound_vars;
  /// (class, process parameter): enables the `f(proc) -> self.f` rewrite.
  std::optional<std::pair<Ident, Ident>> localize_for;
  int indent = 4;
  /// Program being translated. Supplies states, classes and local names.
  const analyzer::AnalyzedProgram * prog = nullptr;
  /// Local variables read through a pre-event copy (`old_x`).
  std::set<Ident> copied;
};

struct GeneratedProgram
{
  std::string main_source;
  std::map<Ident, std::string> class_sources;
  std::map<Ident, std::string> enum_sources;
  std::vector<std::pair<Ident, std::string>> holes;  // (name, marker)

  /// All files concatenated: enums, classes, then main.
  std::string single_file() const;
};

std::string translate_expr(const ExprPtr & e, const GenConfig & cfg);

/// Like translate_expr, but variables in cfg.bound_vars render as `_x`.
std::string translate_expr_bound(const ExprPtr & e, const GenConfig & cfg);

/// A message value as a tuple with its prefix first: `(S.m, )`, `(S.m, r)`.
std::string translate_message(const ExprPtr & msg, const GenConfig & cfg, bool bound = false);

/// The `def main():` function.
std::string gen_main(const analyzer::AnalyzedProgram & prog);

std::string gen_enum_module(const Ident & set, const std::vector<Ident> & elems);

/// One state method at column 0.
std::string gen_state_method(const analyzer::AnalyzedProgram & prog, const Ident & cls,
                             const Ident & st, const std::vector<analyzer::EventInfo> & events);

/// One receive handler at column 0.
std::string gen_receive_method(const analyzer::AnalyzedProgram & prog, const Ident & cls,
                               const analyzer::EventInfo & ev);

std::string gen_process_class(const analyzer::AnalyzedProgram & prog, const Ident & cls);

/// Whole program. Fails with E_UNSUPPORTED for untranslatable constructs.
Result<GeneratedProgram> generate(const analyzer::AnalyzedProgram & prog);

/// File name of the module holding an enumerated set.
std::string enum_module_name(const Ident & set);

}  // namespace lb::codegen
