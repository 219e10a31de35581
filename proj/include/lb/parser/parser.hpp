// lb/parser/parser.hpp - recursive-descent parser for LB contexts and machines
#pragma once

#include <string>
#include <string_view>

#include "lb/core/ast.hpp"
#include "lb/core/diagnostic.hpp"

namespace lb::parser
{

/// Parses a `.lbc` context. Declarations keep source order; trailing `@Name`
/// markers on an axiom line become its annotations.
Result<ContextModel> parse_context(std::string_view text, const std::string & file = "<context>");

/// Parses a `.lbm` machine. Every declared variable must be assigned by the
/// initialisation (E_UNINITIALISED otherwise).
Result<MachineModel> parse_machine(std::string_view text, const std::string & file = "<machine>");

/// Parses a single predicate or expression.
Result<ExprPtr> parse_expr(std::string_view text, const std::string & file = "<expr>");

/// Reserved words that cannot be used as identifiers.
bool is_reserved(std::string_view word);

}  // namespace lb::parser
