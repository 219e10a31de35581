// lb/core/diagnostic.cpp
#include "lb/core/diagnostic.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace lb
{

bool has_errors(const Diagnostics & diags)
{
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic & d) {
    return d.severity == Severity::Error;
  });
}

Diagnostic make_error(std::string code, std::string message, SourceSpan span)
{
  return Diagnostic{Severity::Error, std::move(code), std::move(message), std::move(span)};
}

Diagnostic make_warning(std::string code, std::string message, SourceSpan span)
{
  return Diagnostic{Severity::Warning, std::move(code), std::move(message), std::move(span)};
}

std::string format_diagnostic(const Diagnostic & d, bool color)
{
  std::ostringstream os;
  if (!d.span.file.empty()) {
    os << d.span.file << ':';
  }
  if (d.span.valid()) {
    os << d.span.line << ':' << d.span.column << ':';
  }
  if (os.tellp() > 0) {
    os << ' ';
  }
  const bool err = d.severity == Severity::Error;
  if (color) {
    os << (err ? "\x1b[1;31m" : "\x1b[1;35m");
  }
  os << (err ? "error" : "warning");
  if (color) {
    os << "\x1b[0m";
  }
  os << '[' << d.code << "]: " << d.message;
  return os.str();
}

std::string diagnostics_to_json(const Diagnostics & diags)
{
  auto arr = nlohmann::json::array();
  for (const auto & d : diags) {
    arr.push_back({
      {"severity", d.severity == Severity::Error ? "error" : "warning"},
      {"code", d.code},
      {"message", d.message},
      {"file", d.span.file},
      {"line", d.span.line},
      {"column", d.span.column},
    });
  }
  return arr.dump(2);
}

}  // namespace lb
