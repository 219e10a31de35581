// lb/core/diagnostic.hpp - source spans, diagnostics and the Result carrier
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace lb
{

struct SourceSpan
{
  std::string file;
  int line = 0;  // 1-based; 0 means "no location"
  int column = 0;
  int length = 1;

  bool valid() const { return line > 0; }
};

enum class Severity { Error, Warning };

/// A single finding. `code` is a stable identifier (E_NONLOCAL_REF, ...) that
/// tests and scripts match on; `message` is free text for humans.
struct Diagnostic
{
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  SourceSpan span;
};

using Diagnostics = std::vector<Diagnostic>;

bool has_errors(const Diagnostics & diags);

Diagnostic make_error(std::string code, std::string message, SourceSpan span = {});
Diagnostic make_warning(std::string code, std::string message, SourceSpan span = {});

/// "file:line:col: error[CODE]: message"
std::string format_diagnostic(const Diagnostic & d, bool color = false);

/// JSON array of {severity, code, message, file, line, column}.
std::string diagnostics_to_json(const Diagnostics & diags);

/// Either a value or the error diagnostics that prevented producing it.
/// Warnings may accompany a value.
template <class T>
class Result
{
public:
  Result(T value, Diagnostics warnings = {})
  : value_(std::move(value)), diags_(std::move(warnings))
  {
  }
  Result(Diagnostics errors) : diags_(std::move(errors)) {}

  bool ok() const { return value_.has_value(); }
  explicit operator bool() const { return ok(); }

  const T & value() const & { return *value_; }
  T & value() & { return *value_; }
  T && value() && { return std::move(*value_); }
  const T * operator->() const { return &*value_; }

  const Diagnostics & diagnostics() const { return diags_; }

private:
  std::optional<T> value_;
  Diagnostics diags_;
};

}  // namespace lb
