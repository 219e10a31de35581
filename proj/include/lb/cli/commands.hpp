// lb/cli/commands.hpp - the `lb` subcommands as callable functions
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "lb/sim/sim.hpp"

namespace lb::cli
{

// Stable exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDiagnostics = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitWrite = 3;
inline constexpr int kExitStepLimit = 4;
inline constexpr int kExitViolation = 5;

/// Line-oriented `key = value` configuration:
///   size.<Class> = n        class cardinality
///   <name> = <expr>          constant value
///   <name>.<proc> = <expr>   one entry of a per-process constant
/// `#` starts a comment. Errors: E_CONFIG_PARSE with the line number.
Result<sim::SimConfig> load_config_text(std::string_view text, const std::string & file);
Result<sim::SimConfig> load_config(const std::string & path);

struct Io
{
  std::ostream & out;
  std::ostream & err;
  bool color = false;
};

/// Resolves LB_COLOR (auto, always, never) for a stream with the given fd.
bool use_color(int fd);

int cmd_check(const std::string & ctx_path, const std::string & mch_path, bool json, Io io);

struct CompileOptions
{
  std::string out_dir = "out";
  bool single_file = false;
  bool json = false;
};

int cmd_compile(const std::string & ctx_path, const std::string & mch_path,
                const CompileOptions & opts, Io io);

struct SimulateOptions
{
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> max_steps;
  std::optional<std::string> trace_path;
  std::optional<double> lossy;  // loss probability; absent means reliable channels
  bool json = false;
};

int cmd_simulate(const std::string & ctx_path, const std::string & mch_path,
                 const SimulateOptions & opts, Io io);

}  // namespace lb::cli
