// lb/cli/commands.cpp
#include "lb/cli/commands.hpp"

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lb/codegen/codegen.hpp"
#include "lb/parser/parser.hpp"

namespace lb::cli
{

namespace fs = std::filesystem;

namespace
{

std::string trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool is_ident(const std::string & s)
{
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) {
    return false;
  }
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::optional<std::string> read_file(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return std::nullopt;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_diags(const Diagnostics & diags, Io & io)
{
  for (const auto & d : diags) {
    io.err << format_diagnostic(d, io.color) << "\n";
  }
}

struct Loaded
{
  int exit = kExitOk;
  std::optional<analyzer::AnalyzedProgram> prog;
  Diagnostics diags;
};

/// Reads, parses and analyzes a model pair. Exit 2 for I/O and parse
/// failures, 1 for analysis diagnostics.
Loaded load_model(const std::string & ctx_path, const std::string & mch_path)
{
  Loaded out;
  const auto ctx_text = read_file(ctx_path);
  const auto mch_text = read_file(mch_path);
  for (const auto * p : {&ctx_path, &mch_path}) {
    if (!(p == &ctx_path ? ctx_text : mch_text)) {
      out.diags.push_back(make_error("E_IO", "cannot read '" + *p + "'"));
    }
  }
  if (!out.diags.empty()) {
    out.exit = kExitInput;
    return out;
  }
  auto ctx = parser::parse_context(*ctx_text, ctx_path);
  auto mch = parser::parse_machine(*mch_text, mch_path);
  for (const auto * r : {&ctx.diagnostics(), &mch.diagnostics()}) {
    out.diags.insert(out.diags.end(), r->begin(), r->end());
  }
  // an uninitialised variable is a model error, not a syntax error
  const bool syntax = std::any_of(out.diags.begin(), out.diags.end(), [](const Diagnostic & d) {
    return d.severity == Severity::Error && d.code != "E_UNINITIALISED" &&
           d.code != "E_DUPLICATE_DECL";
  });
  if (!ctx || !mch) {
    out.exit = syntax ? kExitInput : kExitDiagnostics;
    return out;
  }
  auto prog = analyzer::analyze(ctx.value(), mch.value());
  out.diags.insert(out.diags.end(), prog.diagnostics().begin(), prog.diagnostics().end());
  if (!prog) {
    out.exit = kExitDiagnostics;
    return out;
  }
  out.prog = std::move(prog).value();
  return out;
}

std::string hole_list(const analyzer::AnalyzedProgram & prog)
{
  std::string out;
  for (const auto & h : prog.holes()) {
    out += (out.empty() ? "" : ", ") + h.name;
  }
  return out;
}

nlohmann::json holes_json(const analyzer::AnalyzedProgram & prog)
{
  auto arr = nlohmann::json::array();
  for (const auto & h : prog.holes()) {
    arr.push_back({{"name", h.name},
                   {"kind", h.kind == analyzer::Hole::Kind::ClassSize ? "class_size" : "constant"},
                   {"marker", h.marker()}});
  }
  return arr;
}

}  // namespace

// ---------------------------------------------------------------------------

Result<sim::SimConfig> load_config_text(std::string_view text, const std::string & file)
{
  sim::SimConfig cfg;
  Diagnostics diags;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const SourceSpan span{file, line_no, 1, 1};
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      diags.push_back(make_error("E_CONFIG_PARSE", "expected 'key = value'", span));
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto dot = key.find('.');
    const std::string head = key.substr(0, dot);
    const std::string tail = dot == std::string::npos ? "" : key.substr(dot + 1);
    if (!is_ident(head) || (dot != std::string::npos && !is_ident(tail)) || value.empty()) {
      diags.push_back(make_error("E_CONFIG_PARSE", "malformed entry '" + line + "'", span));
      continue;
    }
    if (head == "size") {
      char * end = nullptr;
      const long long n = std::strtoll(value.c_str(), &end, 10);
      if (tail.empty() || *end != '\0' || n < 0 ||
          !std::all_of(value.begin(), value.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        diags.push_back(
          make_error("E_CONFIG_PARSE", "size." + tail + " must be a natural number", span));
        continue;
      }
      cfg.class_sizes[tail] = n;
      continue;
    }
    auto expr = parser::parse_expr(value, file);
    if (!expr) {
      diags.push_back(make_error("E_CONFIG_PARSE",
                                 "cannot parse value of '" + key + "': " +
                                   expr.diagnostics().front().message,
                                 span));
      continue;
    }
    if (tail.empty()) {
      cfg.constant_values[head] = expr.value();
    } else {
      cfg.constant_entries[head][tail] = expr.value();
    }
  }
  if (has_errors(diags)) {
    return diags;
  }
  return cfg;
}

Result<sim::SimConfig> load_config(const std::string & path)
{
  const auto text = read_file(path);
  if (!text) {
    return Diagnostics{make_error("E_IO", "cannot read '" + path + "'")};
  }
  return load_config_text(*text, path);
}

bool use_color(int fd)
{
  const char * env = std::getenv("LB_COLOR");
  const std::string mode = env ? env : "auto";
  if (mode == "always") {
    return true;
  }
  if (mode == "never") {
    return false;
  }
  return isatty(fd) != 0;
}

// ---------------------------------------------------------------------------

int cmd_check(const std::string & ctx_path, const std::string & mch_path, bool json, Io io)
{
  Loaded m = load_model(ctx_path, mch_path);
  if (json) {
    nlohmann::json out = {{"ok", m.exit == kExitOk},
                          {"exit", m.exit},
                          {"diagnostics", nlohmann::json::parse(diagnostics_to_json(m.diags))},
                          {"holes", m.prog ? holes_json(*m.prog) : nlohmann::json::array()}};
    io.out << out.dump(2) << "\n";
    return m.exit;
  }
  print_diags(m.diags, io);
  if (m.exit != kExitOk) {
    return m.exit;
  }
  io.out << "ok: " << m.prog->classes.size() << " process classes, "
         << m.prog->machine.events.size() << " events\n";
  const std::string holes = hole_list(*m.prog);
  io.out << "holes: " << (holes.empty() ? "none" : holes) << "\n";
  return kExitOk;
}

int cmd_compile(const std::string & ctx_path, const std::string & mch_path,
                const CompileOptions & opts, Io io)
{
  Loaded m = load_model(ctx_path, mch_path);
  print_diags(m.diags, io);
  if (m.exit != kExitOk) {
    return m.exit;
  }
  auto gen = codegen::generate(*m.prog);
  if (!gen) {
    print_diags(gen.diagnostics(), io);
    return kExitDiagnostics;
  }
  const codegen::GeneratedProgram & g = gen.value();

  std::vector<std::pair<std::string, std::string>> files;  // (name, contents)
  if (opts.single_file) {
    files.emplace_back("program.da", g.single_file());
  } else {
    files.emplace_back("main.da", g.main_source);
    for (const auto & [cls, src] : g.class_sources) {
      files.emplace_back(cls + ".da", src);
    }
    for (const auto & [set, src] : g.enum_sources) {
      files.emplace_back(codegen::enum_module_name(set) + ".py", src);
    }
  }
  std::string holes_txt;
  for (const auto & [name, marker] : g.holes) {
    holes_txt += name + "\t" + marker + "\n";
  }
  files.emplace_back("holes.txt", holes_txt);

  std::error_code ec;
  fs::create_directories(opts.out_dir, ec);
  for (const auto & [name, text] : files) {
    const fs::path p = fs::path(opts.out_dir) / name;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f || !(f << text) || !f.flush()) {
      io.err << format_diagnostic(make_error("E_WRITE", "cannot write '" + p.string() + "'"),
                                  io.color)
             << "\n";
      return kExitWrite;
    }
  }

  if (opts.json) {
    nlohmann::json out = {{"out_dir", opts.out_dir}, {"files", nlohmann::json::array()},
                          {"holes", holes_json(*m.prog)}};
    for (const auto & f : files) {
      out["files"].push_back(f.first);
    }
    io.out << out.dump(2) << "\n";
    return kExitOk;
  }
  for (const auto & f : files) {
    io.out << "wrote " << (fs::path(opts.out_dir) / f.first).string() << "\n";
  }
  if (!g.holes.empty()) {
    io.out << "to be configured by hand before running the generated program:\n";
    for (const auto & [name, marker] : g.holes) {
      io.out << "  " << name << "  (" << marker << ")\n";
    }
  }
  return kExitOk;
}

int cmd_simulate(const std::string & ctx_path, const std::string & mch_path,
                 const SimulateOptions & opts, Io io)
{
  Loaded m = load_model(ctx_path, mch_path);
  print_diags(m.diags, io);
  if (m.exit != kExitOk) {
    return m.exit;
  }
  sim::SimConfig cfg;
  if (opts.config_path) {
    auto loaded = load_config(*opts.config_path);
    print_diags(loaded.diagnostics(), io);
    if (!loaded) {
      return kExitInput;
    }
    cfg = loaded.value();
  }
  if (opts.seed) {
    cfg.seed = *opts.seed;
  }
  if (opts.max_steps) {
    cfg.max_steps = *opts.max_steps;
  }
  if (opts.lossy) {
    if (*opts.lossy < 0.0 || *opts.lossy > 1.0) {
      io.err << format_diagnostic(make_error("E_BAD_OPTION", "--lossy takes a probability in [0, 1]"),
                                  io.color)
             << "\n";
      return kExitInput;
    }
    cfg.lossy = true;
    cfg.loss_prob = *opts.lossy;
  }

  auto init = sim::init_state(*m.prog, cfg);
  print_diags(init.diagnostics(), io);
  if (!init) {
    return kExitDiagnostics;
  }
  const sim::RunResult r = sim::run_from(init.value(), cfg);
  const nlohmann::json trace = sim::trace_to_json(r, cfg);

  if (opts.trace_path) {
    std::ofstream f(*opts.trace_path, std::ios::binary | std::ios::trunc);
    if (!f || !(f << trace.dump(2) << "\n") || !f.flush()) {
      io.err << format_diagnostic(
                  make_error("E_WRITE", "cannot write '" + *opts.trace_path + "'"), io.color)
             << "\n";
      return kExitWrite;
    }
  }

  long long sent = 0, in_channel = 0, received = 0;
  for (const auto & [k, c] : r.final_state.channels) {
    sent += c.sent;
    in_channel += c.in_channel;
    received += c.received;
  }
  if (opts.json) {
    nlohmann::json summary = {{"outcome", sim::to_string(r.outcome)},
                              {"steps", r.trace.size()},
                              {"seed", cfg.seed},
                              {"deadlock", r.deadlock},
                              {"violations", r.violations},
                              {"counters",
                               {{"sent", sent}, {"in_channel", in_channel}, {"received", received}}},
                              {"final_state", trace.value("final_state", nlohmann::json::object())}};
    io.out << summary.dump(2) << "\n";
  } else {
    io.out << "outcome: " << sim::to_string(r.outcome) << (r.deadlock ? " (deadlock)" : "")
           << "\n";
    io.out << "steps: " << r.trace.size() << "\n";
    io.out << "seed: " << cfg.seed << "\n";
    io.out << "messages: sent " << sent << ", in transit " << in_channel << ", received "
           << received << "\n";
    io.out << "invariants: " << (r.violations.empty() ? "hold" : "VIOLATED") << "\n";
    for (const auto & v : r.violations) {
      io.out << "  " << v << "\n";
    }
    if (r.final_state.world) {
      for (const auto & [var, v] : r.final_state.vars) {
        io.out << var << " = " << v.to_string() << "\n";
      }
    }
  }
  switch (r.outcome) {
    case sim::Outcome::Terminated: return kExitOk;
    case sim::Outcome::StepLimit: return kExitStepLimit;
    case sim::Outcome::InvariantViolation: return kExitViolation;
  }
  return kExitViolation;
}

}  // namespace lb::cli
