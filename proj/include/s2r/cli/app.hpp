#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "s2r/cli/commands.hpp"
#include "s2r/core/parallel.hpp"

namespace s2r::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitComputation = 2;
inline constexpr int kExitUsage = 64;

namespace detail {

struct Invocation {
  std::optional<std::string> config;
  std::string out;
  bool csv = false;
  int threads = 0;
  std::map<std::string, std::string> values;  // raw flag text per key
};

inline void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("unwritable output path: " + path);
  f << text;
  if (!f) throw ValidationError("unwritable output path: " + path);
}

}  // namespace detail

/// Parses argv, runs one subcommand and writes its report. Returns the
/// process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  const auto commands = all_commands();
  CLI::App app{"sim2real: sim-to-real lane perception evaluation and lane-keeping simulation", "sim2real"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.footer("Every subcommand accepts --config FILE (JSON object of keys below), --out FILE, --csv and\n"
             "--threads N (default: SIM2REAL_THREADS or machine parallelism). Flags override the file.\n"
             "Exit codes: 0 ok, 1 invalid input, 2 computation failure, 64 usage error.");

  std::vector<std::unique_ptr<detail::Invocation>> inv;
  std::vector<CLI::App*> subs;
  for (const auto& cmd : commands) {
    auto* sub = app.add_subcommand(cmd.name, cmd.summary);
    auto& iv = *inv.emplace_back(std::make_unique<detail::Invocation>());
    sub->add_option("--config", iv.config, "JSON config file");
    sub->add_option("--out", iv.out, "write the report here instead of standard output");
    if (cmd.csv) {
      sub->add_flag("--csv", iv.csv, "emit the tabular CSV form instead of JSON");
    }
    sub->add_option("--threads", iv.threads, "worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber);
    for (const auto& k : cmd.keys) {
      sub->add_option_function<std::string>(
             "--" + k.name, [&iv, name = k.name](const std::string& v) { iv.values[name] = v; },
             k.help + " [" + kind_name(k.kind) + ", default: " + default_text(k) + "]")
          ->type_name(type_label(k.kind))
          ->group("Config keys");
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    const auto& cmd = commands[i];
    const auto& iv = *inv[i];
    try {
      const json cfg = resolve_config(cmd.keys, iv.config, iv.values);
      Context ctx;
      ctx.threads = iv.threads > 0 ? iv.threads : default_threads();
      const json rep = make_report(cmd, cfg, cmd.run(cfg, ctx));
      const std::string text = iv.csv ? cmd.csv(rep["result"]) : rep.dump(2) + "\n";
      detail::write_output(iv.out, text, out);
      return kExitOk;
    } catch (const ConfigError& e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const ValidationError& e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const std::filesystem::filesystem_error& e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const json::exception& e) {
      err << "error: malformed input: " << e.what() << "\n";
      return kExitValidation;
    } catch (const ComputationError& e) {
      err << "error: " << e.what() << "\n";
      return kExitComputation;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitComputation;
    }
  }
  return kExitUsage;
}

}  // namespace s2r::cli
