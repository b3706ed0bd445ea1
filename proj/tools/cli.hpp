#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbc/config.hpp"
#include "rbc/timing.hpp"

namespace rbc::cli {

enum class Command { gather, submit, execute, results, terminate };

// Accepts the subcommand ("gather") or the alias ("RBC_GatherResource").
std::optional<Command> command_from_name(std::string_view name);
std::string_view subcommand_name(Command command);
std::string_view alias_name(Command command);

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct Context {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  bool interactive = false;
  EnvLookup env = process_env();
  std::filesystem::path cwd = std::filesystem::current_path();
};

// Single-dash long flags exactly as printed in the command synopses.
struct FlagSpec {
  std::string name;  // without the leading '-'
  bool takes_value = false;
};

struct ParsedFlags {
  std::map<std::string, std::string> values;
  std::set<std::string> switches;

  bool has(const std::string& name) const {
    return values.contains(name) || switches.contains(name);
  }
  std::optional<std::string> value(const std::string& name) const;
};

// Throws Error(usage) on unknown or repeated flags, missing values and
// positional arguments. -h / -v are handled by the caller before this.
ParsedFlags parse_flags(std::span<const std::string> args,
                        std::span<const FlagSpec> spec);

std::span<const FlagSpec> flag_spec(Command command);
std::string usage(Command command);

int run(Command command, std::span<const std::string> args, Context& ctx);

// Process entry: dispatches on argv[0] for the aliases, otherwise on the
// first argument.
int main_entry(int argc, char** argv);

}  // namespace rbc::cli
