#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace rbc {

// Host-side defaults. Loaded from a `key=value` file; every key has a
// built-in fallback so an absent file is a valid configuration.
struct Config {
  std::string default_snapshot_id = "snap-default";
  std::string default_instance_type = "m1.xlarge";
  std::string default_resource_name = "default_resource";
  std::string remote_user = "root";
  // Empty means "/home/<remote_user>", the remote user's home in the sandbox.
  std::string remote_home;
  std::string runtime_command = "Rscript {script}";
  std::string provider = "local";
  std::filesystem::path state_path;
  std::filesystem::path provider_workdir;

  std::string effective_remote_home() const;

  friend bool operator==(const Config&, const Config&) = default;
};

// Looks up environment variables; injectable so tests never touch the
// process environment.
using EnvLookup = std::function<std::optional<std::string>(std::string_view)>;

EnvLookup process_env();

// Directory holding the default config, state and sandbox ("$HOME/.rbc").
std::filesystem::path default_base_dir(const EnvLookup& env);

// Built-in defaults with paths rooted under default_base_dir().
Config builtin_config(const EnvLookup& env);

// Parses `key=value` text. Throws malformed_config naming the line number.
Config parse_config(std::string_view text, Config base);

// Loads `path` if given (must exist), else $RBC_CONFIG, else
// $HOME/.rbc/config if present, else built-ins. RBC_STATE and
// RBC_PROVIDER_WORKDIR override the corresponding keys.
Config load_config(const std::optional<std::filesystem::path>& path,
                   const EnvLookup& env = process_env());

// Checks the placeholder, remote user/home and instance-type invariants.
void validate_config(const Config& config);

}  // namespace rbc
