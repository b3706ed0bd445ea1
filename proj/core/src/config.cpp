#include "rbc/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rbc/error.hpp"
#include "rbc/file_lock.hpp"
#include "rbc/instance_types.hpp"

namespace rbc {
namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::size_t count_placeholders(std::string_view text) {
  std::size_t n = 0;
  for (auto pos = text.find("{script}"); pos != std::string_view::npos;
       pos = text.find("{script}", pos + 1)) {
    ++n;
  }
  return n;
}

}  // namespace

std::string Config::effective_remote_home() const {
  if (!remote_home.empty()) return remote_home;
  return "/home/" + remote_user;
}

EnvLookup process_env() {
  return [](std::string_view name) -> std::optional<std::string> {
    const char* value = std::getenv(std::string(name).c_str());
    if (value == nullptr || *value == '\0') return std::nullopt;
    return std::string(value);
  };
}

fs::path default_base_dir(const EnvLookup& env) {
  if (auto home = env("HOME")) return fs::path(*home) / ".rbc";
  return fs::current_path() / ".rbc";
}

Config builtin_config(const EnvLookup& env) {
  Config config;
  const auto base = default_base_dir(env);
  config.state_path = base / "state.json";
  config.provider_workdir = base / "sandbox";
  return config;
}

Config parse_config(std::string_view text, Config base) {
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::malformed_config,
           "line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key == "default_snapshot_id") {
      base.default_snapshot_id = value;
    } else if (key == "default_instance_type") {
      base.default_instance_type = value;
    } else if (key == "default_resource_name") {
      base.default_resource_name = value;
    } else if (key == "remote_user") {
      base.remote_user = value;
    } else if (key == "remote_home") {
      base.remote_home = value;
    } else if (key == "runtime_command") {
      base.runtime_command = value;
    } else if (key == "provider") {
      base.provider = value;
    } else if (key == "state_path") {
      base.state_path = value;
    } else if (key == "provider_workdir") {
      base.provider_workdir = value;
    } else {
      fail(ErrorCode::malformed_config, "line " + std::to_string(line_no) +
                                            ": unknown key '" + key + "'");
    }
  }
  return base;
}

void validate_config(const Config& config) {
  if (count_placeholders(config.runtime_command) != 1) {
    fail(ErrorCode::malformed_config,
         "runtime_command must contain exactly one {script} placeholder: '" +
             config.runtime_command + "'");
  }
  if (find_instance_type(config.default_instance_type) == nullptr) {
    fail(ErrorCode::malformed_config, "default_instance_type '" +
                                          config.default_instance_type +
                                          "' is not in the instance catalog");
  }
  if (config.remote_user.empty() ||
      config.remote_user.find('/') != std::string::npos) {
    fail(ErrorCode::malformed_config,
         "remote_user must be a plain name: '" + config.remote_user + "'");
  }
  if (!config.remote_home.empty() && config.remote_home.front() != '/') {
    fail(ErrorCode::malformed_config,
         "remote_home must be absolute: '" + config.remote_home + "'");
  }
}

Config load_config(const std::optional<fs::path>& path, const EnvLookup& env) {
  Config config = builtin_config(env);

  std::optional<fs::path> source = path;
  if (!source) {
    if (auto from_env = env("RBC_CONFIG")) source = fs::path(*from_env);
  }
  if (source) {
    if (!fs::is_regular_file(*source)) {
      fail(ErrorCode::malformed_config,
           "config file not found: " + source->string());
    }
    config = parse_config(read_file(*source), config);
  } else {
    const auto fallback = default_base_dir(env) / "config";
    if (fs::is_regular_file(fallback)) {
      config = parse_config(read_file(fallback), config);
    }
  }

  if (auto state = env("RBC_STATE")) config.state_path = *state;
  if (auto workdir = env("RBC_PROVIDER_WORKDIR")) {
    config.provider_workdir = *workdir;
  }
  validate_config(config);
  return config;
}

}  // namespace rbc
