#include "test_support.hpp"

#include <stdlib.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rbc::testing {
namespace fs = std::filesystem;

TempDir::TempDir() {
  std::string templ = (fs::temp_directory_path() / "rbc-test-XXXXXX").string();
  if (::mkdtemp(templ.data()) == nullptr) {
    throw std::runtime_error("mkdtemp failed");
  }
  path_ = fs::canonical(templ);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TreeBytes tree_bytes(const fs::path& root, std::string_view skip_prefix) {
  TreeBytes out;
  if (!fs::exists(root)) return out;
  for (auto it = fs::recursive_directory_iterator(root);
       it != fs::recursive_directory_iterator(); ++it) {
    if (it->is_symlink() || !it->is_regular_file()) continue;
    auto rel = fs::relative(it->path(), root).generic_string();
    if (!skip_prefix.empty() && rel.starts_with(skip_prefix)) continue;
    out.emplace(rel, slurp(it->path()));
  }
  return out;
}

std::string shell_output(const std::string& command) {
  std::string out;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed");
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    out.append(buf.data(), n);
  }
  ::pclose(pipe);
  return out;
}

std::string sha256sum_oracle(const fs::path& file) {
  auto out = shell_output("sha256sum '" + file.string() + "'");
  return out.substr(0, out.find(' '));
}

fs::path make_job(const fs::path& parent, const std::string& name,
                  const std::map<std::string, std::string>& files) {
  const auto root = parent / name;
  fs::create_directories(root / "Results");
  fs::create_directories(root / "RunResults");
  for (const auto& [rel, content] : files) write_file(root / rel, content);
  return root;
}

TreeBytes random_tree(const fs::path& root, std::mt19937_64& rng, int files,
                      int depth, int max_size) {
  TreeBytes out;
  std::uniform_int_distribution<int> dir_depth(0, depth);
  std::uniform_int_distribution<int> size(0, max_size);
  std::uniform_int_distribution<int> byte(32, 126);
  std::uniform_int_distribution<int> segment(0, 3);
  fs::create_directories(root);
  while (static_cast<int>(out.size()) < files) {
    std::string rel;
    for (int d = dir_depth(rng); d > 0; --d) {
      rel += "d" + std::to_string(segment(rng)) + "/";
    }
    rel += "f" + std::to_string(out.size()) + ".dat";
    std::string content(static_cast<std::size_t>(size(rng)), ' ');
    for (auto& c : content) c = static_cast<char>(byte(rng));
    write_file(root / rel, content);
    out.emplace(rel, std::move(content));
  }
  return out;
}

EnvLookup env_from(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](std::string_view name)
             -> std::optional<std::string> {
    auto it = vars.find(std::string(name));
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

namespace {
Config sandbox_config(const fs::path& root) {
  Config c;
  c.runtime_command = "sh {script}";
  c.state_path = root / "state.json";
  c.provider_workdir = root / "provider";
  return c;
}
}  // namespace

Sandbox::Sandbox(Clock clock)
    : config(sandbox_config(dir.path())),
      store(config.state_path),
      provider(config.provider_workdir,
               RemotePath(config.effective_remote_home()), std::move(clock)),
      executor(config, store, provider) {
  fs::create_directories(host());
}

fs::path Sandbox::remote(const InstanceId& id, std::string_view rel) const {
  auto p = provider.instance_root(id) /
           RemotePath(config.effective_remote_home()).relative();
  return rel.empty() ? p : p / rel;
}

std::map<std::string, std::string> Sandbox::env() const {
  const auto cfg = dir.path() / "config";
  if (!fs::exists(cfg)) write_file(cfg, "runtime_command=sh {script}\n");
  return {{"HOME", dir.path().string()},
          {"RBC_CONFIG", cfg.string()},
          {"RBC_STATE", config.state_path.string()},
          {"RBC_PROVIDER_WORKDIR", config.provider_workdir.string()}};
}

}  // namespace rbc::testing
