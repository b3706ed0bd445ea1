#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace rbc {

struct ProcessSpec {
  std::vector<std::string> argv;  // argv[0] resolved through PATH
  std::map<std::string, std::string> env;  // complete environment
  std::filesystem::path cwd;
  std::filesystem::path stdout_path;
  std::filesystem::path stderr_path;
};

// Spawns the process, waits for it and returns its exit status. A process
// killed by signal N reports 128 + N; a command that cannot be started
// reports 127 (the shell convention).
int run_process(const ProcessSpec& spec);

}  // namespace rbc
