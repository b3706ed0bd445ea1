#include "rbc/process.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "rbc/error.hpp"

namespace rbc {

namespace {

class FileActions {
 public:
  FileActions() { posix_spawn_file_actions_init(&actions_); }
  ~FileActions() { posix_spawn_file_actions_destroy(&actions_); }
  FileActions(const FileActions&) = delete;
  FileActions& operator=(const FileActions&) = delete;
  posix_spawn_file_actions_t* get() { return &actions_; }

 private:
  posix_spawn_file_actions_t actions_;
};

}  // namespace

int run_process(const ProcessSpec& spec) {
  if (spec.argv.empty()) fail(ErrorCode::invalid_argument, "empty command");
  for (const auto* log : {&spec.stdout_path, &spec.stderr_path}) {
    std::error_code ec;
    if (log->has_parent_path()) {
      std::filesystem::create_directories(log->parent_path(), ec);
    }
  }

  std::vector<char*> argv;
  for (const auto& arg : spec.argv) argv.push_back(const_cast<char*>(arg.c_str()));
  argv.push_back(nullptr);

  std::vector<std::string> env_strings;
  for (const auto& [key, value] : spec.env) env_strings.push_back(key + "=" + value);
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);

  FileActions actions;
  posix_spawn_file_actions_addopen(actions.get(), STDIN_FILENO, "/dev/null",
                                   O_RDONLY, 0);
  posix_spawn_file_actions_addopen(actions.get(), STDOUT_FILENO,
                                   spec.stdout_path.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_addopen(actions.get(), STDERR_FILENO,
                                   spec.stderr_path.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_addchdir_np(actions.get(), spec.cwd.c_str());

  // posix_spawnp searches the PATH of the parent; look it up in the child
  // environment instead so the payload's PATH is authoritative.
  std::string program = spec.argv.front();
  if (program.find('/') == std::string::npos) {
    auto path_it = spec.env.find("PATH");
    const std::string path = path_it == spec.env.end() ? "/usr/bin:/bin"
                                                       : path_it->second;
    std::size_t pos = 0;
    while (pos <= path.size()) {
      auto next = path.find(':', pos);
      if (next == std::string::npos) next = path.size();
      std::string candidate = path.substr(pos, next - pos);
      if (candidate.empty()) candidate = ".";
      candidate += "/" + program;
      if (::access(candidate.c_str(), X_OK) == 0) {
        program = candidate;
        break;
      }
      pos = next + 1;
    }
  }

  pid_t pid = 0;
  const int rc = ::posix_spawn(&pid, program.c_str(), actions.get(), nullptr,
                               argv.data(), envp.data());
  if (rc != 0) {
    // Mirror the shell: an unstartable command exits 127 with a message.
    if (int fd = ::open(spec.stderr_path.c_str(),
                        O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
        fd >= 0) {
      const std::string msg =
          spec.argv.front() + ": " + std::strerror(rc) + "\n";
      (void)!::write(fd, msg.data(), msg.size());
      ::close(fd);
    }
    return 127;
  }

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) {
      fail(ErrorCode::io_error, std::string("waitpid: ") + std::strerror(errno));
    }
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return 1;
}

}  // namespace rbc
