#include "rbc/file_lock.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rbc/error.hpp"

namespace rbc {
namespace fs = std::filesystem;

namespace {

std::string errno_text() { return std::strerror(errno); }

}  // namespace

FileLock::FileLock(const fs::path& path, Mode mode) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    fail(ErrorCode::io_error,
         "cannot open lock file " + path.string() + ": " + errno_text());
  }
  const int op = mode == Mode::shared ? LOCK_SH : LOCK_EX;
  while (::flock(fd_, op) != 0) {
    if (errno == EINTR) continue;
    const auto msg = errno_text();
    ::close(fd_);
    fail(ErrorCode::io_error, "cannot lock " + path.string() + ": " + msg);
  }
}

FileLock::~FileLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

void atomic_write(const fs::path& path, std::string_view content) {
  static std::atomic<unsigned> counter{0};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(counter.fetch_add(1));

  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC,
                        0644);
  if (fd < 0) {
    fail(ErrorCode::io_error, "cannot write " + tmp.string() + ": " +
                                  errno_text());
  }
  std::size_t written = 0;
  while (written < content.size()) {
    const auto n =
        ::write(fd, content.data() + written, content.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const auto msg = errno_text();
      ::close(fd);
      ::unlink(tmp.c_str());
      fail(ErrorCode::io_error, "write failed for " + tmp.string() + ": " + msg);
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    const auto msg = errno_text();
    ::unlink(tmp.c_str());
    fail(ErrorCode::io_error, "rename to " + path.string() + " failed: " + msg);
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

}  // namespace rbc
