#pragma once

#include <filesystem>
#include <string_view>

namespace rbc {

// Advisory whole-file lock (flock). Each FileLock owns its own descriptor, so
// two locks in one process contend exactly like two processes would.
class FileLock {
 public:
  enum class Mode { shared, exclusive };

  FileLock(const std::filesystem::path& path, Mode mode);
  ~FileLock();

  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

// Writes `content` to a sibling temp file, fsyncs it and renames it over
// `path`. Readers see either the old or the new document, never a mix.
void atomic_write(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace rbc
