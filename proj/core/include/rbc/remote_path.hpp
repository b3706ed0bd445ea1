#pragma once

#include <compare>
#include <filesystem>
#include <string>
#include <string_view>

namespace rbc {

// Absolute POSIX path as seen from inside an instance ("/home/root/job").
// Always normalized: leading '/', no '.', '..' or empty segments.
class RemotePath {
 public:
  RemotePath() : value_("/") {}
  explicit RemotePath(std::string_view path);

  const std::string& str() const noexcept { return value_; }

  // Appends a relative path; throws invalid_argument on '..' escapes.
  RemotePath operator/(std::string_view relative) const;

  std::string filename() const;

  // Path relative to the instance root, e.g. "home/root/job".
  std::filesystem::path relative() const;

  friend auto operator<=>(const RemotePath&, const RemotePath&) = default;
  friend bool operator==(const RemotePath&, const RemotePath&) = default;

 private:
  std::string value_;
};

}  // namespace rbc
