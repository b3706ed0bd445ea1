#include "rbc/remote_path.hpp"

#include <vector>

#include "rbc/error.hpp"

namespace rbc {
namespace {

void push_segments(std::vector<std::string>& out, std::string_view path) {
  std::size_t pos = 0;
  while (pos <= path.size()) {
    std::size_t next = path.find('/', pos);
    if (next == std::string_view::npos) next = path.size();
    std::string_view seg = path.substr(pos, next - pos);
    if (seg == "..") {
      if (out.empty()) {
        fail(ErrorCode::invalid_argument,
             "path escapes the instance root: " + std::string(path));
      }
      out.pop_back();
    } else if (!seg.empty() && seg != ".") {
      out.emplace_back(seg);
    }
    pos = next + 1;
  }
}

std::string join(const std::vector<std::string>& segs) {
  std::string s;
  for (const auto& seg : segs) s += "/" + seg;
  return s.empty() ? "/" : s;
}

std::vector<std::string> split(const std::string& normalized) {
  std::vector<std::string> segs;
  push_segments(segs, normalized);
  return segs;
}

}  // namespace

RemotePath::RemotePath(std::string_view path) {
  std::vector<std::string> segs;
  push_segments(segs, path);
  value_ = join(segs);
}

RemotePath RemotePath::operator/(std::string_view relative) const {
  if (!relative.empty() && relative.front() == '/') {
    fail(ErrorCode::invalid_argument,
         "expected a relative path: " + std::string(relative));
  }
  auto segs = split(value_);
  // Normalized on its own so '..' can never climb above this path.
  std::vector<std::string> rel;
  push_segments(rel, relative);
  segs.insert(segs.end(), rel.begin(), rel.end());
  RemotePath out;
  out.value_ = join(segs);
  return out;
}

std::string RemotePath::filename() const {
  auto pos = value_.rfind('/');
  return value_.substr(pos + 1);
}

std::filesystem::path RemotePath::relative() const {
  return std::filesystem::path(value_.substr(1));
}

}  // namespace rbc
