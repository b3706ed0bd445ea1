#include "rbc/manifest.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "rbc/error.hpp"
#include "rbc/sha256.hpp"

namespace rbc {
namespace fs = std::filesystem;

bool glob_match(std::string_view pattern, std::string_view text) {
  // Iterative wildcard match with single-star backtracking; '*' stops at '/'.
  std::size_t p = 0, t = 0;
  std::size_t star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (p < pattern.size() && pattern[p] == text[t]) {
      ++p;
      ++t;
    } else if (star != std::string_view::npos && text[mark] != '/') {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

ExclusionSet::ExclusionSet(std::initializer_list<std::string> patterns)
    : patterns_(patterns) {}

ExclusionSet::ExclusionSet(std::vector<std::string> patterns)
    : patterns_(std::move(patterns)) {}

namespace {

// rsync-style: a pattern with a leading or inner '/' is anchored at the tree
// root and tested against every leading prefix; any other pattern is tested
// against each path component. A trailing '/' only marks a directory
// pattern; everything below a matched directory is excluded with it.
bool pattern_matches(std::string_view pat, std::string_view path) {
  if (!pat.empty() && pat.back() == '/') pat.remove_suffix(1);
  const bool anchored = !pat.empty() && pat.front() == '/';
  if (anchored) pat.remove_prefix(1);
  if (anchored || pat.find('/') != std::string_view::npos) {
    for (auto slash = path.find('/'); slash != std::string_view::npos;
         slash = path.find('/', slash + 1)) {
      if (glob_match(pat, path.substr(0, slash))) return true;
    }
    return glob_match(pat, path);
  }
  std::size_t start = 0;
  for (;;) {
    const auto slash = path.find('/', start);
    if (glob_match(pat, path.substr(start, slash - start))) return true;
    if (slash == std::string_view::npos) return false;
    start = slash + 1;
  }
}

}  // namespace

bool ExclusionSet::excludes(std::string_view path) const {
  for (const auto& pat : patterns_) {
    if (pattern_matches(pat, path)) return true;
  }
  return false;
}

bool ExclusionSet::excludes_dir(std::string_view dir) const {
  return excludes(dir);
}

std::uint64_t Manifest::total_bytes() const {
  std::uint64_t total = 0;
  for (const auto& [path, entry] : entries) total += entry.size;
  return total;
}

namespace {

std::int64_t mtime_seconds(const fs::path& p) {
  const auto ft = fs::last_write_time(p);
  const auto sys = std::chrono::file_clock::to_sys(ft);
  return std::chrono::duration_cast<std::chrono::seconds>(
             sys.time_since_epoch())
      .count();
}

}  // namespace

Manifest build_manifest(const fs::path& tree, const ExclusionSet& exclusions) {
  Manifest m;
  m.root = tree;
  std::error_code ec;
  const auto status = fs::symlink_status(tree, ec);
  if (ec || status.type() == fs::file_type::not_found) return m;
  if (status.type() != fs::file_type::directory) {
    fail(ErrorCode::tree_unreadable, "not a directory: " + tree.string());
  }

  fs::recursive_directory_iterator it(tree, fs::directory_options::none, ec);
  if (ec) {
    fail(ErrorCode::tree_unreadable,
         "cannot read " + tree.string() + ": " + ec.message());
  }
  for (const fs::recursive_directory_iterator end; it != end;
       it.increment(ec)) {
    if (ec) {
      fail(ErrorCode::tree_unreadable,
           "cannot read below " + tree.string() + ": " + ec.message());
    }
    const auto rel = it->path().lexically_relative(tree).generic_string();
    const auto type = it->symlink_status().type();
    if (type == fs::file_type::symlink) {
      if (!exclusions.excludes(rel)) m.skipped_symlinks.push_back(rel);
      continue;
    }
    if (type == fs::file_type::directory) {
      if (exclusions.excludes_dir(rel)) {
        it.disable_recursion_pending();
      } else {
        m.directories.insert(rel);
      }
      continue;
    }
    if (type != fs::file_type::regular || exclusions.excludes(rel)) continue;
    ManifestEntry entry;
    entry.size = it->file_size();
    entry.mtime = mtime_seconds(it->path());
    entry.sha256 = sha256_file(it->path());
    m.entries.emplace(rel, std::move(entry));
  }
  return m;
}

std::string to_tsv(const Manifest& manifest) {
  std::ostringstream out;
  for (const auto& [path, e] : manifest.entries) {
    out << path << '\t' << e.size << '\t' << e.mtime << '\t' << e.sha256
        << '\n';
  }
  return std::move(out).str();
}

Manifest parse_manifest_tsv(std::string_view text) {
  Manifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    for (auto tab = line.find('\t'); tab != std::string::npos;
         tab = line.find('\t', pos)) {
      fields.push_back(line.substr(pos, tab - pos));
      pos = tab + 1;
    }
    fields.push_back(line.substr(pos));
    if (fields.size() != 4) {
      fail(ErrorCode::invalid_argument,
           "manifest line " + std::to_string(line_no) + ": expected 4 fields");
    }
    try {
      ManifestEntry e{std::stoull(fields[1]), std::stoll(fields[2]), fields[3]};
      m.entries.emplace(fields[0], std::move(e));
    } catch (const std::logic_error&) {
      fail(ErrorCode::invalid_argument,
           "manifest line " + std::to_string(line_no) + ": bad number");
    }
  }
  return m;
}

ChangeSet diff(const Manifest& src, const Manifest& dst) {
  ChangeSet cs;
  for (const auto& [path, entry] : src.entries) {
    auto it = dst.entries.find(path);
    // Size is the fast path; equal sizes fall back to the checksum.
    if (it == dst.entries.end() || it->second.size != entry.size ||
        it->second.sha256 != entry.sha256) {
      cs.to_copy.push_back(path);
      cs.bytes_planned += entry.size;
    }
  }
  for (const auto& [path, entry] : dst.entries) {
    if (!src.entries.contains(path)) cs.to_delete.push_back(path);
  }
  for (const auto& dir : src.directories) {
    if (!dst.directories.contains(dir)) cs.dirs_to_create.push_back(dir);
  }
  return cs;
}

}  // namespace rbc
