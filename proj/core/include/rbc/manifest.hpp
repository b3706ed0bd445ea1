#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace rbc {

// Exclusion patterns follow rsync's rules:
//   "RunResults/"  a directory of that name at any depth, with its contents
//   "*.tmp"        glob on one path component; '*' never matches '/'
//   "/.runs/"      leading (or inner) '/' anchors the pattern at the root
class ExclusionSet {
 public:
  ExclusionSet() = default;
  ExclusionSet(std::initializer_list<std::string> patterns);
  explicit ExclusionSet(std::vector<std::string> patterns);

  bool excludes(std::string_view relative_path) const;
  // True when a directory (given without trailing slash) is excluded.
  // Directory patterns also exclude files of the same name.
  bool excludes_dir(std::string_view relative_dir) const;

  const std::vector<std::string>& patterns() const noexcept {
    return patterns_;
  }

 private:
  std::vector<std::string> patterns_;
};

bool glob_match(std::string_view pattern, std::string_view text);

struct ManifestEntry {
  std::uint64_t size = 0;
  std::int64_t mtime = 0;  // seconds since epoch
  std::string sha256;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  std::filesystem::path root;
  std::map<std::string, ManifestEntry> entries;  // normalized relative path
  std::set<std::string> directories;             // non-excluded subdirs
  std::vector<std::string> skipped_symlinks;

  std::uint64_t total_bytes() const;
};

// Walks `tree` recording every regular file not excluded. Symbolic links are
// not followed; they are listed in skipped_symlinks. A missing tree yields an
// empty manifest; an unreadable one throws tree_unreadable.
Manifest build_manifest(const std::filesystem::path& tree,
                        const ExclusionSet& exclusions = {});

// `path\tsize\tmtime\tsha256\n` per entry, sorted by path.
std::string to_tsv(const Manifest& manifest);
Manifest parse_manifest_tsv(std::string_view text);

struct ChangeSet {
  std::vector<std::string> to_copy;    // sorted
  std::vector<std::string> to_delete;  // sorted
  std::vector<std::string> dirs_to_create;
  std::uint64_t bytes_planned = 0;

  bool empty() const noexcept {
    return to_copy.empty() && to_delete.empty() && dirs_to_create.empty();
  }
};

// Copies paths missing at dst or whose content differs (size mismatch, or same
// size with a different checksum); deletes dst paths absent from src.
ChangeSet diff(const Manifest& src, const Manifest& dst);

}  // namespace rbc
