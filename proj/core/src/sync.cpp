#include "rbc/sync.hpp"

#include <unistd.h>

#include <atomic>

#include "rbc/clock.hpp"
#include "rbc/error.hpp"

namespace rbc {
namespace fs = std::filesystem;

namespace {

[[noreturn]] void transfer_failed(const std::string& path,
                                  const std::string& what) {
  fail(ErrorCode::transfer_failed, path + ": " + what);
}

void copy_one(const fs::path& from, const fs::path& to,
              const std::string& rel) {
  static std::atomic<unsigned> counter{0};
  std::error_code ec;
  fs::create_directories(to.parent_path(), ec);
  if (ec) transfer_failed(rel, ec.message());
  if (fs::is_directory(fs::symlink_status(to, ec))) {
    fs::remove_all(to, ec);
    if (ec) transfer_failed(rel, ec.message());
  }
  auto tmp = to;
  tmp += ".rbc-part." + std::to_string(::getpid()) + "." +
         std::to_string(counter.fetch_add(1));
  fs::copy_file(from, tmp, fs::copy_options::overwrite_existing, ec);
  if (ec) transfer_failed(rel, ec.message());
  fs::last_write_time(tmp, fs::last_write_time(from, ec), ec);
  fs::rename(tmp, to, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    transfer_failed(rel, ec.message());
  }
}

}  // namespace

TransferStats apply(const ChangeSet& changes, const fs::path& src,
                    const fs::path& dst) {
  Stopwatch watch;
  TransferStats stats;
  std::error_code ec;

  fs::create_directories(dst, ec);
  if (ec) transfer_failed(dst.string(), ec.message());

  for (const auto& rel : changes.to_delete) {
    fs::remove(dst / rel, ec);
    if (ec) transfer_failed(rel, ec.message());
    ++stats.files_deleted;
  }
  for (const auto& rel : changes.dirs_to_create) {
    const auto target = dst / rel;
    if (fs::exists(fs::symlink_status(target)) && !fs::is_directory(target)) {
      fs::remove(target, ec);
    }
    fs::create_directories(target, ec);
    if (ec) transfer_failed(rel, ec.message());
  }
  for (const auto& rel : changes.to_copy) {
    const auto from = src / rel;
    const auto size = fs::file_size(from, ec);
    if (ec) transfer_failed(rel, ec.message());
    copy_one(from, dst / rel, rel);
    ++stats.files_copied;
    stats.bytes_copied += size;
  }
  stats.wall_seconds = watch.seconds();
  return stats;
}

TransferStats sync_trees(const fs::path& src, const fs::path& dst,
                         const ExclusionSet& exclusions) {
  Stopwatch watch;
  if (!fs::is_directory(src)) {
    fail(ErrorCode::tree_unreadable, "source is not a directory: " +
                                         src.string());
  }
  const auto src_manifest = build_manifest(src, exclusions);
  const auto dst_manifest = build_manifest(dst, exclusions);
  auto stats = apply(diff(src_manifest, dst_manifest), src, dst);
  stats.wall_seconds = watch.seconds();
  return stats;
}

}  // namespace rbc
