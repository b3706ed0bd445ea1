#pragma once

#include <cstdint>
#include <filesystem>

#include "rbc/manifest.hpp"

namespace rbc {

struct TransferStats {
  std::uint64_t files_copied = 0;
  std::uint64_t files_deleted = 0;
  std::uint64_t bytes_copied = 0;
  double wall_seconds = 0.0;

  friend bool operator==(const TransferStats&, const TransferStats&) = default;
};

// Applies a change set computed from the current manifests of src and dst.
// Files are written to a temp name and renamed into place, keeping the source
// mtime. On failure throws transfer_failed naming the path; whatever was
// already applied stays, and the destination can simply be rescanned.
TransferStats apply(const ChangeSet& changes,
                    const std::filesystem::path& src,
                    const std::filesystem::path& dst);

// build_manifest on both sides, diff, apply. Paths matching `exclusions`
// are neither copied nor deleted.
TransferStats sync_trees(const std::filesystem::path& src,
                         const std::filesystem::path& dst,
                         const ExclusionSet& exclusions = {});

}  // namespace rbc
