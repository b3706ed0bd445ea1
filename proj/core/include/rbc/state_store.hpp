#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rbc/config.hpp"
#include "rbc/records.hpp"

namespace rbc {

struct StateDocument {
  std::map<std::string, ResourceRecord> resources;
  std::map<RunKey, RunRecord> runs;
  std::uint64_t version = 0;

  const ResourceRecord& resource(const std::string& name) const;
  ResourceRecord& resource(const std::string& name);
  const RunRecord& run(const RunKey& key) const;
  RunRecord& run(const RunKey& key);

  friend bool operator==(const StateDocument&, const StateDocument&) = default;
};

std::string serialize_state(const StateDocument& doc);
// Throws corrupt_state on anything that is not a complete document.
StateDocument parse_state(std::string_view text);

// Host-side registry of resources and runs, persisted as one JSON document.
// Reads take a shared lock, mutations an exclusive lock held across the whole
// read-modify-write; every committed mutation bumps the version by one.
class StateStore {
 public:
  explicit StateStore(std::filesystem::path path);

  // Loads (or initializes) the store at config.state_path.
  static StateStore open(const Config& config);

  const std::filesystem::path& path() const noexcept { return path_; }

  StateDocument read() const;
  std::uint64_t version() const { return read().version; }

  // Runs `fn` on the freshly loaded document under the exclusive lock. If
  // `fn` throws, nothing is written and the version is unchanged.
  StateDocument mutate(const std::function<void(StateDocument&)>& fn);

  void register_resource(const ResourceRecord& record);
  void register_run(const RunRecord& run);
  void remove_resource(const std::string& name);

  ResourceRecord lookup_resource(const std::string& name) const;
  RunRecord lookup_run(const RunKey& key) const;

  // All runs of one job on one resource, oldest first.
  std::vector<RunRecord> runs_for(const std::string& resource,
                                  const std::string& job) const;

 private:
  std::filesystem::path lock_path() const;
  StateDocument load_unlocked() const;

  std::filesystem::path path_;
};

}  // namespace rbc
