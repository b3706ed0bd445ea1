#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rbc/config.hpp"
#include "rbc/job_dir.hpp"
#include "rbc/provider.hpp"
#include "rbc/records.hpp"
#include "rbc/state_store.hpp"
#include "rbc/sync.hpp"

namespace rbc {

// Storage for a new resource: the configured default snapshot, a named
// snapshot, or an existing volume (single instance only).
class EbsSpec {
 public:
  static EbsSpec use_default() { return EbsSpec{Default{}}; }
  static EbsSpec from_snapshot(std::string snapshot_id) {
    return EbsSpec{SnapshotId{std::move(snapshot_id)}};
  }
  static EbsSpec from_volume(std::string volume_id) {
    return EbsSpec{VolumeId{std::move(volume_id)}};
  }
  // Mirrors the two CLI flags; both set throws volume_spec_conflict.
  static EbsSpec from_flags(const std::optional<std::string>& volume_id,
                            const std::optional<std::string>& snapshot_id);

  bool is_default() const { return std::holds_alternative<Default>(value_); }
  const SnapshotId* snapshot() const { return std::get_if<SnapshotId>(&value_); }
  const VolumeId* volume() const { return std::get_if<VolumeId>(&value_); }

 private:
  struct Default {};
  using Value = std::variant<Default, SnapshotId, VolumeId>;
  explicit EbsSpec(Value value) : value_(std::move(value)) {}
  Value value_;
};

enum class SubmitTarget { master, all_nodes };

struct GatherRequest {
  std::string name;
  int size = 1;
  std::optional<std::string> instance_type;  // config default when empty
  EbsSpec ebs = EbsSpec::use_default();
  std::string description;
};

// Per-instance results of a fan-out, sorted by instance id.
using PerInstanceStats = std::vector<std::pair<InstanceId, TransferStats>>;

struct ClusterEnv {
  std::map<std::string, std::string> env;
  std::string hostfile;  // "<instance-id>\t<address>\n" per worker
};

struct TerminateSummary {
  std::string resource;
  std::vector<InstanceId> instances_terminated;
  std::vector<VolumeId> volumes_deleted;
  std::vector<std::string> unretrieved_runs;
  double seconds = 0.0;
};

// Lifecycle verbs over a provider and the host state store.
class Executor {
 public:
  Executor(Config config, StateStore& store, Provider& provider);

  const Config& config() const noexcept { return config_; }

  ResourceRecord gather_resource(const GatherRequest& request);

  PerInstanceStats submit_job(const std::string& resource,
                              const JobDirectory& jobdir,
                              SubmitTarget target = SubmitTarget::master);

  // Syncs an arbitrary folder to <remote_home>/<basename> without job
  // validation; RunResults/ directories are still left behind.
  PerInstanceStats submit_data(const std::string& resource,
                               const std::filesystem::path& data_path,
                               SubmitTarget target = SubmitTarget::master);

  // Runs `script` on the master under the resource lock. A non-zero payload
  // exit persists the run as failed and then throws execution_failed.
  RunRecord execute_job(const std::string& resource, const JobDirectory& jobdir,
                        const std::string& script, const std::string& run_name);

  ClusterEnv build_cluster_env(const ResourceRecord& resource,
                               const std::string& job,
                               const std::string& run_name);

  TerminateSummary terminate_resource(const std::string& resource,
                                      bool delete_volumes);

  RemotePath remote_job_dir(const std::string& job) const;

 private:
  PerInstanceStats sync_to(const ResourceRecord& record,
                           SubmitTarget target,
                           const std::filesystem::path& src,
                           const std::string& dest_name,
                           const ExclusionSet& exclusions);

  Config config_;
  StateStore& store_;
  Provider& provider_;
};

// Lists the scripts and reads a 1-based selection. Throws no_scripts_found,
// non_interactive_session (interactive == false) or invalid_selection.
std::string prompt_for_script(const JobDirectory& jobdir, std::istream& in,
                              std::ostream& out, bool interactive);

// Instantiates a `{script}` command template into argv (whitespace split).
std::vector<std::string> instantiate_command(const std::string& templ,
                                             const std::string& script);

// Run directory relative to the job dir: ".runs/<run_name>".
std::string run_dir_relative(const std::string& run_name);

inline constexpr const char* kRunsDir = ".runs";
inline constexpr const char* kHostfileName = "cluster_hosts";

}  // namespace rbc
