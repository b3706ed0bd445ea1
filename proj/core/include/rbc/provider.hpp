#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rbc/clock.hpp"
#include "rbc/config.hpp"
#include "rbc/ids.hpp"
#include "rbc/remote_path.hpp"

namespace rbc {

enum class InstanceState { pending, running, terminated };
std::string_view to_string(InstanceState state) noexcept;

struct InstanceHandle {
  InstanceId id;
  std::string type_name;
  InstanceState state = InstanceState::pending;
  // Where the instance lives: a sandbox directory for the local provider, a
  // network address for remote ones.
  std::string sandbox_root;
  Timestamp launched_at{};
  std::optional<Timestamp> terminated_at;
  std::vector<InstanceState> history;  // every state entered, in order

  friend bool operator==(const InstanceHandle&, const InstanceHandle&) = default;
};

struct VolumeRecord {
  VolumeId id;
  std::optional<SnapshotId> source_snapshot;
  std::optional<InstanceId> attached_to;
  bool deleted = false;

  friend bool operator==(const VolumeRecord&, const VolumeRecord&) = default;
};

struct LedgerEntry {
  InstanceId instance;
  std::string type_name;
  Timestamp start{};
  std::optional<Timestamp> stop;  // open while the instance runs

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

struct NoVolume {};
struct VolumeFromSnapshot {
  SnapshotId snapshot;
};
struct AttachVolume {
  VolumeId volume;
};
// One fresh volume per instance from a snapshot, or one existing volume for a
// single instance.
using VolumePlan = std::variant<NoVolume, VolumeFromSnapshot, AttachVolume>;

struct ExecRequest {
  std::vector<std::string> argv;
  std::map<std::string, std::string> env;
  RemotePath cwd;
  // Receives stdout.log / stderr.log; defaults to cwd.
  std::optional<RemotePath> log_dir;
};

struct ExecResult {
  int exit_code = 0;
  RemotePath stdout_log;
  RemotePath stderr_log;
  double wall_seconds = 0.0;
};

// Read/write view of an instance's remote home, exposed as a host path that
// the sync engine can walk.
struct RemoteTree {
  InstanceId instance;
  RemotePath home;
  std::filesystem::path host_root;

  std::filesystem::path host_path(std::string_view relative) const;
};

// Compute substrate: instances, volumes/snapshots, remote execution and the
// billing ledger. Implementations must accept concurrent calls that target
// different instances.
class Provider {
 public:
  virtual ~Provider() = default;

  virtual std::string_view name() const noexcept = 0;

  virtual SnapshotId register_snapshot(
      const std::filesystem::path& template_tree) = 0;
  virtual VolumeRecord create_volume(const SnapshotId& snapshot) = 0;
  virtual void delete_volume(const VolumeId& volume) = 0;

  // Returns handles in provisioning order, all running.
  virtual std::vector<InstanceHandle> provision(int count,
                                                const std::string& type_name,
                                                const VolumePlan& plan) = 0;
  // Terminating an already terminated instance is a no-op.
  virtual void terminate(const InstanceId& instance) = 0;

  virtual ExecResult exec_command(const InstanceId& instance,
                                  const ExecRequest& request) = 0;
  virtual RemoteTree open_remote_tree(const InstanceId& instance) = 0;

  virtual double accrued_seconds(const InstanceId& instance) = 0;

  virtual InstanceHandle describe_instance(const InstanceId& instance) = 0;
  virtual VolumeRecord describe_volume(const VolumeId& volume) = 0;
  virtual std::vector<InstanceHandle> instances() = 0;
  virtual std::vector<VolumeRecord> volumes() = 0;
  virtual std::vector<LedgerEntry> ledger() = 0;
};

// Builds the provider named by config.provider ("local" or "ec2").
std::unique_ptr<Provider> make_provider(const Config& config,
                                        Clock clock = system_now);

}  // namespace rbc
