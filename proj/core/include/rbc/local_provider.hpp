#pragma once

#include <filesystem>

#include "rbc/provider.hpp"

namespace rbc {

// Emulates instances, volumes and snapshots on the host filesystem:
//
//   <workdir>/instances/<id>/home/<user>/   remote home of an instance
//   <workdir>/instances/<id>/data -> ../../volumes/<vol>
//   <workdir>/volumes/<id>/
//   <workdir>/snapshots/<id>/
//   <workdir>/provider.json                 instance/volume/ledger metadata
//
// Metadata is shared by every process pointing at the same workdir.
class LocalProvider final : public Provider {
 public:
  LocalProvider(std::filesystem::path workdir, RemotePath remote_home,
                Clock clock = system_now);

  std::string_view name() const noexcept override { return "local"; }

  SnapshotId register_snapshot(
      const std::filesystem::path& template_tree) override;
  VolumeRecord create_volume(const SnapshotId& snapshot) override;
  void delete_volume(const VolumeId& volume) override;

  std::vector<InstanceHandle> provision(int count, const std::string& type_name,
                                        const VolumePlan& plan) override;
  void terminate(const InstanceId& instance) override;

  ExecResult exec_command(const InstanceId& instance,
                          const ExecRequest& request) override;
  RemoteTree open_remote_tree(const InstanceId& instance) override;

  double accrued_seconds(const InstanceId& instance) override;

  InstanceHandle describe_instance(const InstanceId& instance) override;
  VolumeRecord describe_volume(const VolumeId& volume) override;
  std::vector<InstanceHandle> instances() override;
  std::vector<VolumeRecord> volumes() override;
  std::vector<LedgerEntry> ledger() override;

  const std::filesystem::path& workdir() const noexcept { return workdir_; }
  std::filesystem::path instance_root(const InstanceId& id) const;
  std::filesystem::path volume_root(const VolumeId& id) const;
  std::filesystem::path snapshot_root(const SnapshotId& id) const;

  // Snapshot id created empty on first use so a default config works.
  static constexpr std::string_view kDefaultSnapshot = "snap-default";

  struct Metadata;  // defined in local_provider.cpp

 private:
  template <typename Fn>
  auto with_metadata(bool exclusive, Fn&& fn);

  std::filesystem::path workdir_;
  RemotePath remote_home_;
  Clock clock_;
};

// Placeholder for a real EC2/EBS adapter; every call throws not_implemented.
class Ec2Provider final : public Provider {
 public:
  std::string_view name() const noexcept override { return "ec2"; }

  SnapshotId register_snapshot(const std::filesystem::path&) override;
  VolumeRecord create_volume(const SnapshotId&) override;
  void delete_volume(const VolumeId&) override;
  std::vector<InstanceHandle> provision(int, const std::string&,
                                        const VolumePlan&) override;
  void terminate(const InstanceId&) override;
  ExecResult exec_command(const InstanceId&, const ExecRequest&) override;
  RemoteTree open_remote_tree(const InstanceId&) override;
  double accrued_seconds(const InstanceId&) override;
  InstanceHandle describe_instance(const InstanceId&) override;
  VolumeRecord describe_volume(const VolumeId&) override;
  std::vector<InstanceHandle> instances() override;
  std::vector<VolumeRecord> volumes() override;
  std::vector<LedgerEntry> ledger() override;
};

}  // namespace rbc
