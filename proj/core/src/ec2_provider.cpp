#include "rbc/error.hpp"
#include "rbc/local_provider.hpp"

namespace rbc {
namespace {

[[noreturn]] void unsupported(const char* what) {
  fail(ErrorCode::not_implemented,
       std::string("the ec2 provider does not implement ") + what +
           "; use provider=local");
}

}  // namespace

SnapshotId Ec2Provider::register_snapshot(const std::filesystem::path&) {
  unsupported("register_snapshot");
}
VolumeRecord Ec2Provider::create_volume(const SnapshotId&) {
  unsupported("create_volume");
}
void Ec2Provider::delete_volume(const VolumeId&) { unsupported("delete_volume"); }
std::vector<InstanceHandle> Ec2Provider::provision(int, const std::string&,
                                                   const VolumePlan&) {
  unsupported("provision");
}
void Ec2Provider::terminate(const InstanceId&) { unsupported("terminate"); }
ExecResult Ec2Provider::exec_command(const InstanceId&, const ExecRequest&) {
  unsupported("exec_command");
}
RemoteTree Ec2Provider::open_remote_tree(const InstanceId&) {
  unsupported("open_remote_tree");
}
double Ec2Provider::accrued_seconds(const InstanceId&) {
  unsupported("accrued_seconds");
}
InstanceHandle Ec2Provider::describe_instance(const InstanceId&) {
  unsupported("describe_instance");
}
VolumeRecord Ec2Provider::describe_volume(const VolumeId&) {
  unsupported("describe_volume");
}
std::vector<InstanceHandle> Ec2Provider::instances() { unsupported("instances"); }
std::vector<VolumeRecord> Ec2Provider::volumes() { unsupported("volumes"); }
std::vector<LedgerEntry> Ec2Provider::ledger() { unsupported("ledger"); }

}  // namespace rbc
