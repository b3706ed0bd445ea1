#include "rbc/error.hpp"

namespace rbc {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::malformed_config: return "MalformedConfig";
    case ErrorCode::corrupt_state: return "CorruptState";
    case ErrorCode::duplicate_resource_name: return "DuplicateResourceName";
    case ErrorCode::duplicate_run_name: return "DuplicateRunName";
    case ErrorCode::resource_not_found: return "ResourceNotFound";
    case ErrorCode::run_not_found: return "RunNotFound";
    case ErrorCode::path_not_found: return "PathNotFound";
    case ErrorCode::snapshot_not_found: return "SnapshotNotFound";
    case ErrorCode::volume_not_found: return "VolumeNotFound";
    case ErrorCode::volume_deleted: return "VolumeDeleted";
    case ErrorCode::volume_in_use: return "VolumeInUse";
    case ErrorCode::instance_not_found: return "InstanceNotFound";
    case ErrorCode::instance_not_running: return "InstanceNotRunning";
    case ErrorCode::unknown_instance_type: return "UnknownInstanceType";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::not_implemented: return "NotImplemented";
    case ErrorCode::tree_unreadable: return "TreeUnreadable";
    case ErrorCode::transfer_failed: return "TransferFailed";
    case ErrorCode::not_a_directory: return "NotADirectory";
    case ErrorCode::missing_results_dir: return "MissingResultsDir";
    case ErrorCode::missing_runresults_dir: return "MissingRunResultsDir";
    case ErrorCode::resource_busy: return "ResourceBusy";
    case ErrorCode::resource_terminated: return "ResourceTerminated";
    case ErrorCode::run_name_missing: return "RunNameMissing";
    case ErrorCode::script_not_found: return "ScriptNotFound";
    case ErrorCode::job_not_submitted: return "JobNotSubmitted";
    case ErrorCode::execution_failed: return "ExecutionFailed";
    case ErrorCode::volume_spec_conflict: return "VolumeSpecConflict";
    case ErrorCode::volume_with_cluster: return "VolumeWithCluster";
    case ErrorCode::no_scripts_found: return "NoScriptsFound";
    case ErrorCode::non_interactive_session: return "NonInteractiveSession";
    case ErrorCode::invalid_selection: return "InvalidSelection";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::usage: return "UsageError";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(to_string(code)) + ": " + message);
}

}  // namespace rbc
