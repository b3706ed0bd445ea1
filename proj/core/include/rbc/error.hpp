#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rbc {

// Every failure the framework reports maps to exactly one code. The CLI turns
// usage codes into exit status 2 and everything else into exit status 1.
enum class ErrorCode {
  // config / state
  malformed_config,
  corrupt_state,
  duplicate_resource_name,
  duplicate_run_name,
  resource_not_found,
  run_not_found,
  // provider
  path_not_found,
  snapshot_not_found,
  volume_not_found,
  volume_deleted,
  volume_in_use,
  instance_not_found,
  instance_not_running,
  unknown_instance_type,
  invalid_argument,
  not_implemented,
  // sync
  tree_unreadable,
  transfer_failed,
  // job model
  not_a_directory,
  missing_results_dir,
  missing_runresults_dir,
  // executor / retrieval
  resource_busy,
  resource_terminated,
  run_name_missing,
  script_not_found,
  job_not_submitted,
  execution_failed,
  volume_spec_conflict,
  volume_with_cluster,
  no_scripts_found,
  non_interactive_session,
  invalid_selection,
  io_error,
  // cli
  usage,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace rbc
