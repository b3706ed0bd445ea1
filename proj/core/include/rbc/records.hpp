#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rbc/clock.hpp"
#include "rbc/ids.hpp"

namespace rbc {

// The five lifecycle steps, in the order a job passes through them.
enum class Phase { gather, submit, execute, retrieve, terminate };

inline constexpr Phase kLifecycle[] = {Phase::gather, Phase::submit,
                                       Phase::execute, Phase::retrieve,
                                       Phase::terminate};

std::string_view to_string(Phase phase) noexcept;
std::optional<Phase> parse_phase(std::string_view text) noexcept;

enum class ResourceState { active, busy, terminated };
std::string_view to_string(ResourceState state) noexcept;

struct ResourceRecord {
  std::string name;
  std::string description;
  int size = 1;
  std::vector<InstanceId> instances;  // provisioning order
  InstanceId master;
  std::vector<VolumeId> volumes;
  std::string instance_type;
  ResourceState state = ResourceState::active;
  Timestamp created_at{};
  std::optional<Timestamp> terminated_at;

  // Set while state == busy: the run holding the lock and the pid of the
  // process executing it.
  std::optional<std::string> busy_run;
  int busy_pid = 0;

  double gather_seconds = 0.0;
  std::map<std::string, double> submit_seconds;  // job name -> last submit

  friend bool operator==(const ResourceRecord&, const ResourceRecord&) = default;
};

enum class RunStatus { pending, running, succeeded, failed };
std::string_view to_string(RunStatus status) noexcept;

// Runs are unique per (resource, job, run name).
struct RunKey {
  std::string resource;
  std::string job;
  std::string run_name;

  friend auto operator<=>(const RunKey&, const RunKey&) = default;
};

struct RunRecord {
  std::string run_name;
  std::string resource;
  std::string job;
  std::string script;
  RunStatus status = RunStatus::pending;
  std::optional<int> exit_code;
  std::optional<Timestamp> started_at;
  std::optional<Timestamp> finished_at;
  std::map<Phase, double> phase_timings;
  // Host directory the run's results were last retrieved into.
  std::optional<std::string> retrieved_to;

  RunKey key() const { return {resource, job, run_name}; }

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

}  // namespace rbc
