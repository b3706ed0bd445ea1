#include "rbc/records.hpp"

namespace rbc {

std::string_view to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::gather: return "gather";
    case Phase::submit: return "submit";
    case Phase::execute: return "execute";
    case Phase::retrieve: return "retrieve";
    case Phase::terminate: return "terminate";
  }
  return "?";
}

std::optional<Phase> parse_phase(std::string_view text) noexcept {
  for (Phase p : kLifecycle) {
    if (to_string(p) == text) return p;
  }
  return std::nullopt;
}

std::string_view to_string(ResourceState state) noexcept {
  switch (state) {
    case ResourceState::active: return "active";
    case ResourceState::busy: return "busy";
    case ResourceState::terminated: return "terminated";
  }
  return "?";
}

std::string_view to_string(RunStatus status) noexcept {
  switch (status) {
    case RunStatus::pending: return "pending";
    case RunStatus::running: return "running";
    case RunStatus::succeeded: return "succeeded";
    case RunStatus::failed: return "failed";
  }
  return "?";
}

}  // namespace rbc
