#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rbc {

inline constexpr const char* kResultsDir = "Results";
inline constexpr const char* kRunResultsDir = "RunResults";

// A host job directory: scripts, data, Results/ and RunResults/.
struct JobDirectory {
  std::filesystem::path root;
  std::string name;
  std::vector<std::string> scripts;  // top-level *.R, lexicographic
  bool has_results_dir = false;
  bool has_runresults_dir = false;

  bool has_script(const std::string& script) const;
};

// Read-only. Throws not_a_directory, missing_results_dir or
// missing_runresults_dir.
JobDirectory validate_job_dir(const std::filesystem::path& path);

// Validates `flag_value` when given, otherwise `cwd`.
JobDirectory resolve_job_dir(const std::optional<std::filesystem::path>& flag_value,
                             const std::filesystem::path& cwd);

}  // namespace rbc
