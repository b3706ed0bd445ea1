#include "rbc/job_dir.hpp"

#include <algorithm>

#include "rbc/error.hpp"

namespace rbc {
namespace fs = std::filesystem;

bool JobDirectory::has_script(const std::string& script) const {
  return std::binary_search(scripts.begin(), scripts.end(), script);
}

JobDirectory validate_job_dir(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_directory(path, ec)) {
    fail(ErrorCode::not_a_directory, "not a job directory: " + path.string());
  }
  JobDirectory job;
  job.root = fs::absolute(path).lexically_normal();
  if (!job.root.has_filename()) job.root = job.root.parent_path();
  job.name = job.root.filename().string();
  job.has_results_dir = fs::is_directory(job.root / kResultsDir, ec);
  job.has_runresults_dir = fs::is_directory(job.root / kRunResultsDir, ec);
  if (!job.has_results_dir) {
    fail(ErrorCode::missing_results_dir,
         "job directory " + job.root.string() + " has no Results/ directory");
  }
  if (!job.has_runresults_dir) {
    fail(ErrorCode::missing_runresults_dir,
         "job directory " + job.root.string() +
             " has no RunResults/ directory");
  }
  for (const auto& entry : fs::directory_iterator(job.root, ec)) {
    if (!entry.is_regular_file()) continue;
    const auto file = entry.path().filename().string();
    if (file.front() == '.') continue;
    if (entry.path().extension() == ".R") job.scripts.push_back(file);
  }
  if (ec) {
    fail(ErrorCode::not_a_directory,
         "cannot list " + job.root.string() + ": " + ec.message());
  }
  std::sort(job.scripts.begin(), job.scripts.end());
  return job;
}

JobDirectory resolve_job_dir(const std::optional<fs::path>& flag_value,
                             const fs::path& cwd) {
  if (!flag_value) return validate_job_dir(cwd);
  return validate_job_dir(flag_value->is_absolute() ? *flag_value
                                                    : cwd / *flag_value);
}

}  // namespace rbc
