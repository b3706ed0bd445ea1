#include "rbc/executor.hpp"

#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <future>
#include <istream>
#include <ostream>
#include <sstream>

#include "rbc/error.hpp"
#include "rbc/file_lock.hpp"
#include "rbc/instance_types.hpp"
#include "rbc/retrieval.hpp"
#include "rbc/timing.hpp"

namespace rbc {
namespace fs = std::filesystem;

namespace {

// Job trees are mirrored without the host-only RunResults/ area and without
// touching the per-run snapshots that executions create remotely.
const ExclusionSet kJobExclusions{"RunResults/", "/.runs/"};
// Data folders follow the same rule: RunResults/ never leaves the host.
const ExclusionSet kDataExclusions{"RunResults/"};

bool process_alive(int pid) {
  if (pid <= 0) return false;
  return ::kill(pid, 0) == 0 || errno == EPERM;
}

void clear_directory(const fs::path& dir) {
  std::error_code ec;
  if (fs::exists(fs::symlink_status(dir)) && !fs::is_directory(dir)) {
    fs::remove(dir, ec);
  }
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      fs::remove_all(entry.path(), ec);
      if (ec) fail(ErrorCode::io_error, "cannot clear " + entry.path().string());
    }
  }
  fs::create_directories(dir);
}

void replace_with_copy(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::remove_all(to, ec);
  fs::create_directories(to);
  if (fs::is_directory(from)) {
    fs::copy(from, to,
             fs::copy_options::recursive | fs::copy_options::copy_symlinks, ec);
    if (ec) {
      fail(ErrorCode::io_error, "cannot snapshot " + from.string() + ": " +
                                    ec.message());
    }
  }
}

std::vector<InstanceId> sorted(std::vector<InstanceId> ids) {
  std::sort(ids.begin(), ids.end());
  return ids;
}

const ResourceRecord& usable(const ResourceRecord& r) {
  if (r.state == ResourceState::terminated) {
    fail(ErrorCode::resource_terminated,
         "resource '" + r.name + "' has been terminated");
  }
  if (r.state == ResourceState::busy) {
    fail(ErrorCode::resource_busy, "resource '" + r.name +
                                       "' is locked by run '" +
                                       r.busy_run.value_or("?") + "'");
  }
  return r;
}

}  // namespace

EbsSpec EbsSpec::from_flags(const std::optional<std::string>& volume_id,
                            const std::optional<std::string>& snapshot_id) {
  if (volume_id && snapshot_id) {
    fail(ErrorCode::volume_spec_conflict,
         "-ebsvol and -snap cannot be specified at the same time");
  }
  if (volume_id) return from_volume(*volume_id);
  if (snapshot_id) return from_snapshot(*snapshot_id);
  return use_default();
}

std::string run_dir_relative(const std::string& run_name) {
  return std::string(kRunsDir) + "/" + run_name;
}

std::vector<std::string> instantiate_command(const std::string& templ,
                                             const std::string& script) {
  std::vector<std::string> argv;
  std::istringstream in(templ);
  std::string token;
  while (in >> token) {
    for (auto pos = token.find("{script}"); pos != std::string::npos;
         pos = token.find("{script}", pos + script.size())) {
      token.replace(pos, 8, script);
    }
    argv.push_back(token);
  }
  if (argv.empty()) fail(ErrorCode::malformed_config, "empty runtime_command");
  return argv;
}

Executor::Executor(Config config, StateStore& store, Provider& provider)
    : config_(std::move(config)), store_(store), provider_(provider) {}

RemotePath Executor::remote_job_dir(const std::string& job) const {
  return RemotePath{config_.effective_remote_home()} / job;
}

ResourceRecord Executor::gather_resource(const GatherRequest& request) {
  Stopwatch watch;
  if (request.name.empty()) {
    fail(ErrorCode::invalid_argument, "resource name must not be empty");
  }
  if (request.size < 1) {
    fail(ErrorCode::invalid_argument,
         "resource size must be at least 1, got " + std::to_string(request.size));
  }
  const auto type = request.instance_type.value_or(config_.default_instance_type);
  if (find_instance_type(type) == nullptr) {
    fail(ErrorCode::unknown_instance_type,
         "'" + type + "' is not in the instance-type catalog");
  }
  if (request.ebs.volume() != nullptr && request.size > 1) {
    fail(ErrorCode::volume_with_cluster,
         "an existing volume cannot be attached to a cluster of " +
             std::to_string(request.size) + " instances; use -snap instead");
  }
  if (store_.read().resources.contains(request.name)) {
    fail(ErrorCode::duplicate_resource_name,
         "multiple resources cannot share the name '" + request.name + "'");
  }

  VolumePlan plan = NoVolume{};
  if (const auto* vol = request.ebs.volume()) {
    plan = AttachVolume{*vol};
  } else if (const auto* snap = request.ebs.snapshot()) {
    plan = VolumeFromSnapshot{*snap};
  } else if (!config_.default_snapshot_id.empty()) {
    plan = VolumeFromSnapshot{SnapshotId{config_.default_snapshot_id}};
  }

  const auto handles = provider_.provision(request.size, type, plan);

  ResourceRecord record;
  record.name = request.name;
  record.description = request.description;
  record.size = request.size;
  for (const auto& h : handles) record.instances.push_back(h.id);
  record.master = handles.front().id;
  record.instance_type = type;
  record.state = ResourceState::active;
  record.created_at = system_now();
  for (const auto& v : provider_.volumes()) {
    if (v.attached_to && std::find(record.instances.begin(),
                                   record.instances.end(),
                                   *v.attached_to) != record.instances.end()) {
      record.volumes.push_back(v.id);
    }
  }
  record.gather_seconds = watch.seconds();

  try {
    store_.register_resource(record);
  } catch (const Error&) {
    // Lost a race for the name: give the instances back.
    for (const auto& id : record.instances) provider_.terminate(id);
    if (request.ebs.volume() == nullptr) {
      for (const auto& v : record.volumes) provider_.delete_volume(v);
    }
    throw;
  }
  return record;
}

PerInstanceStats Executor::sync_to(const ResourceRecord& record,
                                   SubmitTarget target, const fs::path& src,
                                   const std::string& dest_name,
                                   const ExclusionSet& exclusions) {
  const auto targets = target == SubmitTarget::master
                           ? std::vector<InstanceId>{record.master}
                           : sorted(record.instances);

  std::vector<std::future<TransferStats>> work;
  for (const auto& id : targets) {
    work.push_back(std::async(std::launch::async, [&, id] {
      const auto tree = provider_.open_remote_tree(id);
      return sync_trees(src, tree.host_path(dest_name), exclusions);
    }));
  }

  PerInstanceStats out;
  std::optional<ErrorCode> first_code;
  std::string errors;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    try {
      out.emplace_back(targets[i], work[i].get());
    } catch (const Error& e) {
      if (!first_code) first_code = e.code();
      errors += "\n  instance " + targets[i].str() + ": " + e.what();
    } catch (const std::exception& e) {
      if (!first_code) first_code = ErrorCode::transfer_failed;
      errors += "\n  instance " + targets[i].str() + ": " + e.what();
    }
  }
  if (first_code) {
    fail(*first_code, "submission to '" + record.name + "' failed:" + errors);
  }
  return out;
}

PerInstanceStats Executor::submit_job(const std::string& resource,
                                      const JobDirectory& jobdir,
                                      SubmitTarget target) {
  Stopwatch watch;
  const auto record = store_.lookup_resource(resource);
  usable(record);
  auto stats = sync_to(record, target, jobdir.root, jobdir.name, kJobExclusions);
  const double seconds = watch.seconds();
  store_.mutate([&](StateDocument& doc) {
    doc.resource(resource).submit_seconds[jobdir.name] = seconds;
  });
  return stats;
}

PerInstanceStats Executor::submit_data(const std::string& resource,
                                       const fs::path& data_path,
                                       SubmitTarget target) {
  if (!fs::is_directory(data_path)) {
    fail(ErrorCode::path_not_found,
         "data folder does not exist: " + data_path.string());
  }
  auto normalized = fs::absolute(data_path).lexically_normal();
  if (!normalized.has_filename()) normalized = normalized.parent_path();
  const auto record = store_.lookup_resource(resource);
  usable(record);
  return sync_to(record, target, normalized, normalized.filename().string(),
                 kDataExclusions);
}

ClusterEnv Executor::build_cluster_env(const ResourceRecord& resource,
                                       const std::string& job,
                                       const std::string& run_name) {
  ClusterEnv out;
  out.env["RBC_RUN_NAME"] = run_name;
  out.env["RBC_ROLE"] = "master";
  out.env["RBC_CLUSTER_SIZE"] = std::to_string(resource.instances.size());
  out.env["RBC_HOSTFILE"] = run_dir_relative(run_name) + "/" + kHostfileName;
  out.env["RBC_JOB_PATH"] = remote_job_dir(job).str();
  out.env["RBC_RESOURCE"] = resource.name;
  for (const auto& id : resource.instances) {
    if (id == resource.master) continue;
    const auto handle = provider_.describe_instance(id);
    out.hostfile += id.str() + "\t" + handle.sandbox_root + "\n";
  }
  return out;
}

RunRecord Executor::execute_job(const std::string& resource,
                                const JobDirectory& jobdir,
                                const std::string& script,
                                const std::string& run_name) {
  if (run_name.empty()) {
    fail(ErrorCode::run_name_missing, "a run name is mandatory (-runname)");
  }
  if (run_name.find('/') != std::string::npos || run_name == "." ||
      run_name == "..") {
    fail(ErrorCode::invalid_argument, "invalid run name '" + run_name + "'");
  }
  if (!jobdir.has_script(script)) {
    fail(ErrorCode::script_not_found, "'" + script + "' is not an R script in " +
                                          jobdir.root.string());
  }

  const auto record = store_.lookup_resource(resource);
  if (record.state == ResourceState::terminated) usable(record);
  const auto master_tree = provider_.open_remote_tree(record.master);
  const auto job_path = master_tree.host_path(jobdir.name);
  if (!fs::is_directory(job_path)) {
    fail(ErrorCode::job_not_submitted,
         "job '" + jobdir.name + "' has not been submitted to '" + resource +
             "'");
  }

  Stopwatch watch;
  const RunKey key{resource, jobdir.name, run_name};
  RunRecord run;
  store_.mutate([&](StateDocument& doc) {
    auto& r = doc.resource(resource);
    if (r.state == ResourceState::busy && !process_alive(r.busy_pid)) {
      // The process holding the lock is gone; fail its run and take over.
      if (r.busy_run) {
        auto it = doc.runs.find({resource, jobdir.name, *r.busy_run});
        if (it == doc.runs.end()) {
          for (auto& [k, v] : doc.runs) {
            if (k.resource == resource && k.run_name == *r.busy_run &&
                v.status == RunStatus::running) {
              it = doc.runs.find(k);
              break;
            }
          }
        }
        if (it != doc.runs.end() && it->second.status == RunStatus::running) {
          it->second.status = RunStatus::failed;
          it->second.exit_code = -1;
          it->second.finished_at = system_now();
        }
      }
      r.state = ResourceState::active;
      r.busy_run.reset();
      r.busy_pid = 0;
    }
    usable(r);
    if (doc.runs.contains(key)) {
      fail(ErrorCode::duplicate_run_name,
           "run '" + run_name + "' already exists for job '" + jobdir.name +
               "' on '" + resource + "'");
    }
    r.state = ResourceState::busy;
    r.busy_run = run_name;
    r.busy_pid = static_cast<int>(::getpid());

    run.run_name = run_name;
    run.resource = resource;
    run.job = jobdir.name;
    run.script = script;
    run.status = RunStatus::running;
    run.started_at = system_now();
    run.phase_timings[Phase::gather] = r.gather_seconds;
    if (auto it = r.submit_seconds.find(jobdir.name);
        it != r.submit_seconds.end()) {
      run.phase_timings[Phase::submit] = it->second;
    }
    doc.runs.emplace(key, run);
  });

  auto finalize = [&](std::optional<int> exit_code) {
    store_.mutate([&](StateDocument& doc) {
      auto& stored = doc.run(key);
      stored.exit_code = exit_code.value_or(-1);
      stored.status = stored.exit_code == 0 ? RunStatus::succeeded
                                            : RunStatus::failed;
      stored.finished_at = system_now();
      stored.phase_timings[Phase::execute] = watch.seconds();
      auto& r = doc.resource(resource);
      if (r.state == ResourceState::busy && r.busy_run == run_name) {
        r.state = ResourceState::active;
        r.busy_run.reset();
        r.busy_pid = 0;
      }
      run = stored;
    });
  };

  int exit_code = -1;
  try {
    const auto cluster = build_cluster_env(record, jobdir.name, run_name);
    const auto run_rel = jobdir.name + "/" + run_dir_relative(run_name);

    // Each run starts from an empty Results/ on every node holding the job.
    for (const auto& id : record.instances) {
      const auto tree = provider_.open_remote_tree(id);
      if (fs::is_directory(tree.host_path(jobdir.name))) {
        clear_directory(tree.host_path(jobdir.name + "/" + kResultsDir));
      }
    }
    const auto run_dir = master_tree.host_path(run_rel);
    std::error_code ec;
    fs::remove_all(run_dir, ec);
    fs::create_directories(run_dir);
    atomic_write(run_dir / kHostfileName, cluster.hostfile);

    ExecRequest request;
    request.argv = instantiate_command(config_.runtime_command, script);
    request.env = cluster.env;
    request.cwd = remote_job_dir(jobdir.name);
    request.log_dir = request.cwd / run_dir_relative(run_name);
    exit_code = provider_.exec_command(record.master, request).exit_code;

    // Freeze this run's output on every node so later runs cannot clobber it.
    for (const auto& id : record.instances) {
      const auto tree = provider_.open_remote_tree(id);
      if (!fs::is_directory(tree.host_path(jobdir.name))) continue;
      replace_with_copy(tree.host_path(jobdir.name + "/" + kResultsDir),
                        tree.host_path(run_rel + "/" + kResultsDir));
    }
  } catch (...) {
    finalize(std::nullopt);
    throw;
  }
  finalize(exit_code);

  if (exit_code != 0) {
    fail(ErrorCode::execution_failed,
         "run '" + run_name + "' of " + script + " exited with status " +
             std::to_string(exit_code) + "; see " +
             remote_job_dir(jobdir.name).str() + "/" +
             run_dir_relative(run_name) + "/stderr.log");
  }
  return run;
}

TerminateSummary Executor::terminate_resource(const std::string& resource,
                                              bool delete_volumes) {
  Stopwatch watch;
  TerminateSummary summary;
  summary.resource = resource;

  // Tombstone first so no execution can start on a half-terminated resource.
  ResourceRecord record;
  store_.mutate([&](StateDocument& doc) {
    auto& r = doc.resource(resource);
    if (r.state == ResourceState::busy && process_alive(r.busy_pid)) {
      fail(ErrorCode::resource_busy,
           "resource '" + resource + "' is running '" +
               r.busy_run.value_or("?") + "'; wait for it to finish");
    }
    if (r.state != ResourceState::terminated) {
      r.state = ResourceState::terminated;
      r.terminated_at = system_now();
    }
    r.busy_run.reset();
    r.busy_pid = 0;
    record = r;
  });

  std::vector<std::future<void>> work;
  for (const auto& id : record.instances) {
    work.push_back(std::async(std::launch::async,
                              [this, id] { provider_.terminate(id); }));
  }
  for (auto& w : work) w.get();
  summary.instances_terminated = record.instances;

  if (delete_volumes) {
    for (const auto& vol : record.volumes) {
      if (provider_.describe_volume(vol).deleted) continue;
      provider_.delete_volume(vol);
      summary.volumes_deleted.push_back(vol);
    }
  }

  summary.seconds = watch.seconds();
  const auto doc = store_.read();
  for (const auto& [key, run] : doc.runs) {
    if (key.resource != resource) continue;
    if (!run.retrieved_to) {
      summary.unretrieved_runs.push_back(key.job + "/" + key.run_name);
      continue;
    }
    const auto timings = fs::path(*run.retrieved_to) / kTimingsFile;
    if (fs::exists(timings)) {
      append_timing(timings, {Phase::terminate, summary.seconds, resource,
                              run.run_name});
    }
  }
  return summary;
}

std::string prompt_for_script(const JobDirectory& jobdir, std::istream& in,
                              std::ostream& out, bool interactive) {
  if (jobdir.scripts.empty()) {
    fail(ErrorCode::no_scripts_found,
         "no R scripts found in " + jobdir.root.string());
  }
  if (!interactive) {
    fail(ErrorCode::non_interactive_session,
         "no -rscript given and standard input is not a terminal");
  }
  out << "Select an R script from " << jobdir.name << ":\n";
  for (std::size_t i = 0; i < jobdir.scripts.size(); ++i) {
    out << "  [" << i + 1 << "] " << jobdir.scripts[i] << "\n";
  }
  constexpr int kAttempts = 3;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    out << "Script number [1-" << jobdir.scripts.size() << "]: " << std::flush;
    std::string line;
    if (!std::getline(in, line)) break;
    line.erase(0, line.find_first_not_of(" \t"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (jobdir.has_script(line)) return line;
    try {
      std::size_t used = 0;
      const long choice = std::stol(line, &used);
      if (used == line.size() && choice >= 1 &&
          static_cast<std::size_t>(choice) <= jobdir.scripts.size()) {
        return jobdir.scripts[static_cast<std::size_t>(choice - 1)];
      }
    } catch (const std::logic_error&) {
    }
    out << "Invalid selection '" << line << "'.\n";
  }
  fail(ErrorCode::invalid_selection, "no valid script selected");
}

}  // namespace rbc
