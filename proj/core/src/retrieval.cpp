#include "rbc/retrieval.hpp"

#include <algorithm>
#include <future>
#include <iomanip>
#include <sstream>

#include "rbc/error.hpp"
#include "rbc/timing.hpp"

namespace rbc {
namespace fs = std::filesystem;

namespace {

std::pair<std::uint64_t, std::uint64_t> count_tree(const fs::path& root,
                                                   const ExclusionSet& excl) {
  std::uint64_t files = 0, bytes = 0;
  if (!fs::is_directory(root)) return {0, 0};
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_symlink() || !entry.is_regular_file()) continue;
    const auto rel = entry.path().lexically_relative(root).generic_string();
    if (excl.excludes(rel)) continue;
    ++files;
    bytes += entry.file_size();
  }
  return {files, bytes};
}

std::string_view source_name(ResultSource s) {
  return s == ResultSource::master ? "master" : "all";
}

}  // namespace

RetrievalReport get_results(StateStore& store,
                            Provider& provider, const std::string& resource,
                            const JobDirectory& jobdir,
                            const std::string& run_name, ResultSource source) {
  Stopwatch watch;
  if (run_name.empty()) {
    fail(ErrorCode::run_name_missing, "a run name is mandatory (-runname)");
  }
  const auto doc = store.read();
  const auto& record = doc.resource(resource);
  const auto& run = doc.run({resource, jobdir.name, run_name});
  if (record.state == ResourceState::terminated) {
    fail(ErrorCode::resource_terminated,
         "resource '" + resource + "' was terminated; results of '" + run_name +
             "' are no longer reachable");
  }
  if (run.status == RunStatus::running ||
      (record.state == ResourceState::busy && record.busy_run == run_name)) {
    fail(ErrorCode::resource_busy, "run '" + run_name + "' is still executing");
  }

  RetrievalReport report;
  report.run_name = run_name;
  report.source = source;
  report.destination = jobdir.root / kRunResultsDir / run_name;

  std::vector<InstanceId> targets;
  if (source == ResultSource::master) {
    targets.push_back(record.master);
  } else {
    targets = record.instances;
    std::sort(targets.begin(), targets.end());
  }

  const auto remote_rel =
      jobdir.name + "/" + run_dir_relative(run_name) + "/" + kResultsDir;
  // timings.tsv sits at the top of the master destination and is not a result;
  // per-node directories from an earlier -fromall retrieval are left alone.
  std::vector<std::string> master_patterns{std::string("/") + kTimingsFile};
  for (const auto& id : record.instances) {
    master_patterns.push_back("/" + id.str() + "/");
  }
  const ExclusionSet master_excl(std::move(master_patterns));
  const ExclusionSet no_excl;

  std::vector<std::future<NodeRetrieval>> work;
  for (const auto& id : targets) {
    work.push_back(std::async(std::launch::async, [&, id] {
      const bool is_master_mode = source == ResultSource::master;
      const auto& excl = is_master_mode ? master_excl : no_excl;
      NodeRetrieval node;
      node.destination =
          is_master_mode ? report.destination : report.destination / id.str();
      const auto tree = provider.open_remote_tree(id);
      const auto src = tree.host_path(remote_rel);
      if (!fs::is_directory(src)) {
        if (id == record.master) {
          fail(ErrorCode::run_not_found, "no results for run '" + run_name +
                                             "' on master " + id.str());
        }
        // Workers that never held the job simply contribute nothing.
        fs::create_directories(node.destination);
      } else {
        node.transfer = sync_trees(src, node.destination, excl);
      }
      std::tie(node.files, node.bytes) = count_tree(node.destination, excl);
      return node;
    }));
  }
  std::optional<Error> first_error;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    try {
      report.per_node.emplace(targets[i], work[i].get());
    } catch (const Error& e) {
      if (!first_error) first_error = e;
    }
  }
  if (first_error) throw *first_error;

  report.seconds = watch.seconds();

  std::vector<PhaseTiming> timings;
  for (Phase phase : {Phase::gather, Phase::submit, Phase::execute}) {
    if (auto it = run.phase_timings.find(phase); it != run.phase_timings.end()) {
      timings.push_back({phase, it->second, resource, run_name});
    }
  }
  timings.push_back({Phase::retrieve, report.seconds, resource, run_name});
  write_timings(report.destination / kTimingsFile, timings);

  store.mutate([&](StateDocument& d) {
    auto& stored = d.run({resource, jobdir.name, run_name});
    stored.retrieved_to = report.destination.string();
    stored.phase_timings[Phase::retrieve] = report.seconds;
  });
  return report;
}

std::vector<RunRecord> list_runs(const StateStore& store,
                                 const std::string& resource,
                                 const JobDirectory& jobdir) {
  return store.runs_for(resource, jobdir.name);
}

std::string format_report_text(const RetrievalReport& report) {
  std::ostringstream out;
  out << "Results of " << report.run_name << " (from "
      << source_name(report.source) << ") -> " << report.destination.string()
      << "\n";
  out << "  " << std::left << std::setw(14) << "instance" << std::right
      << std::setw(8) << "files" << std::setw(12) << "bytes" << std::setw(9)
      << "copied" << std::setw(14) << "bytes copied" << "\n";
  for (const auto& [id, node] : report.per_node) {
    out << "  " << std::left << std::setw(14) << id.str() << std::right
        << std::setw(8) << node.files << std::setw(12) << node.bytes
        << std::setw(9) << node.transfer.files_copied << std::setw(14)
        << node.transfer.bytes_copied << "\n";
  }
  return std::move(out).str();
}

std::string format_report_tsv(const RetrievalReport& report) {
  std::ostringstream out;
  for (const auto& [id, node] : report.per_node) {
    out << report.run_name << '\t' << source_name(report.source) << '\t'
        << id.str() << '\t' << node.files << '\t' << node.bytes << '\t'
        << node.transfer.files_copied << '\t' << node.transfer.bytes_copied
        << '\t' << node.destination.string() << '\n';
  }
  return std::move(out).str();
}

}  // namespace rbc
