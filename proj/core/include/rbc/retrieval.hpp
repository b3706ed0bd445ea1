#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rbc/executor.hpp"

namespace rbc {

enum class ResultSource { master, all };

struct NodeRetrieval {
  TransferStats transfer;          // what this call copied
  std::uint64_t files = 0;         // files now present for this node
  std::uint64_t bytes = 0;
  std::filesystem::path destination;
};

struct RetrievalReport {
  std::string run_name;
  ResultSource source = ResultSource::master;
  std::map<InstanceId, NodeRetrieval> per_node;
  std::filesystem::path destination;  // <jobdir>/RunResults/<run_name>
  double seconds = 0.0;
};

// Cumulative per-run timings, written next to the retrieved results.
inline constexpr const char* kTimingsFile = "timings.tsv";

// Copies a run's frozen results to <jobdir>/RunResults/<run_name>/ (master) or
// <jobdir>/RunResults/<run_name>/<instance-id>/ (all), then rewrites the
// run's timings.tsv. Remote trees are only read.
RetrievalReport get_results(StateStore& store, Provider& provider,
                            const std::string& resource,
                            const JobDirectory& jobdir,
                            const std::string& run_name,
                            ResultSource source = ResultSource::master);

// Runs of one job on one resource, oldest first.
std::vector<RunRecord> list_runs(const StateStore& store,
                                 const std::string& resource,
                                 const JobDirectory& jobdir);

std::string format_report_text(const RetrievalReport& report);
std::string format_report_tsv(const RetrievalReport& report);

}  // namespace rbc
