#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rbc/records.hpp"

namespace rbc {

struct PhaseTiming {
  Phase phase = Phase::gather;
  double seconds = 0.0;
  std::string resource;
  std::optional<std::string> run_name;
};

enum class TimingFormat { text, tsv };

// One line, no trailing newline. TSV: phase\tresource\trun\tseconds with "-"
// for a missing run and seconds to three decimals. Negative durations
// are a logic error and throw invalid_argument.
std::string format_timing(const PhaseTiming& timing, TimingFormat format);

// Rewrites `path` with one TSV row per timing.
void write_timings(const std::filesystem::path& path,
                   const std::vector<PhaseTiming>& timings);
void append_timing(const std::filesystem::path& path, const PhaseTiming& timing);
std::vector<PhaseTiming> read_timings(const std::filesystem::path& path);

}  // namespace rbc
