#include "rbc/timing.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rbc/error.hpp"
#include "rbc/file_lock.hpp"

namespace rbc {
namespace fs = std::filesystem;

namespace {

std::string seconds_text(double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", seconds);
  return buf;
}

std::string tsv_row(const PhaseTiming& t) {
  return std::string(to_string(t.phase)) + "\t" + t.resource + "\t" +
         t.run_name.value_or("-") + "\t" + seconds_text(t.seconds);
}

void check(const PhaseTiming& t) {
  if (!(t.seconds >= 0.0)) {
    fail(ErrorCode::invalid_argument,
         "negative duration for phase " + std::string(to_string(t.phase)));
  }
}

}  // namespace

std::string format_timing(const PhaseTiming& timing, TimingFormat format) {
  check(timing);
  if (format == TimingFormat::tsv) return tsv_row(timing);
  std::string line = "timing: " + std::string(to_string(timing.phase)) + " " +
                     timing.resource;
  if (timing.run_name) line += " (" + *timing.run_name + ")";
  return line + " took " + seconds_text(timing.seconds) + " s";
}

void write_timings(const fs::path& path, const std::vector<PhaseTiming>& timings) {
  std::string content;
  for (const auto& t : timings) {
    check(t);
    content += tsv_row(t) + "\n";
  }
  fs::create_directories(path.parent_path());
  atomic_write(path, content);
}

void append_timing(const fs::path& path, const PhaseTiming& timing) {
  check(timing);
  std::ofstream out(path, std::ios::app);
  if (!out) fail(ErrorCode::io_error, "cannot append to " + path.string());
  out << tsv_row(timing) << "\n";
}

std::vector<PhaseTiming> read_timings(const fs::path& path) {
  std::vector<PhaseTiming> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t pos = 0;
    for (auto tab = line.find('\t'); tab != std::string::npos;
         tab = line.find('\t', pos)) {
      f.push_back(line.substr(pos, tab - pos));
      pos = tab + 1;
    }
    f.push_back(line.substr(pos));
    auto phase = f.size() == 4 ? parse_phase(f[0]) : std::nullopt;
    if (!phase) {
      fail(ErrorCode::invalid_argument, "bad timing row in " + path.string() +
                                            ": '" + line + "'");
    }
    PhaseTiming t;
    t.phase = *phase;
    t.resource = f[1];
    if (f[2] != "-") t.run_name = f[2];
    t.seconds = std::stod(f[3]);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace rbc
