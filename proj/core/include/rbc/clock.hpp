#pragma once

#include <chrono>
#include <cstdint>
#include <functional>

namespace rbc {

using Timestamp = std::chrono::sys_time<std::chrono::nanoseconds>;
using Clock = std::function<Timestamp()>;

inline Timestamp system_now() {
  return std::chrono::time_point_cast<std::chrono::nanoseconds>(
      std::chrono::system_clock::now());
}

inline std::int64_t to_nanos(Timestamp t) noexcept {
  return t.time_since_epoch().count();
}

inline Timestamp from_nanos(std::int64_t ns) noexcept {
  return Timestamp{std::chrono::nanoseconds{ns}};
}

inline double seconds_between(Timestamp from, Timestamp to) noexcept {
  return std::chrono::duration<double>(to - from).count();
}

// Wall-clock stopwatch for phase timings.
class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace rbc
