#pragma once

#include <compare>
#include <functional>
#include <ostream>
#include <string>
#include <utility>

namespace rbc {

// Opaque provider-issued identifier. The tag keeps instance, volume and
// snapshot ids from being mixed up at compile time.
template <typename Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Id& id) {
    return os << id.value_;
  }

 private:
  std::string value_;
};

using InstanceId = Id<struct InstanceTag>;
using VolumeId = Id<struct VolumeTag>;
using SnapshotId = Id<struct SnapshotTag>;

}  // namespace rbc

template <typename Tag>
struct std::hash<rbc::Id<Tag>> {
  std::size_t operator()(const rbc::Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
