#pragma once

#include <span>
#include <string_view>

namespace rbc {

// Nominal catalog entry. Only metadata and the ledger rate depend on it.
struct InstanceType {
  std::string_view name;
  int vcpus;
  double memory_gib;
  double hourly_rate_usd;
};

std::span<const InstanceType> instance_catalog() noexcept;
const InstanceType* find_instance_type(std::string_view name) noexcept;

}  // namespace rbc
