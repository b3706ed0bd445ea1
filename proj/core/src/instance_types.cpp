#include "rbc/instance_types.hpp"

#include <algorithm>
#include <array>

namespace rbc {
namespace {

// On-demand Linux prices circa 2013 (us-east-1).
constexpr std::array<InstanceType, 11> kCatalog{{
    {"t1.micro", 1, 0.613, 0.020},
    {"m1.small", 1, 1.7, 0.060},
    {"m1.medium", 1, 3.75, 0.120},
    {"m1.large", 2, 7.5, 0.240},
    {"m1.xlarge", 4, 15.0, 0.480},
    {"m2.xlarge", 2, 17.1, 0.410},
    {"m2.2xlarge", 4, 34.2, 0.820},
    {"m2.4xlarge", 8, 68.4, 1.640},
    {"c1.medium", 2, 1.7, 0.145},
    {"c1.xlarge", 8, 7.0, 0.580},
    {"cc2.8xlarge", 32, 60.5, 2.400},
}};

}  // namespace

std::span<const InstanceType> instance_catalog() noexcept { return kCatalog; }

const InstanceType* find_instance_type(std::string_view name) noexcept {
  auto it = std::find_if(kCatalog.begin(), kCatalog.end(),
                         [&](const InstanceType& t) { return t.name == name; });
  return it == kCatalog.end() ? nullptr : &*it;
}

}  // namespace rbc
