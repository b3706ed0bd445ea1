#pragma once

namespace rbc {

inline constexpr const char* kVersion = "0.3.0";

}  // namespace rbc
