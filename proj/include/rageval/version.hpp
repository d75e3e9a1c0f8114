#pragma once

namespace rageval {

inline constexpr const char* kVersion = "0.1.0";

} // namespace rageval
