#pragma once

namespace bowaudit {

inline constexpr const char* kToolName = "bowaudit";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace bowaudit
