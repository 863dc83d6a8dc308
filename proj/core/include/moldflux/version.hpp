#pragma once

namespace moldflux {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "moldflux";

}  // namespace moldflux
