#pragma once

namespace photonmux {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "photonmux";

}  // namespace photonmux
