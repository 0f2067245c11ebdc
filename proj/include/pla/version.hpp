#pragma once

namespace pla {

inline constexpr const char* kToolName = "pla";
inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace pla
