#pragma once

namespace ncglab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ncglab
