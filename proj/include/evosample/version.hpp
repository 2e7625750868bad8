#pragma once

namespace evosample {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace evosample
