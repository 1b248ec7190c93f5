#pragma once

namespace pushsum {

inline constexpr const char* kVersion = "0.1.0";

} // namespace pushsum
