#pragma once

namespace mctrunc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mctrunc
