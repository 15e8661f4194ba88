#pragma once

namespace smic {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace smic
