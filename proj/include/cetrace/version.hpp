#pragma once

namespace cetrace {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cetrace
