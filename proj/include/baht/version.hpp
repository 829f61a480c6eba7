#pragma once

namespace baht {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace baht
