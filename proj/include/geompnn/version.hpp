#pragma once

namespace geompnn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace geompnn
