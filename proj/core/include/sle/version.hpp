#pragma once

namespace sle {

inline constexpr const char* kVersion = "0.1.0";

} // namespace sle
