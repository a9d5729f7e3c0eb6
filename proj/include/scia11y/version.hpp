#pragma once

namespace scia11y {

inline constexpr const char* kVersion = "0.3.0";

} // namespace scia11y
