#pragma once

namespace sppl {

inline constexpr const char* kVersion = "0.1.0";

} // namespace sppl
