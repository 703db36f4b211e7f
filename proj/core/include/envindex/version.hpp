#pragma once

namespace envindex {

inline constexpr const char* kVersion = "0.1.0";

} // namespace envindex
