#pragma once

namespace polalign {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace polalign
