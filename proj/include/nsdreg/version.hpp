#pragma once

namespace nsdreg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nsdreg
