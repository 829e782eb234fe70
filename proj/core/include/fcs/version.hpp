#pragma once

namespace fcs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fcs
