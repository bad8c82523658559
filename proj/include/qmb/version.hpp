#pragma once

namespace qmb {

inline constexpr const char* kVersion = "qmb 0.1.0";

}  // namespace qmb
