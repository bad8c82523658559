// Failure classes aligned with the CLI exit codes: configuration problems
// exit 2, numerical failures exit 3, I/O failures exit 4.
#pragma once

#include <stdexcept>

namespace qmb {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitIo = 4;

}  // namespace qmb
