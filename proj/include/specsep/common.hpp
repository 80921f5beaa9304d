#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specsep {

inline constexpr std::string_view kVersion = "0.1.0";

// Error categories map to CLI exit codes: ConfigError -> 2, DataError -> 3,
// NumericError -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

}  // namespace specsep
