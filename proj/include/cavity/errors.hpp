#pragma once

#include <stdexcept>
#include <string>

namespace cavity {

// Bad input: incompatible sector, invalid parameters, malformed config.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A numerical routine could not deliver (non-convergence, cutoff cap, ...).
struct ComputeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cavity
