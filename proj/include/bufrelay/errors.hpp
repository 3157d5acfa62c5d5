#pragma once

#include <stdexcept>
#include <string>

namespace bufrelay {

// Bad user-supplied values (geometry, powers, rate sets, CLI input).
struct invalid_parameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Operation called in a regime it does not support.
struct invalid_state : std::logic_error {
    using std::logic_error::logic_error;
};

// A numerical routine could not reach the requested accuracy.
struct numeric_failure : std::runtime_error {
    numeric_failure(const std::string& what, double achieved_tolerance, double partial_value)
        : std::runtime_error(what), achieved(achieved_tolerance), partial(partial_value) {}
    double achieved;
    double partial;
};

// A cross-check between two routes through the theory failed; indicates a bug
// upstream, never a user error.
struct internal_error : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace bufrelay
