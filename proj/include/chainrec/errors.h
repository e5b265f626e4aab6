#pragma once

#include <stdexcept>
#include <string>

namespace chainrec {

/// Malformed arguments: dimension mismatch, degenerate window, non-positive eps, ...
struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Bad or missing configuration (unknown keys, missing Lipschitz data, unparsable specs).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A map evaluation produced a non-finite result.
struct evaluation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A constructive procedure could not complete; what() carries the diagnostic.
struct construction_failed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A step that requires fixed-point-freeness met a (near-)fixed point.
struct not_fixed_point_free : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Degenerate numeric input (e.g. an all-zero height field).
struct degenerate_input : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A degree computation could not certify a value (vanishing displacement, no convergence).
struct inconclusive_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace chainrec
