#pragma once

#include <stdexcept>
#include <string>

namespace heatwork {

// Base for failures of numerical procedures (maps to CLI exit code 3).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct singular_input_error : numeric_error {
    using numeric_error::numeric_error;
};

struct branch_ambiguity_error : numeric_error {
    using numeric_error::numeric_error;
};

struct convergence_error : numeric_error {
    using numeric_error::numeric_error;
};

struct range_error : numeric_error {
    using numeric_error::numeric_error;
};

struct long_time_error : numeric_error {
    using numeric_error::numeric_error;
};

struct resource_error : numeric_error {
    using numeric_error::numeric_error;
};

// Invalid parameters or configuration (exit code 2).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace heatwork
