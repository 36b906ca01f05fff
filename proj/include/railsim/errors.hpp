#pragma once

#include <stdexcept>
#include <string>

namespace railsim {

// Invalid model/config parameters or malformed input.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Structured-value validation failed (named field in the message).
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical analysis cannot proceed (e.g. non-positive-definite stiffness).
struct AnalysisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Integration produced a non-finite state.
struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& what, double t_fail)
        : std::runtime_error(what), time(t_fail) {}
    double time;
};

// Integer time arithmetic left the representable range.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Schedule table construction failed (overfull RT-cycle, bad bounds).
struct ScheduleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Workload / run configuration inconsistent with the schedule table.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace railsim
