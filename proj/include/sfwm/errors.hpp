#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sfwm {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument, out-of-domain input, or malformed configuration.
class validation_error : public error {
public:
    using error::error;
};

/// Inputs are well-formed but admit no solution under the model constraints.
class infeasible_error : public error {
public:
    using error::error;
};

/// Measured rates cannot be produced by any non-negative rate budget.
class inconsistent_measurement_error : public infeasible_error {
public:
    using infeasible_error::infeasible_error;
};

/// Requested generation would exceed the configured event-count cap.
class capacity_error : public infeasible_error {
public:
    using infeasible_error::infeasible_error;
};

/// Waveform/histogram does not have the shape an operation requires.
class shape_error : public validation_error {
public:
    using validation_error::validation_error;
};

/// Histogram has no statistically detectable correlation peak.
class no_peak_error : public error {
public:
    using error::error;
};

/// File I/O or file-format violation; carries the offending byte offset.
class io_error : public error {
public:
    explicit io_error(const std::string& what, std::size_t byte_offset = 0)
        : error(what), byte_offset_(byte_offset) {}
    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

} // namespace sfwm
