#pragma once

#include <stdexcept>
#include <string>

namespace trendpu {

/// Failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
    Domain,                 // non-finite or out-of-domain input
    Length,                 // trace too short
    Shape,                  // dimension mismatch
    Size,                   // too few elements / empty batch
    Degenerate,             // no meaningful partition or class
    Parse,                  // malformed input file
    Config,                 // invalid configuration
    Numeric,                // training diverged
    Unlearnable,            // |P|/|U| <= pi
    EvaluationUnavailable,  // hidden labels missing
    Bounds,                 // index out of range
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace trendpu
