#pragma once

#include <stdexcept>
#include <string>

namespace flexsac {

// Error categories. The CLI maps these onto process exit codes
// (config 2, trace 3, everything else 4).

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a trace or config file line cannot be parsed. Carries the
/// 1-based line number.
struct ParseError : TraceError {
    ParseError(const std::string& what, std::size_t line)
        : TraceError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Training diverged (non-finite losses) or a run otherwise failed.
struct RunFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace flexsac
