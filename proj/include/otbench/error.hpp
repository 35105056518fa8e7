#pragma once

#include <stdexcept>
#include <string>

namespace otbench {

/// Bad input: malformed data, violated preconditions, bad parameters.
/// The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input that is well-formed but numerically degenerate (all-zero plane,
/// zero variance). Still a validation failure.
class DegenerateInputError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Failure while training or running a benchmark. Exit code 3.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what)
{
    if (!ok) throw ValidationError(what);
}

}  // namespace detail
}  // namespace otbench
