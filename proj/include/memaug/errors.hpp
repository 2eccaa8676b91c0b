#pragma once

#include <stdexcept>
#include <string>

namespace memaug {

/// An index (state, observation, action, memory state, ...) is out of range.
class IndexError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// An operation was called outside its contract, e.g. stepping a terminal state.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A belief update received an observation with zero probability.
class InconsistentHistoryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested evaluation is not defined for this model (e.g. gamma = 1 without a horizon).
class UnsupportedConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A combinatorial construction would exceed its configured cap.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model or configuration document violates an invariant. `path()` locates
/// the offending field as a JSON pointer ("/dynamics/3/1").
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace memaug
