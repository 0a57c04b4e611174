#pragma once

#include <stdexcept>
#include <string>

namespace nxwlan {

/// Argument outside the mathematical domain of an operation (rate <= 0, w outside [0,1], ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A value violates a structural invariant of its type (e.g. Ack frame with payload).
struct InvariantViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Rejected switch rule (egress == ingress, empty group, unregistered port, ...).
struct BadRule : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Roam request for a station this controller does not serve.
struct UnknownSta : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid scenario; what() starts with the path of the offending field.
struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace nxwlan
