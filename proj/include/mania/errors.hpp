#pragma once

#include <stdexcept>
#include <string>

namespace mania {

/// Argument lies outside the domain of an operation (e.g. a point outside [0,1]).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Element or node index out of range.
struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// Invalid construction parameter (rule size, mesh nesting, solver settings).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A user-supplied function produced a non-finite value.
struct EvaluationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A precondition on the inputs was violated (missing boundary conditions, mismatched h).
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Fractional index or cutoff exponent outside the regime where the estimates hold.
/// The message names the violated inequality.
struct RegimeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Non-finite energy encountered during a solve.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A computed quantity that must be nonnegative came out negative beyond rounding.
struct ConsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Not enough usable data for a rate study.
struct StudyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Report or configuration file could not be read or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace mania
