#pragma once

#include <stdexcept>
#include <string>

namespace coalesce {

/// Invalid input: ordering, parity, length mismatch, bad configuration.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An adaptive numerical routine exhausted its subdivision budget.
class NonConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace coalesce
