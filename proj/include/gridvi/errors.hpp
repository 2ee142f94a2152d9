#pragma once

#include <stdexcept>
#include <string>

namespace gridvi {

// Exit-code classes used by the CLI: 2 input, 3 infeasible/solver, 4 numerical.

/// Malformed input: schema violations, dangling references, bad arguments.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Optimization problem has no feasible point, or a solver cannot proceed.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine failed (singular system, non-Hurwitz matrix, step underflow).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gridvi
