#pragma once

#include <stdexcept>
#include <string>

namespace lecam {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sizes or parameter sets that do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A value that violates a type invariant (row sums, signs, duplicates).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A parameter puts mass where the dominating measure has none.
class DominationError : public Error {
public:
    using Error::Error;
};

/// The LP solver did not reach a certified optimum.
class SolverError : public Error {
public:
    using Error::Error;
};

} // namespace lecam
