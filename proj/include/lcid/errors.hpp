#pragma once

#include <stdexcept>
#include <string>

namespace lcid {

/// Numerical failure (non-finite data, factorization breakdown, ...).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A matrix required to be positive semidefinite is not, beyond tolerance.
class NotPsdError : public NumericError {
public:
    using NumericError::NumericError;
};

/// A least-squares subproblem is rank deficient.
class RankDeficiencyError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace lcid
