#pragma once

#include <stdexcept>
#include <string>

namespace lookback {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad or missing configuration. The CLI maps this family to exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A strict parameter invariant failed (nonpositive volatility, negative eta, ...).
class InvalidParams : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Numerical failure. The CLI maps this family to exit code 3.
class NumericError : public Error {
public:
    using Error::Error;
};

// The CIR intensity touched the floor inside a Malliavin-derivative integral.
class IntensityHitZero : public NumericError {
public:
    using NumericError::NumericError;
};

class ClosedFormUnavailable : public NumericError {
public:
    using NumericError::NumericError;
};

// A Laplace transform returned a non-finite value at an inversion node.
class EvaluationFailed : public NumericError {
public:
    using NumericError::NumericError;
};

// Filesystem trouble while writing outputs.
class IoError : public Error {
public:
    using Error::Error;
};

class InsertOffGrid : public Error {
public:
    using Error::Error;
};

}  // namespace lookback
