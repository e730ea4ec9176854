#pragma once

#include <stdexcept>
#include <string>

namespace trendcast {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input layout (bad header, unparsable file structure).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Structurally valid input with no usable content.
class EmptyInputError : public Error {
public:
    using Error::Error;
};

/// Semantically invalid data (duplicate dates, non-positive closes).
class DataError : public Error {
public:
    using Error::Error;
};

/// Alignment would need a value before the first observation.
class BackfillError : public Error {
public:
    using Error::Error;
};

/// Min-max fit over a constant sample.
class DegenerateScalerError : public Error {
public:
    using Error::Error;
};

/// Requested test year not fully covered by the series.
class CoverageError : public Error {
public:
    using Error::Error;
};

/// Split would leave no training rows.
class InsufficientHistoryError : public Error {
public:
    using Error::Error;
};

/// Feature sample with zero variance (gamma 'scale' undefined).
class DegenerateFeatureError : public Error {
public:
    using Error::Error;
};

/// Invalid hyperparameters or solver settings.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Operation invoked on an object in the wrong state.
class StateError : public Error {
public:
    using Error::Error;
};

/// Fitness function produced a non-finite score.
class FitnessError : public Error {
public:
    using Error::Error;
};

/// Mismatched list lengths or ragged result grids.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Division by a zero actual value in a relative metric.
class DivisionError : public Error {
public:
    using Error::Error;
};

/// Invalid run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Missing or unreadable input files.
class InputError : public Error {
public:
    using Error::Error;
};

/// Filesystem or network failure, with the offending path in the message.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace trendcast
