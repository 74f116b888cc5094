#pragma once

#include <stdexcept>
#include <string>

namespace clustersync {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class NonUniformGrid : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

/// The trajectory settled onto an equilibrium instead of an oscillation.
class FixedPointDetected : public Error {
public:
    using Error::Error;
};

class NonFiniteState : public Error {
public:
    using Error::Error;
};

class InsufficientHistory : public Error {
public:
    using Error::Error;
};

class TooFewSpikes : public Error {
public:
    using Error::Error;
};

class NoStablePeriod : public Error {
public:
    using Error::Error;
};

/// Configuration problem tied to a single field path such as "network.tau".
class SchemaError : public Error {
public:
    SchemaError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace clustersync
