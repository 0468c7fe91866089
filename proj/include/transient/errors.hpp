#pragma once

#include <stdexcept>
#include <string>

namespace transient {

/// Parameter outside the model's canonical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An equation has no root in the admissible range.
class NoSolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Window whose sample variance vanishes (all values identical).
class DegenerateWindowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested regime is not covered by the approximation.
class UnsupportedRegimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file or series that cannot be processed.
class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration key/value (maps to exit status 1 in the CLI).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace transient
