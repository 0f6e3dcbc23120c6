#pragma once

#include <stdexcept>
#include <string>

namespace mmill {

/// Invalid configuration or parameters. CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File system or parse failure on external data. CLI exit code 3.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical or statistical failure (empty sector counts, quadrature
/// not converging, input outside an operation's domain). CLI exit code 4.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mmill
