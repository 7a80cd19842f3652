#pragma once

#include <stdexcept>
#include <string>

namespace qdt {

// Invalid or inconsistent run configuration. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Linear solver failed to reach the requested residual. CLI exit code 3.
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// A reference/oracle computation detected that its own validity
// preconditions are violated (e.g. far-wall contamination). Exit code 4.
class OracleInvalid : public std::runtime_error {
public:
    explicit OracleInvalid(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qdt
