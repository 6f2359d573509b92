#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdnn {

/// Process exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

/// Base of every error raised by the library. Each kind maps onto one CLI exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

/// An argument outside the domain of a mathematical operation (jet division by zero, log of a
/// negative number, relative error against an all-zero field).
class DomainError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return kExitNumerical; }
};

/// API misuse: a Var from another tape, an interface point that is not on the interface, etc.
class UsageError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return kExitConfig; }
};

/// Invalid problem, geometry, network or training configuration.
class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return kExitConfig; }
};

/// Non-finite value produced while evaluating or differentiating.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what, std::ptrdiff_t op_index = -1)
        : Error(what), op_index_(op_index) {}

    int exit_code() const noexcept override { return kExitNumerical; }

    /// Tape index of the offending operation, or -1 when the error did not come from a tape.
    std::ptrdiff_t op_index() const noexcept { return op_index_; }

private:
    std::ptrdiff_t op_index_;
};

class IoError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return kExitIo; }
};

}  // namespace cdnn
