#pragma once

#include <stdexcept>
#include <string>

namespace permlim {

// Process exit codes used by the CLI. Every library error maps onto one.
enum class ExitCode : int {
    ok = 0,
    config = 1,
    validation = 2,
    bridge = 3,
    balance = 4,
    spectral = 5,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ExitCode::config, what) {}
};

// Argument outside [0,1] or an otherwise unusable input value.
struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(ExitCode::config, what) {}
};

struct BridgeError : Error {
    BridgeError(const std::string& what, double last_residual, int iterations)
        : Error(ExitCode::bridge, what), last_residual(last_residual), iterations(iterations) {}
    double last_residual;
    int iterations;
};

struct GridError : Error {
    explicit GridError(const std::string& what) : Error(ExitCode::balance, what) {}
};

struct BalanceError : Error {
    BalanceError(const std::string& what, double last_residual = 0.0)
        : Error(ExitCode::balance, what), last_residual(last_residual) {}
    double last_residual;
};

// Cap exceeded or non-finite input. Cap violations are configuration problems.
struct PermanentError : Error {
    explicit PermanentError(const std::string& what) : Error(ExitCode::config, what) {}
};

struct SpectralError : Error {
    explicit SpectralError(const std::string& what) : Error(ExitCode::spectral, what) {}
};

// Sink for non-fatal diagnostics. Library code reports through it; the CLI prints to stderr.
class Warnings {
public:
    using Handler = void (*)(const std::string&);

    static void emit(const std::string& message);
    // Returns the previous handler. nullptr restores the default (stderr).
    static Handler set_handler(Handler handler);
};

}  // namespace permlim
