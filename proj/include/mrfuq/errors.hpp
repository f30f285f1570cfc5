#pragma once

#include <stdexcept>
#include <string>

namespace mrfuq {

// Exit codes used by the command-line front end.
enum class ExitCode : int {
    ok = 0,
    input = 2,
    capacity = 3,
    precondition = 4,
    internal = 5
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

struct InputError : Error {
    explicit InputError(const std::string& w) : Error(ExitCode::input, w) {}
};

struct CapacityError : Error {
    explicit CapacityError(const std::string& w) : Error(ExitCode::capacity, w) {}
};

struct PreconditionError : Error {
    explicit PreconditionError(const std::string& w) : Error(ExitCode::precondition, w) {}
};

/// Raised for perturbations that are neither parametric nor edge-adding.
struct UnsupportedPerturbation : Error {
    explicit UnsupportedPerturbation(const std::string& w)
        : Error(ExitCode::precondition, w) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error(ExitCode::input, w) {}
};

/// Requested divergence level is out of reach; `achievable` holds the max found.
struct RangeError : Error {
    RangeError(const std::string& w, double achievable)
        : Error(ExitCode::precondition, w), achievable(achievable) {}
    double achievable;
};

struct ParseError : InputError {
    ParseError(const std::string& msg, std::size_t line, std::size_t col)
        : InputError(std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
          line(line), col(col) {}
    std::size_t line;
    std::size_t col;
};

} // namespace mrfuq
