#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfsc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A requested derivative order is not implemented by an evaluator.
class UnsupportedOrder : public Error {
public:
    using Error::Error;
};

// Non-finite state produced during time stepping.
class Divergence : public Error {
public:
    Divergence(const std::string& what, long step) : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

class CapacityExceeded : public Error {
public:
    CapacityExceeded(const std::string& what, std::size_t required_bytes)
        : Error(what + " (requires " + std::to_string(required_bytes) + " bytes)"), required_(required_bytes) {}
    std::size_t required_bytes() const { return required_; }

private:
    std::size_t required_;
};

class PreconditionFailed : public Error {
public:
    using Error::Error;
};

class DomainTooSmall : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

// Grid cannot resolve the requested structure (aliasing, unresolved widths).
class ResolutionError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace mfsc
