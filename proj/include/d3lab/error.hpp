#pragma once

#include <stdexcept>
#include <string>

namespace d3lab {

// Precondition violated by the caller (bad modulus, non-coprime input, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A brute-force path was asked to run past its cost guard.
class GuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A computed quantity failed an internal consistency check
// (e.g. a sum proved integer-valued did not round cleanly).
class CheckFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Adaptive quadrature could not reach the requested tolerance.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace d3lab
