#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ermakov {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Rejected source text. Carries the byte offset of the failure and the
/// token classes that would have been accepted there.
class ParseError : public Error {
public:
    ParseError(std::string msg, std::size_t offset, std::vector<std::string> expected)
        : Error(std::move(msg)), offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

/// Evaluation outside the domain of some node (division by zero, ln of a
/// non-positive value, ...). Carries the offending subexpression and the
/// argument at which it failed.
class EvalDomainError : public Error {
public:
    EvalDomainError(std::string msg, std::string node, double argument)
        : Error(std::move(msg)), node_(std::move(node)), argument_(argument) {}

    const std::string& node() const { return node_; }
    double argument() const { return argument_; }

private:
    std::string node_;
    double argument_;
};

/// A state touched one of the coordinate poles (x = 0, y = 0, or theta within
/// the guard band of a multiple of pi/2).
class PoleError : public Error {
public:
    using Error::Error;
};

/// Integration could not continue. t_reached() is the last point the
/// integrator produced a valid state at.
class IntegrationError : public Error {
public:
    IntegrationError(std::string msg, double tReached)
        : Error(std::move(msg)), tReached_(tReached) {}

    double tReached() const { return tReached_; }

private:
    double tReached_;
};

/// Adaptive quadrature failed to converge within the refinement budget.
class QuadratureError : public Error {
public:
    using Error::Error;
};

/// A constructor precondition did not hold (constraint violations,
/// sign-definiteness failures, inconsistent states).
class ConstraintError : public Error {
public:
    using Error::Error;
};

}  // namespace ermakov
