#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace attracta {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidDistribution : public Error {
public:
    using Error::Error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature failed to reach its tolerance.
class IntegrationAccuracyError : public Error {
public:
    IntegrationAccuracyError(const std::string& what, double defect)
        : Error(what), defect_(defect) {}
    double defect() const noexcept { return defect_; }

private:
    double defect_;
};

/// A delayed argument was requested outside the stored solution.
class InsufficientHistory : public Error {
public:
    InsufficientHistory(const std::string& what, double from, double to)
        : Error(what), from_(from), to_(to) {}
    double from() const noexcept { return from_; }
    double to() const noexcept { return to_; }

private:
    double from_;
    double to_;
};

/// A state (or an argument of the nonlinearity) left the domain box.
class DomainExit : public Error {
public:
    DomainExit(const std::string& what, std::size_t component, double time)
        : Error(what), component_(component), time_(time) {}
    std::size_t component() const noexcept { return component_; }
    double time() const noexcept { return time_; }

private:
    std::size_t component_;
    double time_;
};

/// Step size control collapsed.
class StepSizeUnderflow : public Error {
public:
    StepSizeUnderflow(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class NotFound : public Error {
public:
    using Error::Error;
};

/// Inputs lie outside the range where a criterion applies.
class OutOfScope : public Error {
public:
    using Error::Error;
};

class UnsupportedModel : public Error {
public:
    using Error::Error;
};

/// Two independent computational routes disagreed.
class InternalConsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace attracta
