// SPDX-License-Identifier: MIT
//
// errors.hpp: exception taxonomy for the windrmt library.
//
// Three error families map onto the CLI process exit codes:
//   ValidationError  -> exit 3 (bad inputs: broken preconditions, degenerate
//                       configurations, violated model assumptions)
//   NumericalError   -> exit 4 (a computation ran but could not reach the
//                       requested accuracy, or produced non-finite values)
// Config / JSON parse failures are reported by the CLI layer itself (exit 2).

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace windrmt {

/// Base class for all library exceptions.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Broken precondition or invalid configuration (CLI exit code 3).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

/// A model assumption does not hold for the supplied inputs, e.g. the two
/// curve polynomials share a zero on the unit circle.
class AssumptionViolation : public ValidationError {
public:
    explicit AssumptionViolation(const std::string& what) : ValidationError(what) {}
};

/// Evaluation points too close, vanishing kernel denominators, and similar
/// configuration-specific degeneracies.
class DegenerateConfiguration : public ValidationError {
public:
    explicit DegenerateConfiguration(const std::string& what) : ValidationError(what) {}
};

/// Numerical failure: requested accuracy not reached, overflow, non-finite
/// intermediate values (CLI exit code 4).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(what) {}
};

/// Accuracy failure that still produced a best-effort estimate; the estimate
/// and the error bound reached are attached for diagnostics.
class AccuracyError : public NumericalError {
public:
    AccuracyError(const std::string& what, std::complex<double> best_estimate,
                  double error_estimate)
        : NumericalError(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

    [[nodiscard]] std::complex<double> best_estimate() const noexcept { return best_estimate_; }
    [[nodiscard]] double error_estimate() const noexcept { return error_estimate_; }

private:
    std::complex<double> best_estimate_;
    double error_estimate_;
};

/// An integrand returned a non-finite value; carries the offending location.
class EvaluationError : public NumericalError {
public:
    EvaluationError(const std::string& what, double location)
        : NumericalError(what), location_(location) {}

    [[nodiscard]] double location() const noexcept { return location_; }

private:
    double location_;
};

/// Monte Carlo / rejection sampling could not produce a sample within budget.
class SamplingError : public NumericalError {
public:
    explicit SamplingError(const std::string& what) : NumericalError(what) {}
};

}  // namespace windrmt
