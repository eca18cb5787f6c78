// SPDX-License-Identifier: MIT
//
// logdet.hpp: log-magnitude + phase arithmetic for determinants whose raw
// values overflow or underflow double precision.
//
// A complex number z is carried as value = unit * exp(logmag) with |unit|=1
// (unit = 0 encodes an exact zero).  Determinants of matrices given in this
// representation are computed by factoring the largest magnitude out of every
// row and column, running a pivoted LU on the remaining well-scaled matrix,
// and re-attaching the scalings in log space.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "windrmt/errors.hpp"

namespace windrmt {

/// A complex number in log-magnitude / unit-phase representation.
struct LogComplex {
    double logmag = 0.0;          ///< log |z|; ignored when unit == 0
    std::complex<double> unit{1.0, 0.0};  ///< z / |z|, or 0 for z == 0

    LogComplex() = default;
    LogComplex(double lm, std::complex<double> u) : logmag(lm), unit(u) {}

    /// Build from an ordinary complex value.
    static LogComplex from(std::complex<double> z) {
        const double m = std::abs(z);
        if (m == 0.0) return LogComplex{0.0, {0.0, 0.0}};
        return LogComplex{std::log(m), z / m};
    }

    /// Build from a complex value raised to an integer power, staying in logs.
    static LogComplex from_pow(std::complex<double> z, long exponent) {
        const double m = std::abs(z);
        if (m == 0.0) {
            if (exponent == 0) return LogComplex{0.0, {1.0, 0.0}};
            if (exponent > 0) return LogComplex{0.0, {0.0, 0.0}};
            throw NumericalError("LogComplex: zero raised to a negative power");
        }
        const double phase = std::arg(z);
        return LogComplex{static_cast<double>(exponent) * std::log(m),
                          std::polar(1.0, static_cast<double>(exponent) * phase)};
    }

    [[nodiscard]] bool is_zero() const noexcept { return unit == std::complex<double>{0.0, 0.0}; }

    [[nodiscard]] std::complex<double> value() const {
        if (is_zero()) return {0.0, 0.0};
        return unit * std::exp(logmag);
    }

    LogComplex& operator*=(const LogComplex& other) {
        if (is_zero() || other.is_zero()) {
            unit = {0.0, 0.0};
            logmag = 0.0;
            return *this;
        }
        logmag += other.logmag;
        unit *= other.unit;
        // Renormalize the direction to guard against drift.
        const double m = std::abs(unit);
        if (m > 0.0) unit /= m;
        return *this;
    }

    friend LogComplex operator*(LogComplex a, const LogComplex& b) { return a *= b; }

    LogComplex& operator/=(const LogComplex& other) {
        if (other.is_zero()) throw NumericalError("LogComplex: division by zero");
        if (is_zero()) return *this;
        logmag -= other.logmag;
        unit /= other.unit;
        const double m = std::abs(unit);
        if (m > 0.0) unit /= m;
        return *this;
    }

    friend LogComplex operator/(LogComplex a, const LogComplex& b) { return a /= b; }
};

/// Determinant of an ordinary complex matrix in log-scale, via partially
/// pivoted LU: logmag accumulates log |u_ii|, unit accumulates the phases of
/// the diagonal and the permutation sign.
[[nodiscard]] inline LogComplex log_det(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols()) throw ValidationError("log_det: matrix must be square");
    if (m.rows() == 0) return LogComplex{0.0, {1.0, 0.0}};
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    double logmag = 0.0;
    std::complex<double> unit{1.0, 0.0};
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const std::complex<double> d = lu.matrixLU()(i, i);
        const double mag = std::abs(d);
        if (mag == 0.0) return LogComplex{0.0, {0.0, 0.0}};
        logmag += std::log(mag);
        unit *= d / mag;
    }
    unit *= static_cast<double>(lu.permutationP().determinant());
    const double um = std::abs(unit);
    if (um > 0.0) unit /= um;
    return LogComplex{logmag, unit};
}

/// Result of a log-scale determinant with a conditioning diagnostic.
struct ScaledDet {
    LogComplex det;
    double condition = 1.0;  ///< rough 1-norm condition estimate of the scaled matrix
};

/// Determinant of a matrix whose entries are supplied in log representation.
/// Every row and column is scaled by its largest entry magnitude before the
/// LU runs, so entries spanning hundreds of orders of magnitude are handled.
[[nodiscard]] inline ScaledDet log_det_scaled(const std::vector<std::vector<LogComplex>>& entries) {
    const std::size_t n = entries.size();
    for (const auto& row : entries) {
        if (row.size() != n) throw ValidationError("log_det_scaled: matrix must be square");
    }
    if (n == 0) return ScaledDet{LogComplex{0.0, {1.0, 0.0}}, 1.0};

    // Row scalings: the max log-magnitude of each row.
    std::vector<double> row_scale(n, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!entries[i][j].is_zero()) {
                row_scale[i] = std::max(row_scale[i], entries[i][j].logmag);
            }
        }
        if (std::isinf(row_scale[i])) {
            // A fully zero row: determinant is exactly zero.
            return ScaledDet{LogComplex{0.0, {0.0, 0.0}}, 1.0};
        }
    }
    // Column scalings on the row-scaled matrix.
    std::vector<double> col_scale(n, -std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!entries[i][j].is_zero()) {
                col_scale[j] = std::max(col_scale[j], entries[i][j].logmag - row_scale[i]);
            }
        }
        if (std::isinf(col_scale[j])) {
            return ScaledDet{LogComplex{0.0, {0.0, 0.0}}, 1.0};
        }
    }

    Eigen::MatrixXcd m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const LogComplex& e = entries[i][j];
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                e.is_zero() ? std::complex<double>{0.0, 0.0}
                            : e.unit * std::exp(e.logmag - row_scale[i] - col_scale[j]);
        }
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    double logmag = 0.0;
    std::complex<double> unit{1.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        const std::complex<double> d = lu.matrixLU()(static_cast<Eigen::Index>(i),
                                                     static_cast<Eigen::Index>(i));
        const double mag = std::abs(d);
        if (mag == 0.0) return ScaledDet{LogComplex{0.0, {0.0, 0.0}}, 1.0};
        logmag += std::log(mag);
        unit *= d / mag;
    }
    unit *= static_cast<double>(lu.permutationP().determinant());
    const double um = std::abs(unit);
    if (um > 0.0) unit /= um;
    for (std::size_t i = 0; i < n; ++i) logmag += row_scale[i] + col_scale[i];

    // Condition diagnostic from the scaled LU: 1/rcond.
    const double rcond = lu.rcond();
    const double condition = (rcond > 0.0) ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    return ScaledDet{LogComplex{logmag, unit}, condition};
}

}  // namespace windrmt
