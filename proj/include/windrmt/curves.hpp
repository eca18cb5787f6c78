// SPDX-License-Identifier: MIT
//
// curves.hpp: the pair of Laurent polynomials (a, b) that deforms the matrix
// pencil K(p) = a(p) K1 + b(p) K2 along the unit circle, together with the
// derived frame quantities used everywhere else:
//
//   nu(p)     = (a(p), b(p))           the curve in C^2
//   kappa(p)  = a(p) / b(p)            its image in CP^1 (projective chart)
//   kappa'/kappa = a'/a - b'/b         logarithmic velocity of the chart
//   nu_gamma  = (|a|^(g-1) a, |b|^(g-1) b)   the weight-deformed direction
//
// Model assumption: a and b never vanish simultaneously on the unit circle.
// validate_curve locates all circle zeros of each polynomial (roots of the
// associated ordinary polynomial via the companion matrix, Newton-polished),
// and rejects curves with a shared zero.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "windrmt/errors.hpp"
#include "windrmt/numerics.hpp"

namespace windrmt {

/// Inclusion tolerance for counting a polynomial root as lying on the circle.
inline constexpr double kCircleZeroTolerance = 1e-9;
/// Roots closer than this (in angle) are merged into one zero of higher order.
inline constexpr double kZeroMergeTolerance = 1e-8;
/// Raw companion-matrix roots closer than this (relative, in the plane) are
/// treated as one multiple root and replaced by their cluster mean.
inline constexpr double kRootClusterRadius = 1e-7;

/// Sparse Laurent polynomial sum_k c_k p^k with integer (possibly negative)
/// exponents.
struct LaurentPolynomial {
    std::map<int, Complex> coefficients;

    LaurentPolynomial() = default;
    explicit LaurentPolynomial(std::map<int, Complex> coeffs) : coefficients(std::move(coeffs)) {
        prune();
    }

    /// Convenience builder: {{exponent, value}, ...}.
    static LaurentPolynomial from_terms(
        std::initializer_list<std::pair<int, Complex>> terms) {
        LaurentPolynomial poly;
        for (const auto& [k, c] : terms) poly.coefficients[k] += c;
        poly.prune();
        return poly;
    }

    void prune() {
        for (auto it = coefficients.begin(); it != coefficients.end();) {
            if (it->second == Complex{0.0, 0.0}) {
                it = coefficients.erase(it);
            } else {
                ++it;
            }
        }
    }

    [[nodiscard]] bool is_zero() const noexcept { return coefficients.empty(); }

    [[nodiscard]] int min_exponent() const {
        if (is_zero()) throw ValidationError("LaurentPolynomial: zero polynomial has no exponents");
        return coefficients.begin()->first;
    }
    [[nodiscard]] int max_exponent() const {
        if (is_zero()) throw ValidationError("LaurentPolynomial: zero polynomial has no exponents");
        return coefficients.rbegin()->first;
    }
};

/// Evaluate the polynomial (order 0) or its derivative (order 1) at p != 0.
[[nodiscard]] inline Complex eval_laurent(const LaurentPolynomial& poly, Complex p, int order = 0) {
    if (order != 0 && order != 1) {
        throw ValidationError("eval_laurent: derivative order must be 0 or 1");
    }
    if (p == Complex{0.0, 0.0}) {
        throw ValidationError("eval_laurent: evaluation point must be nonzero");
    }
    Complex sum{0.0, 0.0};
    for (const auto& [k, c] : poly.coefficients) {
        if (order == 0) {
            sum += c * std::pow(p, k);
        } else {
            if (k == 0) continue;
            sum += c * static_cast<double>(k) * std::pow(p, k - 1);
        }
    }
    return sum;
}

/// A zero of a curve polynomial on the unit circle.
struct CurveZero {
    double angle = 0.0;  ///< in [0, 2*pi)
    int order = 1;
};

namespace detail {

/// All roots of poly * p^(-min_exponent) (an ordinary polynomial), via the
/// companion matrix, polished with a few Newton steps.
[[nodiscard]] inline std::vector<Complex> polynomial_roots(const LaurentPolynomial& poly) {
    const int kmin = poly.min_exponent();
    const int kmax = poly.max_exponent();
    const int degree = kmax - kmin;
    if (degree == 0) return {};
    std::vector<Complex> coeff(static_cast<std::size_t>(degree) + 1, Complex{0.0, 0.0});
    for (const auto& [k, c] : poly.coefficients) coeff[static_cast<std::size_t>(k - kmin)] = c;

    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(degree, degree);
    for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < degree; ++i) {
        companion(i, degree - 1) = -coeff[static_cast<std::size_t>(i)] /
                                   coeff[static_cast<std::size_t>(degree)];
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("validate_curve: companion eigenvalue solve failed");
    }

    auto value_and_derivative = [&coeff, degree](Complex z) {
        Complex v{0.0, 0.0};
        Complex d{0.0, 0.0};
        for (int k = degree; k >= 0; --k) {  // Horner on value and derivative together
            d = d * z + v;
            v = v * z + coeff[static_cast<std::size_t>(k)];
        }
        return std::pair<Complex, Complex>{v, d};
    };

    std::vector<Complex> roots;
    roots.reserve(static_cast<std::size_t>(degree));
    for (int i = 0; i < degree; ++i) {
        Complex z = solver.eigenvalues()(i);
        // Guarded Newton polish.  Steps are accepted only when small and when
        // they shrink |value|: near a multiple root the residual is noise-
        // dominated while the derivative is tiny, and an unguarded step can
        // catapult the iterate far from the root.
        for (int it = 0; it < 8; ++it) {
            const auto [v, d] = value_and_derivative(z);
            if (std::abs(d) == 0.0) break;
            const Complex step = v / d;
            if (!(std::abs(step) < 1e-3 * std::max(1.0, std::abs(z)))) break;
            const auto [v_next, d_next] = value_and_derivative(z - step);
            (void)d_next;
            if (!(std::abs(v_next) < std::abs(v))) break;
            z -= step;
            if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        roots.push_back(z);
    }

    // Collapse clusters of nearby roots onto their mean.  An m-fold root
    // perturbed at machine precision splits symmetrically by ~eps^(1/m)
    // (1.5e-8 for a double root), so individually polished members cannot
    // reach the 1e-9 circle tolerance -- but their mean cancels the leading
    // splitting term and recovers the root to ~eps^(2/m).  Each cluster is
    // returned as `size` copies of its mean, so downstream merging sums the
    // orders.  Supported reliably up to double roots; roots separated by
    // less than the cluster radius are treated as one multiple root.
    const std::size_t n = roots.size();
    std::vector<std::size_t> parent(n);
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
    auto find = [&parent](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double scale = std::max({1.0, std::abs(roots[i]), std::abs(roots[j])});
            if (std::abs(roots[i] - roots[j]) <= kRootClusterRadius * scale) {
                parent[find(i)] = find(j);
            }
        }
    }
    std::vector<Complex> merged;
    merged.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (find(i) != i) continue;
        Complex mean{0.0, 0.0};
        int count = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (find(j) == find(i)) {
                mean += roots[j];
                ++count;
            }
        }
        mean /= static_cast<double>(count);
        for (int k = 0; k < count; ++k) merged.push_back(mean);
    }
    return merged;
}

[[nodiscard]] inline double wrap_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t -= kTwoPi;
    return t;
}

/// Circular distance between two angles.
[[nodiscard]] inline double angle_distance(double x, double y) {
    double d = std::fabs(x - y);
    return std::min(d, kTwoPi - d);
}

/// Circle zeros of a polynomial: roots within kCircleZeroTolerance of the
/// unit circle, merged within kZeroMergeTolerance with orders summed.
[[nodiscard]] inline std::vector<CurveZero> circle_zeros(const LaurentPolynomial& poly) {
    std::vector<double> angles;
    for (const Complex& r : polynomial_roots(poly)) {
        if (std::fabs(std::abs(r) - 1.0) <= kCircleZeroTolerance) {
            angles.push_back(wrap_angle(std::arg(r)));
        }
    }
    if (angles.empty()) return {};
    std::sort(angles.begin(), angles.end());
    // Cluster circularly: rotate so index 0 starts a cluster.
    std::size_t start = 0;
    const std::size_t n = angles.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double prev = angles[(i + n - 1) % n];
        if (angle_distance(angles[i], prev) > kZeroMergeTolerance) {
            start = i;
            break;
        }
    }
    std::vector<CurveZero> zeros;
    double cluster_ref = angles[start];
    double cluster_sum = 0.0;
    int cluster_count = 0;
    auto flush = [&]() {
        if (cluster_count > 0) {
            zeros.push_back(CurveZero{wrap_angle(cluster_sum / cluster_count), cluster_count});
        }
    };
    for (std::size_t k = 0; k < n; ++k) {
        double theta = angles[(start + k) % n];
        // Unwrap the cluster around its reference so the mean is meaningful.
        if (theta - cluster_ref > kPi) theta -= kTwoPi;
        if (cluster_ref - theta > kPi) theta += kTwoPi;
        if (cluster_count > 0 && angle_distance(theta, cluster_ref) > kZeroMergeTolerance) {
            flush();
            cluster_sum = 0.0;
            cluster_count = 0;
        }
        cluster_ref = theta;
        cluster_sum += theta;
        ++cluster_count;
    }
    flush();
    std::sort(zeros.begin(), zeros.end(),
              [](const CurveZero& x, const CurveZero& y) { return x.angle < y.angle; });
    return zeros;
}

}  // namespace detail

/// A validated curve pair: the polynomials plus their located circle zeros.
struct CurvePair {
    LaurentPolynomial a;
    LaurentPolynomial b;
    std::vector<CurveZero> zeros_a;
    std::vector<CurveZero> zeros_b;
};

/// Validate the never-vanish-simultaneously assumption and locate all circle
/// zeros.  One of the two polynomials may be identically zero, in which case
/// the other must be zero-free on the circle.
[[nodiscard]] inline CurvePair validate_curve(const LaurentPolynomial& a,
                                              const LaurentPolynomial& b) {
    if (a.is_zero() && b.is_zero()) {
        throw ValidationError("validate_curve: both polynomials are identically zero");
    }
    CurvePair curve{a, b, {}, {}};
    if (!a.is_zero()) curve.zeros_a = detail::circle_zeros(a);
    if (!b.is_zero()) curve.zeros_b = detail::circle_zeros(b);
    if (a.is_zero() && !curve.zeros_b.empty()) {
        throw AssumptionViolation(
            "validate_curve: a == 0 while b vanishes on the circle at angle " +
            std::to_string(curve.zeros_b.front().angle));
    }
    if (b.is_zero() && !curve.zeros_a.empty()) {
        throw AssumptionViolation(
            "validate_curve: b == 0 while a vanishes on the circle at angle " +
            std::to_string(curve.zeros_a.front().angle));
    }
    for (const CurveZero& za : curve.zeros_a) {
        for (const CurveZero& zb : curve.zeros_b) {
            if (detail::angle_distance(za.angle, zb.angle) <= kZeroMergeTolerance) {
                std::ostringstream oss;
                oss << "validate_curve: a and b share a circle zero at angle " << za.angle;
                throw AssumptionViolation(oss.str());
            }
        }
    }
    return curve;
}

/// Pointwise data of the curve at p: values, derivatives, projective chart.
struct CurveFrame {
    Complex a, b;            ///< nu(p)
    Complex a_prime, b_prime;  ///< nu'(p)
    Complex kappa{0.0, 0.0};   ///< a/b, meaningful unless kappa_at_infinity
    bool kappa_at_infinity = false;
    Complex kappa_log_deriv{0.0, 0.0};  ///< a'/a - b'/b where defined
    bool log_deriv_singular = false;    ///< true when a or b vanishes at p
};

[[nodiscard]] inline CurveFrame curve_frame(const CurvePair& curve, Complex p) {
    CurveFrame f;
    f.a = curve.a.is_zero() ? Complex{0.0, 0.0} : eval_laurent(curve.a, p, 0);
    f.b = curve.b.is_zero() ? Complex{0.0, 0.0} : eval_laurent(curve.b, p, 0);
    f.a_prime = curve.a.is_zero() ? Complex{0.0, 0.0} : eval_laurent(curve.a, p, 1);
    f.b_prime = curve.b.is_zero() ? Complex{0.0, 0.0} : eval_laurent(curve.b, p, 1);
    if (f.b == Complex{0.0, 0.0}) {
        f.kappa_at_infinity = true;
    } else {
        f.kappa = f.a / f.b;
    }
    if (f.a == Complex{0.0, 0.0} || f.b == Complex{0.0, 0.0}) {
        f.log_deriv_singular = true;
    } else {
        f.kappa_log_deriv = f.a_prime / f.a - f.b_prime / f.b;
    }
    return f;
}

/// The exponent-deformed direction (|a|^(gamma-1) a, |b|^(gamma-1) b); the
/// convention 0 * |0|^(gamma-1) = 0 applies for every gamma > 0.
[[nodiscard]] inline std::pair<Complex, Complex> nu_gamma(const CurvePair& curve, Complex p,
                                                          double gamma) {
    if (!(gamma > 0.0)) throw ValidationError("nu_gamma: gamma must be positive");
    const CurveFrame f = curve_frame(curve, p);
    auto deform = [gamma](Complex v) {
        const double m = std::abs(v);
        if (m == 0.0) return Complex{0.0, 0.0};
        return std::pow(m, gamma - 1.0) * v;
    };
    return {deform(f.a), deform(f.b)};
}

/// All circle zeros of a and b combined into one PoleSet (angles sorted).
[[nodiscard]] inline PoleSet curve_pole_set(const CurvePair& curve) {
    std::vector<std::pair<double, int>> all;
    for (const CurveZero& z : curve.zeros_a) all.emplace_back(z.angle, z.order);
    for (const CurveZero& z : curve.zeros_b) all.emplace_back(z.angle, z.order);
    std::sort(all.begin(), all.end());
    PoleSet poles;
    for (const auto& [angle, order] : all) {
        if (!poles.angles.empty() && angle - poles.angles.back() <= kZeroMergeTolerance) {
            poles.orders.back() += order;
        } else {
            poles.angles.push_back(angle);
            poles.orders.push_back(order);
        }
    }
    return poles;
}

}  // namespace windrmt
