// SPDX-License-Identifier: MIT
//
// Large-N machinery for the mean winding number: the geometric-phase leading
// term with its principal-value subleading correction, the exact and
// asymptotic zero-counting functions, the Laplace expansion of the moment
// denominator, and the erfc edge approximation with its polynomial
// coefficients.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "windrmt/curves.hpp"
#include "windrmt/errors.hpp"
#include "windrmt/numerics.hpp"
#include "windrmt/polya.hpp"

namespace windrmt {

/// Decomposition of the large-N mean winding number: assembled value is
/// leading_coefficient * n + subleading_value, with the o(1) remainder
/// dropped.
struct AsymptoticBreakdown {
    double leading_coefficient = 0.0;  ///< geometric phase of the weighted frame
    double subleading_value = 0.0;     ///< prefactor-weighted principal-value term
    int n = 0;
    double assembled = 0.0;
};

/// Polynomial coefficients of the edge expansion, all evaluated at one
/// location tau.
struct EdgeCoefficients {
    double c11 = 0.0;
    double c13 = 0.0;
    double c22 = 0.0;
    double c24 = 0.0;
    double c26 = 0.0;
    double chi = 0.0;  ///< satisfies c22 + 3 c24 + 15 c26 = chi / (24 gamma)
};

/// Second-order Laplace correction polynomial.
[[nodiscard]] inline double chi(double tau, double delta, double gamma) {
    const double d = 1.0 - 2.0 * tau;
    const double prod = (1.0 - tau) * tau;
    return 12.0 * (1.0 + delta) * delta * d * d +
           2.0 * (12.0 * delta * gamma + 6.0 * gamma - gamma * gamma - 6.0) * prod + 3.0 +
           2.0 * gamma * gamma - 6.0 * gamma - 12.0 * delta * gamma;
}

[[nodiscard]] inline EdgeCoefficients edge_coefficients(double tau, double gamma, double delta) {
    if (!(gamma > 0.0)) throw ValidationError("edge_coefficients: gamma must be positive");
    EdgeCoefficients c;
    const double d = 1.0 - 2.0 * tau;
    const double prod = (1.0 - tau) * tau;
    const double sq = std::sqrt(gamma);
    c.c11 = (2.0 * delta + 1.0) * d / (2.0 * sq);
    c.c13 = sq * (2.0 * tau - 1.0) / 6.0;
    c.c22 = (2.0 * delta + 1.0) *
            (1.0 + 2.0 * delta * d * d - 4.0 * (1.0 + gamma) * prod) / (8.0 * gamma);
    c.c24 = (6.0 * gamma * prod - gamma - 2.0 * (2.0 * delta + 1.0) * d * d) / 24.0;
    c.c26 = gamma * d * d / 72.0;
    c.chi = chi(tau, delta, gamma);
    return c;
}

/// Leading coefficient of the mean winding number: the geometric phase of
/// the gamma-weighted frame,
///   (1/2*pi*i) oint (|a|^{2g-2} a' conj(a) + |b|^{2g-2} b' conj(b))
///              / (|a|^{2g} + |b|^{2g}) dp.
/// The numerator terms are assembled as a' * unit(conj(a)) * |a|^{2g-1} so a
/// vanishing component contributes zero instead of 0 * inf.
[[nodiscard]] inline double aa_phase(const CurvePair& curve, double gamma,
                                     const QuadratureSpec& spec) {
    if (!(gamma > 0.0)) throw ValidationError("aa_phase: gamma must be positive");
    spec.validate();
    auto component = [gamma](Complex value, Complex derivative) -> Complex {
        const double mag = std::abs(value);
        if (mag == 0.0) return Complex{0.0, 0.0};
        return derivative * (std::conj(value) / mag) * std::pow(mag, 2.0 * gamma - 1.0);
    };
    auto integrand = [&](double theta) -> Complex {
        const Complex p = std::polar(1.0, theta);
        const CurveFrame f = curve_frame(curve, p);
        const double na = std::abs(f.a);
        const double nb = std::abs(f.b);
        const double den = std::pow(na, 2.0 * gamma) + std::pow(nb, 2.0 * gamma);
        const Complex num = component(f.a, f.a_prime) + component(f.b, f.b_prime);
        return num / den * p;
    };
    const Complex value = adaptive_integral(integrand, 0.0, kTwoPi, spec) / kTwoPi;
    if (std::fabs(value.imag()) > 1e-9 * std::max(1.0, std::fabs(value.real()))) {
        throw AccuracyError("aa_phase: imaginary residue " + std::to_string(value.imag()),
                            value, std::fabs(value.imag()));
    }
    return value.real();
}

/// Subleading constant: ((1 + 2 delta - gamma)/2) times the principal-value
/// circle integral of (kappa'/kappa) * (|a|^{2g} - |b|^{2g})/(|a|^{2g} + |b|^{2g}).
/// The prefactor sign is fixed by the exact finite-N mean: for monomial
/// curves the gap |mean_winding_exact - assembled| decays only with this
/// orientation (the opposite one plateaus at twice the subleading constant).
/// When the prefactor vanishes the function returns exactly zero without
/// touching the quadrature, so the Gaussian reduction is exact.
[[nodiscard]] inline double subleading_term(const CurvePair& curve, double gamma, double delta,
                                            const QuadratureSpec& spec) {
    if (!(gamma > 0.0)) throw ValidationError("subleading_term: gamma must be positive");
    spec.validate();
    const double prefactor = 0.5 * (1.0 + 2.0 * delta - gamma);
    if (prefactor == 0.0) return 0.0;
    auto integrand = [&](Complex p) -> Complex {
        const CurveFrame f = curve_frame(curve, p);
        if (f.log_deriv_singular) {
            throw EvaluationError("subleading_term: log-derivative pole on the contour",
                                  std::arg(p));
        }
        const double na = std::pow(std::abs(f.a), 2.0 * gamma);
        const double nb = std::pow(std::abs(f.b), 2.0 * gamma);
        return f.kappa_log_deriv * ((na - nb) / (na + nb));
    };
    const Complex pv = circle_integral_pv(integrand, curve_pole_set(curve), spec);
    return prefactor * pv.real();
}

/// Two-term large-N expansion of the mean winding number.
[[nodiscard]] inline AsymptoticBreakdown theorem2_mean(const CurvePair& curve, double gamma,
                                                       double delta, int n,
                                                       const QuadratureSpec& spec) {
    if (n < 1) throw ValidationError("theorem2_mean: matrix size must be >= 1");
    AsymptoticBreakdown out;
    out.leading_coefficient = aa_phase(curve, gamma, spec);
    out.subleading_value = subleading_term(curve, gamma, delta, spec);
    out.n = n;
    out.assembled = out.leading_coefficient * static_cast<double>(n) + out.subleading_value;
    return out;
}

/// Exact zero-counting function: the average of the incomplete Mellin
/// ratios over rows 1..N.  N * xi_exact(|u|^2) equals upsilon(u, u).
[[nodiscard]] inline double xi_exact(double a_modulus_sq, const RatioWeight& hw) {
    if (!(a_modulus_sq > 0.0)) {
        throw ValidationError("xi_exact: squared modulus must be positive");
    }
    const int n = hw.size();
    double sum = 0.0;
    for (int k = 1; k <= n; ++k) sum += hw.incomplete_mellin_ratio(k, a_modulus_sq);
    return sum / static_cast<double>(n);
}

/// Two-term asymptotic form of the zero-counting function:
/// tau0 + (1/N)((1 + 2 delta - gamma)/2)(A^g - 1)/(A^g + 1), matching the
/// exact sum of incomplete Mellin ratios to o(1/N).
[[nodiscard]] inline double xi_asymptotic(double a_modulus_sq, int n, double gamma,
                                          double delta) {
    if (!(a_modulus_sq > 0.0)) {
        throw ValidationError("xi_asymptotic: squared modulus must be positive");
    }
    if (n < 1) throw ValidationError("xi_asymptotic: matrix size must be >= 1");
    if (!(gamma > 0.0)) throw ValidationError("xi_asymptotic: gamma must be positive");
    const double ag = std::pow(a_modulus_sq, gamma);
    const double tau0 = ag / (1.0 + ag);
    return tau0 + (0.5 * (1.0 + 2.0 * delta - gamma) / static_cast<double>(n)) *
                      ((ag - 1.0) / (ag + 1.0));
}

namespace detail {

/// ln(1 + e^x) without overflow.
[[nodiscard]] inline double log1p_exp(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

}  // namespace detail

/// Independent Laplace-integral route to the incomplete Mellin ratio of the
/// hat weight: numerator and denominator are adaptive integrals of
/// h(x) e^{-(N/gamma)(F_tau(x) - F_tau(x_*))} with
///   h(x) = (2 cosh(x/2))^{-(2 delta + 1)/gamma},
///   F_tau(x) = ln(1 + e^x) - tau x,  tau = (2k - 1)/(2N),
/// the numerator cut off at x = gamma ln(A).  Factoring out the critical
/// value F_tau(x_*) keeps both integrals in range for every N.
[[nodiscard]] inline double phi_quadrature_oracle(int k, double a_upper, int n, double gamma,
                                                  double delta, double tol) {
    if (n < 1) throw ValidationError("phi_quadrature_oracle: matrix size must be >= 1");
    if (k < 1 || k > n) {
        throw ValidationError("phi_quadrature_oracle: row index must lie in [1, N]");
    }
    if (!(a_upper > 0.0)) {
        throw ValidationError("phi_quadrature_oracle: upper limit must be positive");
    }
    if (!(gamma > 0.0)) throw ValidationError("phi_quadrature_oracle: gamma must be positive");
    if (!(tol > 0.0)) throw ValidationError("phi_quadrature_oracle: tolerance must be positive");

    const double tau = (2.0 * k - 1.0) / (2.0 * n);
    const double x_star = std::log(tau / (1.0 - tau));
    const double f_star = -tau * std::log(tau) - (1.0 - tau) * std::log(1.0 - tau);
    const double scale = static_cast<double>(n) / gamma;
    const double h_exp = -(2.0 * delta + 1.0) / gamma;
    auto g = [&](double x) -> Complex {
        const double h = std::pow(2.0 * std::cosh(0.5 * x), h_exp);
        const double f = detail::log1p_exp(x) - tau * x;
        return Complex{h * std::exp(-scale * (f - f_star)), 0.0};
    };

    const QuadratureSpec spec{1024, tol, 4};
    const double cut = gamma * std::log(a_upper);
    Complex numerator;
    if (cut > x_star) {
        numerator = adaptive_integral(g, -std::numeric_limits<double>::infinity(), x_star,
                                      spec) +
                    adaptive_integral(g, x_star, cut, spec);
    } else {
        numerator =
            adaptive_integral(g, -std::numeric_limits<double>::infinity(), cut, spec);
    }
    const Complex denominator =
        adaptive_integral(g, -std::numeric_limits<double>::infinity(), x_star, spec) +
        adaptive_integral(g, x_star, std::numeric_limits<double>::infinity(), spec);
    return numerator.real() / denominator.real();
}

/// Laplace expansion of the moment denominator integral.
struct LaplaceExpansion {
    double value = 0.0;              ///< leading * correction_factor
    double leading = 0.0;            ///< first-order Laplace value
    double correction_factor = 0.0;  ///< 1 + chi / (24 N gamma (1 - tau) tau)
};

/// Two-term Laplace approximation of the denominator integral at the
/// interior critical point x_* = ln(tau / (1 - tau)):
///   sqrt(2 pi gamma / N) [(1 - tau) tau]^{(2 delta + 1 - gamma)/(2 gamma)}
///   e^{-(N/gamma) F_tau(x_*)} [1 + chi / (24 N gamma (1 - tau) tau)]
/// with F_tau(x_*) the binary entropy -tau ln tau - (1 - tau) ln(1 - tau).
[[nodiscard]] inline LaplaceExpansion laplace_denominator_expansion(double tau, int n,
                                                                    double gamma, double delta) {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw ValidationError("laplace_denominator_expansion: tau must lie in (0, 1)");
    }
    if (n < 1) throw ValidationError("laplace_denominator_expansion: matrix size must be >= 1");
    if (!(gamma > 0.0)) {
        throw ValidationError("laplace_denominator_expansion: gamma must be positive");
    }
    const double prod = (1.0 - tau) * tau;
    const double entropy = -tau * std::log(tau) - (1.0 - tau) * std::log(1.0 - tau);
    LaplaceExpansion out;
    out.leading = std::sqrt(kTwoPi * gamma / static_cast<double>(n)) *
                  std::pow(prod, (2.0 * delta + 1.0 - gamma) / (2.0 * gamma)) *
                  std::exp(-static_cast<double>(n) * entropy / gamma);
    out.correction_factor =
        1.0 + chi(tau, delta, gamma) / (24.0 * static_cast<double>(n) * gamma * prod);
    out.value = out.leading * out.correction_factor;
    return out;
}

/// Edge (erfc) approximation of the incomplete Mellin ratio in the central
/// window around tau0 = A^gamma / (1 + A^gamma):
///   (1/2) erfc(sqrt(N / (2 gamma (1-tau0) tau0)) (tau - tau0))
///   + [c11 + c13 (N (tau-tau0)^2 / (gamma (1-tau0) tau0) + 2)]
///     * exp(-N (tau-tau0)^2 / (2 gamma (1-tau0) tau0)) / sqrt(2 pi N tau0 (1-tau0))
/// with the coefficients evaluated at tau0.
[[nodiscard]] inline double phi_edge_approx(int k, double a_upper, int n, double gamma,
                                            double delta) {
    if (n < 1) throw ValidationError("phi_edge_approx: matrix size must be >= 1");
    if (k < 1 || k > n) throw ValidationError("phi_edge_approx: row index must lie in [1, N]");
    if (!(a_upper > 0.0)) {
        throw ValidationError("phi_edge_approx: upper limit must be positive");
    }
    if (!(gamma > 0.0)) throw ValidationError("phi_edge_approx: gamma must be positive");
    const double tau = (2.0 * k - 1.0) / (2.0 * n);
    const double ag = std::pow(a_upper, gamma);
    const double tau0 = ag / (1.0 + ag);
    const double prod0 = (1.0 - tau0) * tau0;
    const double s = tau - tau0;
    const double arg_sq = static_cast<double>(n) * s * s / (gamma * prod0);
    const EdgeCoefficients c = edge_coefficients(tau0, gamma, delta);
    const double gauss =
        std::exp(-0.5 * arg_sq) / std::sqrt(kTwoPi * static_cast<double>(n) * prod0);
    const double sign = (s >= 0.0) ? 1.0 : -1.0;
    return 0.5 * erfc(sign * std::sqrt(0.5 * arg_sq)) +
           (c.c11 + c.c13 * (arg_sq + 2.0)) * gauss;
}

}  // namespace windrmt
