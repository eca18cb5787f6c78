// SPDX-License-Identifier: MIT
//
// numerics.hpp: scalar special functions and the quadrature kit used by the
// whole library.
//
//  * log_gamma, erfc: thin contract-checked wrappers over the C library.
//  * regularized_incomplete_beta: modified Lentz continued fraction with the
//    usual pivot at x = (a+1)/(a+b+2) for monotone convergence.
//  * circle_integral: periodic trapezoid rule for (1/2*pi*i) * contour
//    integrals over the unit circle; spectrally accurate for integrands that
//    are analytic in an annulus, and exact for Laurent polynomials once the
//    node count exceeds the bandwidth.
//  * circle_integral_pv: Cauchy principal value on the circle via symmetric
//    windows around each pole; the two half-windows are summed pairwise so
//    the odd (divergent) part of a simple pole cancels analytically before
//    any quadrature happens.
//  * adaptive_integral: globally adaptive Gauss-Kronrod 7/15 with bisection,
//    complex-valued, handling integrable endpoint singularities t^(-alpha),
//    alpha < 1, and semi-infinite ranges through the algebraic substitution
//    t = l + u/(1-u) (no truncation of the domain).

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "windrmt/errors.hpp"

namespace windrmt {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Quadrature configuration types
// ---------------------------------------------------------------------------

/// Settings shared by the quadrature routines.
struct QuadratureSpec {
    /// Number of trapezoid nodes on the circle; must be even and >= 16.
    int node_count = 1024;
    /// Absolute accuracy target for adaptive quadratures.
    double tolerance = 1e-10;
    /// How many times grid-based routines may double their node count.
    int max_refinements = 4;

    void validate() const {
        if (node_count < 16 || node_count % 2 != 0) {
            throw ValidationError("QuadratureSpec: node_count must be even and >= 16, got " +
                                  std::to_string(node_count));
        }
        if (!(tolerance > 0.0)) {
            throw ValidationError("QuadratureSpec: tolerance must be positive");
        }
        if (max_refinements < 0) {
            throw ValidationError("QuadratureSpec: max_refinements must be non-negative");
        }
    }
};

/// Angles (radians, strictly increasing inside [0, 2*pi)) of the integrand's
/// circle singularities, with their orders.
struct PoleSet {
    std::vector<double> angles;
    std::vector<int> orders;

    [[nodiscard]] bool empty() const noexcept { return angles.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return angles.size(); }

    void validate() const {
        if (angles.size() != orders.size()) {
            throw ValidationError("PoleSet: angles and orders must have equal length");
        }
        for (std::size_t i = 0; i < angles.size(); ++i) {
            if (!(angles[i] >= 0.0 && angles[i] < kTwoPi)) {
                throw ValidationError("PoleSet: angle out of [0, 2*pi) at index " +
                                      std::to_string(i));
            }
            if (i > 0 && !(angles[i] > angles[i - 1])) {
                throw ValidationError("PoleSet: angles must be strictly increasing");
            }
            if (orders[i] < 1) {
                throw ValidationError("PoleSet: pole order must be >= 1");
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Scalar special functions
// ---------------------------------------------------------------------------

/// log Gamma(x) for x > 0.
[[nodiscard]] inline double log_gamma(double x) {
    if (!(x > 0.0)) {
        throw ValidationError("log_gamma: argument must be positive, got " + std::to_string(x));
    }
    return std::lgamma(x);
}

/// Complementary error function.
[[nodiscard]] inline double erfc(double x) {
    if (!std::isfinite(x)) {
        throw ValidationError("erfc: argument must be finite");
    }
    return std::erfc(x);
}

namespace detail {

/// Continued fraction for the regularized incomplete beta function
/// (modified Lentz algorithm).
[[nodiscard]] inline double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kFpMin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        // Even step of the continued fraction.
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        // Odd step.
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= kEps) return h;
    }
    throw NumericalError("regularized_incomplete_beta: continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b) for a, b > 0 and
/// x in [0, 1]; absolute accuracy ~1e-14.
[[nodiscard]] inline double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw ValidationError("regularized_incomplete_beta: parameters must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw ValidationError("regularized_incomplete_beta: x must lie in [0, 1], got " +
                              std::to_string(x));
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    // exp(a*log x + b*log(1-x) - log B(a, b))
    const double log_front = a * std::log(x) + b * std::log1p(-x) + std::lgamma(a + b) -
                             std::lgamma(a) - std::lgamma(b);
    const double front = std::exp(log_front);
    // Pivot so the continued fraction is evaluated on its fast-converging side.
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// ---------------------------------------------------------------------------
// Circle quadrature
// ---------------------------------------------------------------------------

/// (1/2*pi*i) * contour integral of f over the unit circle, by the periodic
/// trapezoid rule on `node_count` equispaced nodes: the sum (1/M) * sum_j
/// f(p_j) p_j with p_j = exp(2*pi*i*j/M).  Exact for Laurent polynomials of
/// bandwidth < M (it extracts the coefficient of 1/p).
template <typename F>
[[nodiscard]] Complex circle_integral(F&& f, int node_count = 1024) {
    if (node_count < 16 || node_count % 2 != 0) {
        throw ValidationError("circle_integral: node_count must be even and >= 16");
    }
    Complex sum{0.0, 0.0};
    Complex comp{0.0, 0.0};  // Kahan compensation
    for (int j = 0; j < node_count; ++j) {
        const double theta = kTwoPi * static_cast<double>(j) / node_count;
        const Complex p = std::polar(1.0, theta);
        const Complex val = f(p) * p;
        if (!std::isfinite(val.real()) || !std::isfinite(val.imag())) {
            throw EvaluationError("circle_integral: non-finite integrand value at theta=" +
                                      std::to_string(theta),
                                  theta);
        }
        const Complex y = val - comp;
        const Complex t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(node_count);
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod quadrature
// ---------------------------------------------------------------------------

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK dqk15).
// Odd-indexed abscissae are the embedded 7-point Gauss nodes.
inline constexpr double kGk15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kGk15WeightsK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGk15WeightsG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

/// One Gauss-Kronrod 7/15 panel: returns the K15 value and the |K15-G7|
/// error estimate.  Never evaluates the integrand at the panel endpoints.
template <typename F>
inline void gk15_panel(F&& f, double lo, double hi, Complex& value, double& error) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    Complex sum_k{0.0, 0.0};
    Complex sum_g{0.0, 0.0};
    for (int i = 0; i < 8; ++i) {
        const double dx = half * kGk15Nodes[i];
        Complex fv;
        if (i == 7) {
            fv = f(center);
            sum_k += kGk15WeightsK[7] * fv;
            sum_g += kGk15WeightsG[3] * fv;
        } else {
            const Complex fplus = f(center + dx);
            const Complex fminus = f(center - dx);
            fv = fplus + fminus;
            sum_k += kGk15WeightsK[i] * fv;
            if (i % 2 == 1) sum_g += kGk15WeightsG[i / 2] * fv;
        }
        if (!std::isfinite(sum_k.real()) || !std::isfinite(sum_k.imag())) {
            throw EvaluationError("adaptive_integral: non-finite integrand value near t=" +
                                      std::to_string(center + dx),
                                  center + dx);
        }
    }
    value = half * sum_k;
    error = std::abs(half * (sum_k - sum_g));
}

struct Panel {
    double lo;
    double hi;
    Complex value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

/// Globally adaptive GK 7/15 on a finite interval.
template <typename F>
[[nodiscard]] Complex adaptive_finite(F&& f, double lo, double hi, double tolerance,
                                      int seed_panels = 16, int max_panels = 1 << 16) {
    if (!(hi > lo)) {
        if (hi == lo) return Complex{0.0, 0.0};
        throw ValidationError("adaptive_integral: upper limit below lower limit");
    }
    std::priority_queue<Panel> heap;
    Complex total{0.0, 0.0};
    double total_err = 0.0;
    for (int i = 0; i < seed_panels; ++i) {
        Panel p;
        p.lo = lo + (hi - lo) * i / seed_panels;
        p.hi = lo + (hi - lo) * (i + 1) / seed_panels;
        gk15_panel(f, p.lo, p.hi, p.value, p.error);
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }
    int panels = seed_panels;
    while (total_err > tolerance && panels < max_panels) {
        const Panel worst = heap.top();
        const double mid = 0.5 * (worst.lo + worst.hi);
        // Refuse to split panels at double-precision resolution.
        if (!(mid > worst.lo && mid < worst.hi)) break;
        heap.pop();
        Panel left{worst.lo, mid, {}, 0.0};
        Panel right{mid, worst.hi, {}, 0.0};
        gk15_panel(f, left.lo, left.hi, left.value, left.error);
        gk15_panel(f, right.lo, right.hi, right.value, right.error);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++panels;
    }
    if (total_err > tolerance * 4.0 && total_err > 1e-13 * (1.0 + std::abs(total))) {
        std::ostringstream oss;
        oss << "adaptive_integral: accuracy target " << tolerance
            << " not reached (error estimate " << total_err << " after " << panels
            << " panels)";
        throw AccuracyError(oss.str(), total, total_err);
    }
    return total;
}

}  // namespace detail

/// Integral of a complex-valued f over [lo, hi], absolute tolerance
/// spec.tolerance.  `hi` may be +infinity and `lo` may be -infinity: the
/// infinite side is folded to [0, 1) by the algebraic map t = l + u/(1-u)
/// (resp. t = h - u/(1-u)), so tails are integrated exactly rather than
/// truncated.  Endpoint singularities t^(-alpha) with alpha < 1 are resolved
/// by bisection toward the endpoint (the Kronrod nodes are interior).
/// Failure to reach the target raises AccuracyError carrying the best
/// estimate.
template <typename F>
[[nodiscard]] Complex adaptive_integral(F&& f, double lo, double hi, const QuadratureSpec& spec) {
    spec.validate();
    const bool lo_inf = std::isinf(lo);
    const bool hi_inf = std::isinf(hi);
    if (lo_inf && hi_inf) {
        // Split at 0 and handle each half with the single-sided map.
        QuadratureSpec half = spec;
        half.tolerance = 0.5 * spec.tolerance;
        return adaptive_integral(f, lo, 0.0, half) + adaptive_integral(f, 0.0, hi, half);
    }
    if (!lo_inf && !hi_inf) {
        return detail::adaptive_finite(f, lo, hi, spec.tolerance);
    }
    if (hi_inf) {
        // t = lo + u/(1-u), dt = du/(1-u)^2.
        auto g = [&f, lo](double u) {
            const double om = 1.0 - u;
            const double t = lo + u / om;
            return f(t) / (om * om);
        };
        return detail::adaptive_finite(g, 0.0, 1.0, spec.tolerance);
    }
    // lo = -infinity: t = hi - u/(1-u).
    auto g = [&f, hi](double u) {
        const double om = 1.0 - u;
        const double t = hi - u / om;
        return f(t) / (om * om);
    };
    return detail::adaptive_finite(g, 0.0, 1.0, spec.tolerance);
}

// ---------------------------------------------------------------------------
// Principal-value circle quadrature
// ---------------------------------------------------------------------------

namespace detail {

/// Adaptive integral over a window/segment that retries once with a slightly
/// shrunk domain if an integrand evaluation lands on a singular point.
template <typename G>
[[nodiscard]] Complex pv_piece(G&& g, double lo, double hi, double tolerance) {
    if (!(hi > lo)) return Complex{0.0, 0.0};
    try {
        return detail::adaptive_finite(g, lo, hi, tolerance);
    } catch (const EvaluationError&) {
        // A node collided with a pole (possible only through rounding);
        // regenerate the grid by nudging the domain and retry once.
        const double shrink = (hi - lo) * 1e-9;
        return detail::adaptive_finite(g, lo + shrink, hi - shrink, tolerance);
    }
}

}  // namespace detail

/// Cauchy principal value of (1/2*pi*i) * contour integral of f over the unit
/// circle when f has poles on the circle at the given angles.
///
/// Construction: the circle is cut at the midpoints between consecutive
/// poles; around each pole a symmetric window [theta_j - h, theta_j + h] is
/// integrated as the pairwise sum F(theta_j + x) + F(theta_j - x) over
/// x in (0, h], which cancels the odd part of the singularity analytically
/// (for a simple circle pole c/(p - p0) the pair sum is exactly the constant
/// i*c, reproducing the half-residue).  The leftover arcs are regular and are
/// integrated adaptively.  With an empty pole set this reduces to the plain
/// trapezoid rule on spec.node_count nodes.
template <typename F>
[[nodiscard]] Complex circle_integral_pv(F&& f, const PoleSet& poles,
                                         const QuadratureSpec& spec = {}) {
    spec.validate();
    poles.validate();
    if (poles.empty()) {
        return circle_integral(f, spec.node_count);
    }
    // Integrand as a function of angle: (1/2*pi*i) f(p) dp = F(theta) d theta.
    auto big_f = [&f](double theta) {
        const Complex p = std::polar(1.0, theta);
        return f(p) * p / kTwoPi;
    };

    const std::size_t n = poles.size();
    const double tol_piece = spec.tolerance / static_cast<double>(3 * n);
    Complex total{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
        const double theta = poles.angles[j];
        const double prev = (j == 0) ? poles.angles[n - 1] - kTwoPi : poles.angles[j - 1];
        const double next = (j + 1 == n) ? poles.angles[0] + kTwoPi : poles.angles[j + 1];
        const double left_gap = 0.5 * (theta - prev);
        const double right_gap = 0.5 * (next - theta);
        const double h = std::min(left_gap, right_gap);
        if (!(h > 0.0)) {
            throw DegenerateConfiguration("circle_integral_pv: coincident poles");
        }
        // Symmetric window around the pole, summed pairwise.
        auto pair_sum = [&big_f, theta](double x) { return big_f(theta + x) + big_f(theta - x); };
        total += detail::pv_piece(pair_sum, 0.0, h, tol_piece);
        // Leftover arcs between this window and the midpoint cuts.
        total += detail::pv_piece(big_f, theta - left_gap, theta - h, tol_piece);
        total += detail::pv_piece(big_f, theta + h, theta + right_gap, tol_piece);
    }
    return total;
}

}  // namespace windrmt
