// SPDX-License-Identifier: MIT
//
// Shared helpers for the unit tests: deterministic random point generation
// on the unit circle with separation margins, and a few curve builders.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "windrmt/curves.hpp"
#include "windrmt/numerics.hpp"
#include "windrmt/partition.hpp"
#include "windrmt/rng.hpp"

namespace windrmt::testing {

[[nodiscard]] inline Complex random_circle_point(RandomStream& rs) {
    return std::polar(1.0, rs.uniform(0.0, kTwoPi));
}

/// Random unit-circle points whose pairwise chart values kappa are well
/// separated (relative margin), so kernel matrices stay well conditioned.
[[nodiscard]] inline std::vector<Complex> separated_circle_points(const CurvePair& curve,
                                                                  std::size_t count,
                                                                  RandomStream& rs,
                                                                  double min_kappa_gap = 0.05) {
    std::vector<Complex> out;
    std::vector<Complex> kappas;
    int guard = 0;
    while (out.size() < count) {
        if (++guard > 10000) {
            throw std::runtime_error("separated_circle_points: rejection budget exhausted");
        }
        const Complex p = random_circle_point(rs);
        const CurveFrame f = curve_frame(curve, p);
        if (std::abs(f.b) < 0.2 * std::hypot(std::abs(f.a), std::abs(f.b))) continue;
        const Complex k = f.kappa;
        bool ok = true;
        for (const Complex& other : kappas) {
            if (std::abs(k - other) < min_kappa_gap * (1.0 + std::abs(k))) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        out.push_back(p);
        kappas.push_back(k);
    }
    return out;
}

/// p and q lists drawn jointly with kappa separation across the union, so
/// numerator/denominator pairings stay away from the degenerate margins.
[[nodiscard]] inline PointPairs separated_point_pairs(const CurvePair& curve, std::size_t m1,
                                                      std::size_t m2, RandomStream& rs,
                                                      double min_kappa_gap = 0.05) {
    const std::vector<Complex> pool =
        separated_circle_points(curve, 2 * (m1 + m2), rs, min_kappa_gap);
    PointPairs pts;
    std::size_t idx = 0;
    for (std::size_t j = 0; j < m1; ++j) pts.p.push_back(pool[idx++]);
    for (std::size_t j = 0; j < m1; ++j) pts.q.push_back(pool[idx++]);
    for (std::size_t l = 0; l < m2; ++l) pts.p_tilde.push_back(pool[idx++]);
    for (std::size_t l = 0; l < m2; ++l) pts.q_tilde.push_back(pool[idx++]);
    return pts;
}

/// kappa(q) conj(kappa(q~)) must stay clear of the positive real axis for
/// the general partition function and its oracle.
[[nodiscard]] inline bool mixed_products_generic(const CurvePair& curve, const PointPairs& pts,
                                                 double margin = 0.05) {
    for (const Complex& q : pts.q) {
        for (const Complex& qt : pts.q_tilde) {
            const Complex x =
                curve_frame(curve, q).kappa * std::conj(curve_frame(curve, qt).kappa);
            if (std::fabs(std::arg(x)) < margin) return false;
        }
    }
    return true;
}

[[nodiscard]] inline CurvePair curve_linear() {
    // a = p, b = 1.
    return validate_curve(LaurentPolynomial::from_terms({{1, Complex{1.0, 0.0}}}),
                          LaurentPolynomial::from_terms({{0, Complex{1.0, 0.0}}}));
}

[[nodiscard]] inline CurvePair curve_generic() {
    // a = p + 0.4 - 0.1 i, b = 1 - 0.3 p^{-1}: no circle zeros, comparable
    // magnitudes, asymmetric under a <-> b.
    return validate_curve(
        LaurentPolynomial::from_terms({{1, Complex{1.0, 0.0}}, {0, Complex{0.4, -0.1}}}),
        LaurentPolynomial::from_terms({{0, Complex{1.0, 0.0}}, {-1, Complex{-0.3, 0.0}}}));
}

[[nodiscard]] inline CurvePair curve_figure() {
    // a = (1/2i)(p - 1/p) + p, b = 3 - (p + 1/p)/10 + p^{-2}.
    const Complex half_over_i{0.0, -0.5};
    return validate_curve(
        LaurentPolynomial::from_terms(
            {{1, half_over_i + Complex{1.0, 0.0}}, {-1, -half_over_i}}),
        LaurentPolynomial::from_terms({{0, Complex{3.0, 0.0}},
                                       {1, Complex{-0.1, 0.0}},
                                       {-1, Complex{-0.1, 0.0}},
                                       {-2, Complex{1.0, 0.0}}}));
}

}  // namespace windrmt::testing
