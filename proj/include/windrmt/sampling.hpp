// SPDX-License-Identifier: MIT
//
// Random generation of the model's stochastic objects: GinUE matrices, exact
// draws from the determinantal eigenvalue process of the generalized ratio,
// and the Cholesky-coupled Gaussian random field sampler.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "windrmt/errors.hpp"
#include "windrmt/numerics.hpp"
#include "windrmt/polya.hpp"
#include "windrmt/rng.hpp"

namespace windrmt {

/// n x n matrix of i.i.d. standard complex Gaussians (unit complex variance;
/// real and imaginary parts independent with variance 1/2 each).
[[nodiscard]] inline Eigen::MatrixXcd sample_ginue(int n, RandomStream& stream) {
    if (n < 1) throw ValidationError("sample_ginue: matrix size must be >= 1");
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m(i, j) = stream.complex_normal();
    }
    return m;
}

namespace detail {

/// Solve ratio(k, A) = u for A, where ratio is the radial CDF of the k-th
/// monomial component t^(k-1) what(t) / M[what](k).  Bisection on the
/// compactified variable A = s/(1-s); the CDF is strictly increasing.
[[nodiscard]] inline double invert_radial_cdf(const RatioWeight& hw, int k, double u) {
    auto cdf = [&hw, k](double s) {
        const double a_val = s / (1.0 - s);
        return hw.incomplete_mellin_ratio(k, a_val);
    };
    double lo = 1e-15;
    double hi = 1.0 - 1e-15;
    if (u <= cdf(lo)) return lo / (1.0 - lo);
    if (u >= cdf(hi)) return hi / (1.0 - hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < u) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-15 * (1.0 + hi)) break;
    }
    const double s = 0.5 * (lo + hi);
    return s / (1.0 - s);
}

/// Feature map of the rank-N projection kernel: Phi_k(z) =
/// z^k sqrt(what(|z|^2) / (pi M[what](k+1))), k = 0..N-1, evaluated through
/// logarithms so large |z| underflows gracefully to zero.
inline void projection_features(const RatioWeight& hw, const std::vector<double>& log_pi_mellin,
                                Complex z, Eigen::VectorXcd& phi) {
    const int n = hw.size();
    const double t = std::norm(z);
    const double log_t = std::log(t);
    const double log_w = std::log(hw.evaluate(t));
    const double theta = std::arg(z);
    for (int k = 0; k < n; ++k) {
        const double log_mag = 0.5 * (k * log_t + log_w - log_pi_mellin[static_cast<std::size_t>(k)]);
        phi(k) = std::polar(std::exp(log_mag), k * theta);
    }
}

}  // namespace detail

/// One exact draw of the N eigenvalues of the generalized ratio under the
/// determinantal process |Delta_N|^2 prod what(|z_j|^2), by chain-rule
/// (sequential-conditional) sampling of the rank-N projection kernel.
/// Proposals come from the exact 1-point density (uniform mixture of the
/// per-degree radial laws, uniform angle), so the acceptance ratio is the
/// conditional-to-marginal kernel ratio and never exceeds one.
[[nodiscard]] inline std::vector<Complex> sample_hat_eigenvalues(const RatioWeight& hw,
                                                                 RandomStream& stream) {
    const int n = hw.size();
    std::vector<double> log_pi_mellin(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        log_pi_mellin[static_cast<std::size_t>(k)] = std::log(kPi) + std::log(hw.mellin(k + 1.0));
    }

    std::vector<Complex> points;
    points.reserve(static_cast<std::size_t>(n));
    std::vector<Eigen::VectorXcd> basis;  // orthonormal directions already used
    basis.reserve(static_cast<std::size_t>(n));
    Eigen::VectorXcd phi(n);

    for (int j = 0; j < n; ++j) {
        const long budget = 400L * n / (n - j) + 400L;
        bool accepted = false;
        for (long attempt = 0; attempt < budget; ++attempt) {
            // Proposal from the 1-point density: degree k uniform, radius
            // from the component CDF, angle uniform.
            const int k = std::min(n - 1, static_cast<int>(stream.u01() * n));
            const double t = detail::invert_radial_cdf(hw, k + 1, stream.u01());
            const Complex z = std::polar(std::sqrt(t), stream.uniform(0.0, kTwoPi));

            detail::projection_features(hw, log_pi_mellin, z, phi);
            const double full = phi.squaredNorm();
            if (!(full > 0.0)) continue;
            double used = 0.0;
            for (const Eigen::VectorXcd& u : basis) used += std::norm(u.dot(phi));
            const double residual = std::max(0.0, full - used);
            if (stream.u01() * full <= residual) {
                points.push_back(z);
                // Orthogonalize the accepted feature against the used span.
                Eigen::VectorXcd v = phi;
                for (const Eigen::VectorXcd& u : basis) v -= u * u.dot(v);
                const double norm = v.norm();
                if (norm > 1e-12) {
                    basis.push_back(v / norm);
                } else if (j + 1 < n) {
                    throw SamplingError(
                        "sample_hat_eigenvalues: degenerate conditional kernel after point " +
                        std::to_string(j + 1));
                }
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            throw SamplingError("sample_hat_eigenvalues: rejection budget (" +
                                std::to_string(budget) + " proposals) exhausted at point " +
                                std::to_string(j + 1) + " of " + std::to_string(n));
        }
    }
    return points;
}

/// Joint draw (K(p_1), ..., K(p_k)) of a complex Ginibre random field of size
/// n with the given covariance kernel: K(p_i) = sum_j L_ij G_j with G_j
/// i.i.d. GinUE and L the Cholesky factor of the covariance matrix on the
/// point set.  The recursion fails with the index of the offending leading
/// minor when the covariance is not positive definite.
[[nodiscard]] inline std::vector<Eigen::MatrixXcd> sample_grf(
    const std::vector<Complex>& points, const std::function<Complex(Complex, Complex)>& covariance,
    int n, RandomStream& stream) {
    if (n < 1) throw ValidationError("sample_grf: matrix size must be >= 1");
    if (points.empty()) throw ValidationError("sample_grf: empty point list");
    const std::size_t count = points.size();

    Eigen::MatrixXcd c(count, count);
    double scale = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < count; ++j) {
            c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                covariance(points[i], points[j]);
            scale = std::max(scale, std::abs(c(static_cast<Eigen::Index>(i),
                                               static_cast<Eigen::Index>(j))));
        }
    }
    if ((c - c.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale)) {
        throw ValidationError("sample_grf: covariance kernel is not Hermitian on the point set");
    }

    // Explicit Cholesky recursion; n.b. minors are reported 1-based.
    Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(c.rows(), c.cols());
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            Complex sum = c(i, j);
            for (Eigen::Index k = 0; k < j; ++k) sum -= l(i, k) * std::conj(l(j, k));
            if (i == j) {
                if (!(sum.real() > 0.0) || std::abs(sum.imag()) > 1e-12 * std::max(1.0, scale)) {
                    throw ValidationError(
                        "sample_grf: covariance is not positive definite (leading minor " +
                        std::to_string(i + 1) + " fails)");
                }
                l(i, i) = std::sqrt(sum.real());
            } else {
                l(i, j) = sum / l(j, j);
            }
        }
    }
    if ((l * l.adjoint() - c).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, scale)) {
        throw ValidationError("sample_grf: Cholesky reconstruction exceeds tolerance");
    }

    std::vector<Eigen::MatrixXcd> gins;
    gins.reserve(count);
    for (std::size_t j = 0; j < count; ++j) gins.push_back(sample_ginue(n, stream));

    std::vector<Eigen::MatrixXcd> fields;
    fields.reserve(count);
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
        Eigen::MatrixXcd k_i = Eigen::MatrixXcd::Zero(n, n);
        for (Eigen::Index j = 0; j <= i; ++j) k_i += l(i, j) * gins[static_cast<std::size_t>(j)];
        fields.push_back(std::move(k_i));
    }
    return fields;
}

}  // namespace windrmt
