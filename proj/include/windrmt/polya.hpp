// SPDX-License-Identifier: MIT
//
// polya.hpp: the radial weight family of the eigenvalue representation.
//
// Base weight (two-parameter family, normalized so M[w](1) = 1):
//     w(t) = gamma / Gamma((delta+1)/gamma) * t^delta * exp(-t^gamma)
// with Mellin transform M[w](z) = Gamma((delta+z)/gamma) / Gamma((delta+1)/gamma).
//
// The eigenvalues of K1^{-1} K2 for an N x N pair drawn from this family are
// a determinantal point process with the self-inverse-convoluted weight
//     what(t) = c * t^delta * (1 + t^gamma)^(-(N+2*delta+1)/gamma),
//     c = gamma * Gamma((N+2*delta+1)/gamma) /
//         (Gamma((delta+N)/gamma) * Gamma((delta+1)/gamma)),
// whose Mellin transform on the strip -delta < Re z < N+delta+1 is
//     M[what](z) = Gamma((delta+z)/gamma) * Gamma((N+delta+1-z)/gamma) /
//                  (Gamma((delta+1)/gamma) * Gamma((N+delta)/gamma)),
// satisfying the reflection M[what](z) = M[what](N+1-z) and
// what(1/x) = x^(N+1) what(x).
//
// Incomplete Mellin ratio: substituting s = t^gamma, then u = s/(1+s), in
// int_0^A t^(k-1) what(t) dt turns the integrand into an (unnormalized) Beta
// density, giving the closed form
//     M[what](k, A) / M[what](k) = I_x(a, b),
//     x = A^gamma / (1 + A^gamma), a = (delta+k)/gamma, b = (N+delta+1-k)/gamma.
// This identity is certified against direct adaptive quadrature in the test
// suite before anything else relies on it.

#pragma once

#include <cmath>
#include <string>

#include "windrmt/errors.hpp"
#include "windrmt/numerics.hpp"

namespace windrmt {

/// Parameters of the base weight family; alpha (a trivial rescaling that
/// drops out of K1^{-1} K2) is fixed to 1.
struct MBParams {
    double gamma = 1.0;   ///< stretching exponent, > 0
    double delta = 0.0;   ///< hard-edge exponent, > -1

    void validate() const {
        if (!(gamma > 0.0)) throw ValidationError("MBParams: gamma must be positive");
        if (!(delta > -1.0)) throw ValidationError("MBParams: delta must exceed -1");
    }
};

/// Base weight w(t) at t > 0.
[[nodiscard]] inline double mb_weight(double t, const MBParams& params) {
    params.validate();
    if (!(t > 0.0)) throw ValidationError("mb_weight: t must be positive");
    const double log_norm = std::log(params.gamma) - log_gamma((params.delta + 1.0) / params.gamma);
    return std::exp(log_norm + params.delta * std::log(t) - std::pow(t, params.gamma));
}

/// Mellin transform M[w](z) for delta + z > 0 (real z).
[[nodiscard]] inline double mb_mellin(double z, const MBParams& params) {
    params.validate();
    if (!(params.delta + z > 0.0)) {
        throw ValidationError("mb_mellin: need delta + z > 0, got z = " + std::to_string(z));
    }
    return std::exp(log_gamma((params.delta + z) / params.gamma) -
                    log_gamma((params.delta + 1.0) / params.gamma));
}

/// Abstract radial weight of the eigenvalue point process, bound to a matrix
/// size N.  Only the two-parameter family ships, but everything downstream
/// (partition kernels, samplers, asymptotics) talks to this interface so
/// additional weight families can be slotted in.
class RatioWeight {
public:
    virtual ~RatioWeight() = default;
    /// Matrix size N the weight is convoluted at.
    [[nodiscard]] virtual int size() const = 0;
    /// Density what(t), t > 0.
    [[nodiscard]] virtual double evaluate(double t) const = 0;
    /// Mellin transform M[what](z) on the strip -delta < z < N+delta+1.
    [[nodiscard]] virtual double mellin(double z) const = 0;
    /// Ratio M[what](k, A) / M[what](k) of the incomplete to the complete
    /// Mellin transform, for integer k in [1, N] and upper limit A >= 0.
    /// Callers square moduli themselves (the limit is passed as-is).
    [[nodiscard]] virtual double incomplete_mellin_ratio(int k, double upper) const = 0;
};

/// Self-inverse-convoluted weight of the two-parameter family at size N.
class HatWeight final : public RatioWeight {
public:
    HatWeight(MBParams params, int n) : params_(params), n_(n) {
        params_.validate();
        if (n_ < 1) throw ValidationError("HatWeight: matrix size must be >= 1");
    }

    [[nodiscard]] const MBParams& params() const noexcept { return params_; }
    [[nodiscard]] int size() const override { return n_; }

    [[nodiscard]] double evaluate(double t) const override {
        if (!(t > 0.0)) throw ValidationError("HatWeight::evaluate: t must be positive");
        const double g = params_.gamma;
        const double d = params_.delta;
        const double log_norm = std::log(g) + log_gamma((n_ + 2.0 * d + 1.0) / g) -
                                log_gamma((d + n_) / g) - log_gamma((d + 1.0) / g);
        // log(1 + t^gamma), overflow-safe for large t.
        const double log1p_tg = (t > 1.0) ? g * std::log(t) + std::log1p(std::pow(t, -g))
                                          : std::log1p(std::pow(t, g));
        return std::exp(log_norm + d * std::log(t) - (n_ + 2.0 * d + 1.0) / g * log1p_tg);
    }

    [[nodiscard]] double mellin(double z) const override {
        const double d = params_.delta;
        if (!(z > -d && z < n_ + d + 1.0)) {
            throw ValidationError("hat_mellin: z outside the convergence strip (-delta, N+delta+1)");
        }
        const double g = params_.gamma;
        return std::exp(log_gamma((d + z) / g) + log_gamma((n_ + d + 1.0 - z) / g) -
                        log_gamma((d + 1.0) / g) - log_gamma((n_ + d) / g));
    }

    [[nodiscard]] double incomplete_mellin_ratio(int k, double upper) const override {
        if (k < 1 || k > n_) {
            throw ValidationError("hat_mellin_ratio: k must lie in [1, N], got " +
                                  std::to_string(k));
        }
        if (!(upper >= 0.0)) {
            throw ValidationError("hat_mellin_ratio: upper limit must be non-negative");
        }
        if (upper == 0.0) return 0.0;
        if (std::isinf(upper)) return 1.0;
        const double g = params_.gamma;
        const double d = params_.delta;
        // x = A^gamma / (1 + A^gamma), evaluated from the side that cannot
        // overflow.
        const double x = (upper > 1.0) ? 1.0 / (1.0 + std::pow(upper, -g))
                                       : [&] {
                                             const double ag = std::pow(upper, g);
                                             return ag / (1.0 + ag);
                                         }();
        return regularized_incomplete_beta(x, (d + k) / g, (n_ + d + 1.0 - k) / g);
    }

private:
    MBParams params_;
    int n_;
};

/// Free-function spellings matching the rest of the library's vocabulary.
[[nodiscard]] inline double hat_weight(double t, const HatWeight& hw) { return hw.evaluate(t); }
[[nodiscard]] inline double hat_mellin(double z, const HatWeight& hw) { return hw.mellin(z); }
[[nodiscard]] inline double hat_mellin_ratio(int k, double upper, const HatWeight& hw) {
    return hw.incomplete_mellin_ratio(k, upper);
}

}  // namespace windrmt
