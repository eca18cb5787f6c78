// SPDX-License-Identifier: MIT
//
// Winding-number extraction from single realizations (matrix pencil or
// eigenvalue factorization) and Monte Carlo estimation of the mean winding
// number with reproducible per-trial streams.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "windrmt/curves.hpp"
#include "windrmt/errors.hpp"
#include "windrmt/logdet.hpp"
#include "windrmt/numerics.hpp"
#include "windrmt/polya.hpp"
#include "windrmt/rng.hpp"
#include "windrmt/sampling.hpp"

namespace windrmt {

/// Relative magnitude below which a determinant sample counts as a gap
/// closure and the realization is discarded.
inline constexpr double kWindingGapGuard = 1e-12;

/// Largest tolerated per-step argument increment; anything at or above this
/// is a resolution failure (the step could hide a multiple of 2*pi).
inline constexpr double kWindingStepLimit = kPi / 2.0;

/// Monte Carlo mean-winding estimate with provenance.
struct WindingEstimate {
    double mean = 0.0;
    double std_error = 0.0;               ///< sample standard deviation / sqrt(trials)
    std::map<long, long> histogram;       ///< winding integer -> count
    long trials = 0;                      ///< realizations that entered the statistics
    RandomStream seed_record;             ///< base (seed, stream_index) of trial 0
    long discarded = 0;                   ///< gap-closure realizations dropped
    std::string warning;                  ///< set when discards exceed 0.1% of requests
};

/// Ensemble selector for mc_mean_winding.
struct Ensemble {
    enum class Kind { ginue, mb } kind = Kind::ginue;
    const RatioWeight* weight = nullptr;  ///< required for Kind::mb

    [[nodiscard]] static Ensemble ginue() { return {}; }
    [[nodiscard]] static Ensemble mb(const RatioWeight& hw) {
        Ensemble e;
        e.kind = Kind::mb;
        e.weight = &hw;
        return e;
    }
};

/// Total winding of a closed loop of nonzero determinant samples on a
/// uniform circle grid, by unwrapped argument increments.  The result is an
/// exact integer and is invariant under a global nonzero rescaling of all
/// samples.  Throws AccuracyError when a step is too coarse to be
/// trustworthy (callers refine the grid) and SamplingError when a sample is
/// within the underflow guard of zero (callers discard the realization).
[[nodiscard]] inline int winding_from_samples(const std::vector<Complex>& det_values) {
    if (det_values.size() < 16) {
        throw ValidationError("winding_from_samples: need at least 16 samples, got " +
                              std::to_string(det_values.size()));
    }
    double max_abs = 0.0;
    for (const Complex& v : det_values) max_abs = std::max(max_abs, std::abs(v));
    if (!(max_abs > 0.0)) {
        throw SamplingError("winding_from_samples: all determinant samples vanish");
    }
    for (std::size_t j = 0; j < det_values.size(); ++j) {
        if (std::abs(det_values[j]) < kWindingGapGuard * max_abs) {
            throw SamplingError("winding_from_samples: near-zero determinant at node " +
                                std::to_string(j) + " (gap closure)");
        }
    }
    double total = 0.0;
    const std::size_t n = det_values.size();
    for (std::size_t j = 0; j < n; ++j) {
        const Complex ratio = det_values[(j + 1) % n] / det_values[j];
        const double step = std::arg(ratio);
        if (!(std::fabs(step) < kWindingStepLimit)) {
            throw AccuracyError("winding_from_samples: argument step " + std::to_string(step) +
                                    " at node " + std::to_string(j) +
                                    " reaches pi/2; refine the grid",
                                total / kTwoPi, 1.0);
        }
        total += step;
    }
    const double turns = total / kTwoPi;
    const long wound = std::lround(turns);
    if (std::fabs(turns - static_cast<double>(wound)) > 1e-6) {
        throw AccuracyError("winding_from_samples: total argument " + std::to_string(turns) +
                                " turns is not close to an integer",
                            turns, std::fabs(turns - static_cast<double>(wound)));
    }
    return static_cast<int>(wound);
}

namespace detail {

/// Run winding_from_samples over det samples produced by `sample_at(p)`
/// (returning a LogComplex), doubling the grid on resolution failures.
/// Samples are rescaled by the running maximum log magnitude so the ratio
/// guard in winding_from_samples acts on relative size.
template <typename F>
[[nodiscard]] int winding_with_refinement(F&& sample_at, const QuadratureSpec& spec) {
    spec.validate();
    int nodes = spec.node_count;
    for (int pass = 0;; ++pass) {
        std::vector<LogComplex> logs(static_cast<std::size_t>(nodes));
        double max_log = -std::numeric_limits<double>::infinity();
        bool zero_seen = false;
        for (int j = 0; j < nodes; ++j) {
            const Complex p = std::polar(1.0, kTwoPi * static_cast<double>(j) / nodes);
            logs[static_cast<std::size_t>(j)] = sample_at(p);
            if (logs[static_cast<std::size_t>(j)].is_zero()) {
                zero_seen = true;
            } else {
                max_log = std::max(max_log, logs[static_cast<std::size_t>(j)].logmag);
            }
        }
        if (zero_seen || !std::isfinite(max_log)) {
            throw SamplingError("winding realization: exactly singular determinant sample");
        }
        std::vector<Complex> values(static_cast<std::size_t>(nodes));
        for (int j = 0; j < nodes; ++j) {
            const LogComplex& lc = logs[static_cast<std::size_t>(j)];
            values[static_cast<std::size_t>(j)] = lc.unit * std::exp(lc.logmag - max_log);
        }
        try {
            return winding_from_samples(values);
        } catch (const AccuracyError& e) {
            if (pass >= spec.max_refinements) {
                // The argument still jumps after every allowed doubling: the
                // determinant passes too close to the origin to resolve.
                throw SamplingError(
                    "winding realization: persistent near-zero determinant (" +
                    std::string(e.what()) + ")");
            }
            nodes *= 2;
        }
    }
}

/// Smallest even node count that can resolve every winding the curve can
/// produce at matrix size n.  det(a K1 + b K2) is a Laurent polynomial in p
/// whose exponents lie in n * [lo, hi] for the combined exponent range of a
/// and b, so |winding| <= n * max(|lo|, |hi|).  Sampling at more than four
/// nodes per potential turn keeps the per-step argument increments of the
/// dominant mode under the pi/2 guard; a coarser grid can wrap a large
/// winding into a small one without tripping any check.
[[nodiscard]] inline int winding_node_floor(const CurvePair& curve, Eigen::Index n,
                                            int configured) {
    long reach = 0;
    for (const LaurentPolynomial* poly : {&curve.a, &curve.b}) {
        if (poly->is_zero()) continue;
        reach = std::max({reach, std::abs(static_cast<long>(poly->min_exponent())),
                          std::abs(static_cast<long>(poly->max_exponent()))});
    }
    const long floor_nodes = 2 * (2 * static_cast<long>(n) * reach + 1);
    return static_cast<int>(std::max<long>(configured, floor_nodes));
}

}  // namespace detail

/// Winding of det(a(p) K1 + b(p) K2) around the origin for one realization,
/// via pivoted log-scale determinants on an adaptively doubled circle grid.
[[nodiscard]] inline int winding_realization_matrices(const Eigen::MatrixXcd& k1,
                                                      const Eigen::MatrixXcd& k2,
                                                      const CurvePair& curve,
                                                      const QuadratureSpec& spec) {
    if (k1.rows() != k1.cols() || k2.rows() != k2.cols() || k1.rows() != k2.rows()) {
        throw ValidationError("winding_realization_matrices: matrices must be square and equal");
    }
    auto sample_at = [&](Complex p) {
        const CurveFrame f = curve_frame(curve, p);
        return log_det(f.a * k1 + f.b * k2);
    };
    QuadratureSpec grid = spec;
    grid.node_count = detail::winding_node_floor(curve, k1.rows(), spec.node_count);
    return detail::winding_with_refinement(sample_at, grid);
}

/// Winding of det K(p) for a realization given through the eigenvalues of
/// K1^{-1} K2: det K(p) = det(K1) * prod_j (a(p) + b(p) z_j), and the
/// constant det(K1) drops out of the argument increments.  The product form
/// covers the points where b (or a) vanishes without a branch switch.
[[nodiscard]] inline int winding_realization_eigs(const std::vector<Complex>& eigs,
                                                  const CurvePair& curve,
                                                  const QuadratureSpec& spec) {
    if (eigs.empty()) throw ValidationError("winding_realization_eigs: empty eigenvalue list");
    auto sample_at = [&](Complex p) {
        const CurveFrame f = curve_frame(curve, p);
        LogComplex det = LogComplex::from(Complex{1.0, 0.0});
        for (const Complex& z : eigs) det = det * LogComplex::from(f.a + f.b * z);
        return det;
    };
    QuadratureSpec grid = spec;
    grid.node_count =
        detail::winding_node_floor(curve, static_cast<Eigen::Index>(eigs.size()), spec.node_count);
    return detail::winding_with_refinement(sample_at, grid);
}

/// Monte Carlo estimate of the mean winding number.  Trial t draws from the
/// stream (seed, stream_index + t), so the result is independent of the
/// execution order and of `threads` (which only affects wall time).
[[nodiscard]] inline WindingEstimate mc_mean_winding(const CurvePair& curve,
                                                     const Ensemble& ensemble, int n, long trials,
                                                     const RandomStream& stream,
                                                     const QuadratureSpec& spec, int threads = 1) {
    if (trials < 100) throw ValidationError("mc_mean_winding: need at least 100 trials");
    if (n < 1) throw ValidationError("mc_mean_winding: matrix size must be >= 1");
    if (ensemble.kind == Ensemble::Kind::mb) {
        if (ensemble.weight == nullptr) {
            throw ValidationError("mc_mean_winding: mb ensemble without a weight");
        }
        if (ensemble.weight->size() != n) {
            throw ValidationError("mc_mean_winding: ensemble weight is bound to N = " +
                                  std::to_string(ensemble.weight->size()) +
                                  " but the run requests N = " + std::to_string(n));
        }
    }
    threads = std::max(1, threads);

    struct Partial {
        std::map<long, long> histogram;
        long discarded = 0;
        std::exception_ptr failure;
    };
    std::vector<Partial> partials(static_cast<std::size_t>(threads));

    auto run_block = [&](int worker) {
        Partial& part = partials[static_cast<std::size_t>(worker)];
        try {
            for (long t = worker; t < trials; t += threads) {
                RandomStream rs{stream.seed,
                                stream.stream_index + static_cast<std::uint64_t>(t)};
                try {
                    int w = 0;
                    if (ensemble.kind == Ensemble::Kind::ginue) {
                        const Eigen::MatrixXcd k1 = sample_ginue(n, rs);
                        const Eigen::MatrixXcd k2 = sample_ginue(n, rs);
                        w = winding_realization_matrices(k1, k2, curve, spec);
                    } else {
                        const std::vector<Complex> eigs =
                            sample_hat_eigenvalues(*ensemble.weight, rs);
                        w = winding_realization_eigs(eigs, curve, spec);
                    }
                    ++part.histogram[w];
                } catch (const SamplingError&) {
                    ++part.discarded;
                }
            }
        } catch (...) {
            part.failure = std::current_exception();
        }
    };

    if (threads == 1) {
        run_block(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int w = 0; w < threads; ++w) pool.emplace_back(run_block, w);
        for (std::thread& th : pool) th.join();
    }
    for (const Partial& part : partials) {
        if (part.failure) std::rethrow_exception(part.failure);
    }

    WindingEstimate est;
    est.seed_record = stream;
    for (const Partial& part : partials) {
        est.discarded += part.discarded;
        for (const auto& [key, count] : part.histogram) est.histogram[key] += count;
    }
    for (const auto& [key, count] : est.histogram) est.trials += count;
    if (est.trials == 0) {
        throw SamplingError("mc_mean_winding: every realization was discarded");
    }
    double sum = 0.0;
    for (const auto& [key, count] : est.histogram) {
        sum += static_cast<double>(key) * static_cast<double>(count);
    }
    est.mean = sum / static_cast<double>(est.trials);
    double ss = 0.0;
    for (const auto& [key, count] : est.histogram) {
        const double d = static_cast<double>(key) - est.mean;
        ss += d * d * static_cast<double>(count);
    }
    if (est.trials > 1) {
        est.std_error = std::sqrt(ss / static_cast<double>(est.trials - 1) /
                                  static_cast<double>(est.trials));
    }
    if (est.discarded * 1000 > trials) {
        est.warning = "discarded " + std::to_string(est.discarded) + " of " +
                      std::to_string(trials) + " realizations (over 0.1%)";
    }
    return est;
}

}  // namespace windrmt
