// SPDX-License-Identifier: MIT
//
// partition.hpp: exact finite-N averages of ratios of characteristic
// polynomials for the additive two-matrix family K(p) = a(p) K1 + b(p) K2
// evaluated on the unit circle, plus the objects they are assembled from:
//
//  * upsilon:               the truncated moment-ratio power sum Y_N(u, v)
//  * cauchy_kernel:         entries 1 / (a(p_i) b(q_j) - b(p_i) a(q_j))
//  * deformed_kernel:       the N-dependent deformation of the above
//  * partition_m:           det ratio for numerator/denominator point pairs
//  * gaussian_partition:    closed form for the Gaussian (gamma=1, delta=0)
//  * stieltjes_kernel_entry: cut-weight Stieltjes transform minus moments
//  * partition_general:     block-determinant form with conjugated pairs
//  * c1_exact:              exact 1-point winding density on the circle
//  * mean_winding_exact:    its contour integral (the mean winding number)
//
// All determinants run in log-magnitude representation (module logdet) so
// the (b(p)/b(q))^N dressing survives N in the hundreds.  Radial moments of
// the rotation-invariant eigenvalue density come from module polya.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "windrmt/curves.hpp"
#include "windrmt/errors.hpp"
#include "windrmt/logdet.hpp"
#include "windrmt/numerics.hpp"
#include "windrmt/polya.hpp"

namespace windrmt {

/// Relative margin below which two denominator points fail the separation
/// requirement a(x) b(y) != a(y) b(x) and the kernel matrices degenerate.
inline constexpr double kSeparationMargin = 1e-12;
/// Absolute distance below which a numerator point cancels a denominator
/// point exactly and the pair drops out of the determinant ratio.
inline constexpr double kCoincidenceTolerance = 1e-13;
/// Allowed deviation of evaluation points from the unit circle.
inline constexpr double kUnitCircleTolerance = 1e-8;

/// Evaluation points of the ratio average: numerator points p (and p_tilde
/// for the conjugated factors) over denominator points q (and q_tilde).
struct PointPairs {
    std::vector<Complex> p;        ///< numerator points, length m1
    std::vector<Complex> q;        ///< denominator points, length m1
    std::vector<Complex> p_tilde;  ///< conjugated numerator points, length m2
    std::vector<Complex> q_tilde;  ///< conjugated denominator points, length m2

    [[nodiscard]] std::size_t m1() const noexcept { return p.size(); }
    [[nodiscard]] std::size_t m2() const noexcept { return p_tilde.size(); }

    /// Check list lengths and that every point sits on the unit circle.
    void validate_basic() const {
        if (p.size() != q.size()) {
            throw ValidationError("PointPairs: p and q must have equal length");
        }
        if (p_tilde.size() != q_tilde.size()) {
            throw ValidationError("PointPairs: p_tilde and q_tilde must have equal length");
        }
        auto check_circle = [](const std::vector<Complex>& pts, const char* name) {
            for (std::size_t i = 0; i < pts.size(); ++i) {
                if (std::fabs(std::abs(pts[i]) - 1.0) > kUnitCircleTolerance) {
                    std::ostringstream oss;
                    oss << "PointPairs: " << name << "[" << i << "] = " << pts[i].real() << "+"
                        << pts[i].imag() << "i is off the unit circle";
                    throw ValidationError(oss.str());
                }
            }
        };
        check_circle(p, "p");
        check_circle(q, "q");
        check_circle(p_tilde, "p_tilde");
        check_circle(q_tilde, "q_tilde");
    }
};

/// Value of a determinant ratio with log-magnitude and conditioning info.
struct PartitionResult {
    Complex value{1.0, 0.0};          ///< the partition function itself
    double log_abs = 0.0;             ///< log |value| tracked in log scale
    double condition_estimate = 1.0;  ///< max 1/rcond over the factored matrices
};

// ---------------------------------------------------------------------------
// Upsilon sum
// ---------------------------------------------------------------------------

/// Y_N(u, v) = sum_{k=1}^{N} [M(k, |v|^2) / M(k)] (u/v)^k where M(k, A)/M(k)
/// is the incomplete radial moment ratio of the weight.  Powers go through
/// complex logs so large |u/v| cannot overflow intermediate products.
[[nodiscard]] inline Complex upsilon(Complex u, Complex v, const RatioWeight& hw) {
    if (v == Complex{0.0, 0.0}) {
        throw ValidationError("upsilon: v must be nonzero (use the a<->b swapped branch)");
    }
    if (u == Complex{0.0, 0.0}) return {0.0, 0.0};
    const Complex w = u / v;
    const double log_w = std::log(std::abs(w));
    const double arg_w = std::arg(w);
    const double limit = std::norm(v);
    Complex sum{0.0, 0.0};
    Complex comp{0.0, 0.0};  // Kahan compensation
    const int n = hw.size();
    for (int k = 1; k <= n; ++k) {
        const double ratio = hw.incomplete_mellin_ratio(k, limit);
        if (!(ratio > 0.0)) continue;  // underflowed incomplete moment: exact zero term
        const double log_term = std::log(ratio) + static_cast<double>(k) * log_w;
        if (log_term > 700.0) {
            throw AccuracyError("upsilon: term magnitude overflows double at k=" +
                                    std::to_string(k),
                                sum, std::numeric_limits<double>::infinity());
        }
        const Complex term = std::polar(std::exp(log_term), static_cast<double>(k) * arg_w);
        const Complex y = term - comp;
        const Complex t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Point bookkeeping helpers
// ---------------------------------------------------------------------------

namespace detail {

/// Remove numerator/denominator pairs that coincide exactly: the factors
/// cancel in the ratio, so the reduced configuration has the same value and
/// the p = q case collapses to exactly 1.
inline void reduce_coincident(std::vector<Complex>& num, std::vector<Complex>& den) {
    for (std::size_t i = 0; i < num.size();) {
        bool removed = false;
        for (std::size_t j = 0; j < den.size(); ++j) {
            if (std::abs(num[i] - den[j]) <= kCoincidenceTolerance) {
                num.erase(num.begin() + static_cast<std::ptrdiff_t>(i));
                den.erase(den.begin() + static_cast<std::ptrdiff_t>(j));
                removed = true;
                break;
            }
        }
        if (!removed) ++i;
    }
}

inline void check_separation_pair(const CurveFrame& x, const CurveFrame& y, const char* kind,
                                  std::size_t i, std::size_t j) {
    const Complex cross1 = x.a * y.b;
    const Complex cross2 = y.a * x.b;
    const double scale = std::abs(cross1) + std::abs(cross2);
    if (scale == 0.0 || std::abs(cross1 - cross2) <= kSeparationMargin * scale) {
        std::ostringstream oss;
        oss << "separation violated for " << kind << " pair (" << i << ", " << j
            << "): a(x) b(y) == a(y) b(x) within margin";
        throw AssumptionViolation(oss.str());
    }
}

[[nodiscard]] inline std::vector<CurveFrame> frames_at(const CurvePair& curve,
                                                       const std::vector<Complex>& pts) {
    std::vector<CurveFrame> out;
    out.reserve(pts.size());
    for (const Complex& x : pts) out.push_back(curve_frame(curve, x));
    return out;
}

}  // namespace detail

/// Check the pairwise separation conditions among denominator points:
/// within q, within q_tilde, and mixed q vs q_tilde.
inline void validate_separation(const CurvePair& curve, const PointPairs& pts) {
    const auto fq = detail::frames_at(curve, pts.q);
    const auto fqt = detail::frames_at(curve, pts.q_tilde);
    for (std::size_t i = 0; i < fq.size(); ++i) {
        for (std::size_t j = i + 1; j < fq.size(); ++j) {
            detail::check_separation_pair(fq[i], fq[j], "q", i, j);
        }
    }
    for (std::size_t i = 0; i < fqt.size(); ++i) {
        for (std::size_t j = i + 1; j < fqt.size(); ++j) {
            detail::check_separation_pair(fqt[i], fqt[j], "q_tilde", i, j);
        }
    }
    for (std::size_t i = 0; i < fq.size(); ++i) {
        for (std::size_t j = 0; j < fqt.size(); ++j) {
            detail::check_separation_pair(fq[i], fqt[j], "q/q_tilde", i, j);
        }
    }
}

namespace detail {

/// The model is invariant under exchanging the two matrices, i.e. under
/// (a, b) -> (b, a).  Kernel formulas need b != 0 at evaluation points, so
/// when b vanishes (or nearly vanishes) somewhere we evaluate in the swapped
/// representation instead.
struct Representation {
    CurvePair curve;
    bool swapped = false;
};

[[nodiscard]] inline CurvePair swapped_curve(const CurvePair& curve) {
    return CurvePair{curve.b, curve.a, curve.zeros_b, curve.zeros_a};
}

/// Relative size of |b| (or |a|) against the full direction vector at x.
[[nodiscard]] inline double component_margin(const CurveFrame& f, bool use_b) {
    const double scale = std::hypot(std::abs(f.a), std::abs(f.b));
    if (scale == 0.0) return 0.0;
    return (use_b ? std::abs(f.b) : std::abs(f.a)) / scale;
}

/// Pick the representation whose smallest relevant component margin is
/// largest.  `all` lists every evaluation point (b must not vanish there);
/// `denominators` lists the q-type points (a must not vanish there when
/// `need_nonzero_a` is set, as in the general block determinant).
[[nodiscard]] inline Representation choose_representation(const CurvePair& curve,
                                                          const std::vector<Complex>& all,
                                                          const std::vector<Complex>& denominators,
                                                          bool need_nonzero_a) {
    auto score = [&](const CurvePair& c) {
        double s = std::numeric_limits<double>::infinity();
        for (const Complex& x : all) {
            s = std::min(s, component_margin(curve_frame(c, x), /*use_b=*/true));
        }
        for (const Complex& x : denominators) {
            s = std::min(s, component_margin(curve_frame(c, x), /*use_b=*/false));
        }
        return s;
    };
    const CurvePair swapped = swapped_curve(curve);
    const double s_plain = score(curve);
    const double s_swap = score(swapped);
    // Hard feasibility: b nonzero everywhere; additionally a nonzero at the
    // denominator points when the caller requires it.
    auto feasible = [&](const CurvePair& c) {
        for (const Complex& x : all) {
            if (component_margin(curve_frame(c, x), true) == 0.0) return false;
        }
        if (need_nonzero_a) {
            for (const Complex& x : denominators) {
                if (component_margin(curve_frame(c, x), false) == 0.0) return false;
            }
        }
        return true;
    };
    const bool f_plain = feasible(curve);
    const bool f_swap = feasible(swapped);
    if (!f_plain && !f_swap) {
        throw DegenerateConfiguration(
            "partition: both curve representations are singular at an evaluation point "
            "(a and b vanish where the kernels need them)");
    }
    if (f_plain && (!f_swap || s_plain >= s_swap)) return Representation{curve, false};
    return Representation{swapped, true};
}

/// One entry of the deformed kernel in log representation:
///   (b(p)/b(q))^N / (a(p) b(q) - b(p) a(q)) * bracket,
///   bracket = 1 + sum_k ratio_k(|kappa(q)|^2) (w - 1) w^{k-1},  w = kappa(p)/kappa(q).
/// The series form of the bracket is finite at w = 0 (a(p) = 0), and the
/// kappa(q) = 0 limit has a vanishing sum for delta > -1/2.
[[nodiscard]] inline LogComplex deformed_entry(const CurveFrame& fp, const CurveFrame& fq,
                                               const HatWeight& hw, std::size_t i,
                                               std::size_t j) {
    const Complex cross1 = fp.a * fq.b;
    const Complex cross2 = fp.b * fq.a;
    const Complex denom = cross1 - cross2;
    const double scale = std::abs(cross1) + std::abs(cross2);
    if (scale == 0.0 || std::abs(denom) <= kSeparationMargin * scale) {
        std::ostringstream oss;
        oss << "deformed_kernel: vanishing pairing denominator at entry (" << i << ", " << j
            << ")";
        throw DegenerateConfiguration(oss.str());
    }
    if (fp.b == Complex{0.0, 0.0} || fq.b == Complex{0.0, 0.0}) {
        std::ostringstream oss;
        oss << "deformed_kernel: b vanishes at an evaluation point of entry (" << i << ", " << j
            << "); no continuation available in this representation";
        throw DegenerateConfiguration(oss.str());
    }
    const int n = hw.size();
    Complex bracket{1.0, 0.0};
    if (fq.a == Complex{0.0, 0.0}) {
        // kappa(q) = 0: every term of the sum vanishes in the limit provided
        // the incomplete moments decay fast enough (delta > -1/2).
        if (hw.params().delta <= -0.5) {
            std::ostringstream oss;
            oss << "deformed_kernel: a vanishes at denominator point of entry (" << i << ", "
                << j << ") and delta <= -1/2 makes the kernel singular there";
            throw DegenerateConfiguration(oss.str());
        }
    } else {
        const Complex w = cross1 / cross2;  // kappa(p) / kappa(q)
        const Complex wm1 = w - Complex{1.0, 0.0};
        if (wm1 != Complex{0.0, 0.0}) {
            const double limit = std::norm(fq.kappa);
            Complex sum{0.0, 0.0};
            Complex comp{0.0, 0.0};
            const double log_w =
                (w == Complex{0.0, 0.0}) ? 0.0 : std::log(std::abs(w));
            const double arg_w = (w == Complex{0.0, 0.0}) ? 0.0 : std::arg(w);
            const double log_wm1 = std::log(std::abs(wm1));
            const double arg_wm1 = std::arg(wm1);
            for (int k = 1; k <= n; ++k) {
                if (w == Complex{0.0, 0.0} && k > 1) break;  // w^{k-1} = 0 beyond k = 1
                const double ratio = hw.incomplete_mellin_ratio(k, limit);
                if (!(ratio > 0.0)) continue;
                const double lt = std::log(ratio) + log_wm1 + (k - 1.0) * log_w;
                if (lt > 700.0) {
                    throw AccuracyError(
                        "deformed_kernel: bracket term overflows double at k=" +
                            std::to_string(k),
                        sum, std::numeric_limits<double>::infinity());
                }
                const Complex term = std::polar(std::exp(lt), (k - 1.0) * arg_w + arg_wm1);
                const Complex y = term - comp;
                const Complex t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
            bracket += sum;
        }
    }
    LogComplex entry = LogComplex::from_pow(fp.b, n) / LogComplex::from_pow(fq.b, n);
    entry /= LogComplex::from(denom);
    entry *= LogComplex::from(bracket);
    return entry;
}

[[nodiscard]] inline LogComplex cauchy_entry(const CurveFrame& fp, const CurveFrame& fq,
                                             const char* op, std::size_t i, std::size_t j) {
    const Complex cross1 = fp.a * fq.b;
    const Complex cross2 = fp.b * fq.a;
    const Complex denom = cross1 - cross2;
    const double scale = std::abs(cross1) + std::abs(cross2);
    if (scale == 0.0 || std::abs(denom) <= kSeparationMargin * scale) {
        std::ostringstream oss;
        oss << op << ": vanishing pairing denominator at entry (" << i << ", " << j << ")";
        throw DegenerateConfiguration(oss.str());
    }
    return LogComplex::from(Complex{1.0, 0.0} / denom);
}

[[nodiscard]] inline LogComplex log_conj(const LogComplex& z) {
    return LogComplex{z.logmag, std::conj(z.unit)};
}

/// Sum of log-represented terms: peak-scaled compensated summation.
[[nodiscard]] inline LogComplex log_sum(const std::vector<LogComplex>& terms) {
    double peak = -std::numeric_limits<double>::infinity();
    for (const LogComplex& t : terms) {
        if (!t.is_zero()) peak = std::max(peak, t.logmag);
    }
    if (std::isinf(peak)) return LogComplex{0.0, {0.0, 0.0}};
    Complex sum{0.0, 0.0};
    Complex comp{0.0, 0.0};
    for (const LogComplex& t : terms) {
        if (t.is_zero()) continue;
        const Complex term = t.unit * std::exp(t.logmag - peak);
        const Complex y = term - comp;
        const Complex s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    const double m = std::abs(sum);
    if (m == 0.0) return LogComplex{0.0, {0.0, 0.0}};
    return LogComplex{peak + std::log(m), sum / m};
}

[[nodiscard]] inline PartitionResult ratio_result(const ScaledDet& numerator,
                                                  const ScaledDet& denominator,
                                                  double extra_condition, Complex sign) {
    if (denominator.det.is_zero()) {
        throw DegenerateConfiguration("partition: singular denominator kernel determinant");
    }
    LogComplex ratio = numerator.det / denominator.det;
    ratio *= LogComplex::from(sign);
    PartitionResult out;
    out.value = ratio.value();
    out.log_abs =
        ratio.is_zero() ? -std::numeric_limits<double>::infinity() : ratio.logmag;
    out.condition_estimate =
        std::max({numerator.condition, denominator.condition, extra_condition});
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

/// Cauchy-type kernel over (p_i, q_j): entries 1/(a(p_i) b(q_j) - b(p_i) a(q_j)).
/// Antisymmetric under exchanging the roles of p and q: Q(p,q)^T = -Q(q,p).
[[nodiscard]] inline Eigen::MatrixXcd cauchy_kernel(const CurvePair& curve,
                                                    const PointPairs& pts) {
    pts.validate_basic();
    const std::size_t m = pts.m1();
    const auto fp = detail::frames_at(curve, pts.p);
    const auto fq = detail::frames_at(curve, pts.q);
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                detail::cauchy_entry(fp[i], fq[j], "cauchy_kernel", i, j).value();
        }
    }
    return out;
}

/// Matrix of log-scale complex entries (kernels whose magnitudes span
/// hundreds of orders of magnitude at large N).
using LogMatrix = std::vector<std::vector<LogComplex>>;

/// Deformed kernel over (p_i, q_j) in log representation.  Entries carry the
/// (b(p)/b(q))^N dressing; at p_i = q_j the bracket collapses to 1 and the
/// entry equals the corresponding Cauchy kernel entry.
[[nodiscard]] inline LogMatrix deformed_kernel(const CurvePair& curve, const PointPairs& pts,
                                               const HatWeight& hw) {
    pts.validate_basic();
    const std::size_t m = pts.m1();
    const auto fp = detail::frames_at(curve, pts.p);
    const auto fq = detail::frames_at(curve, pts.q);
    LogMatrix out(m, std::vector<LogComplex>(m));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            out[i][j] = detail::deformed_entry(fp[i], fq[j], hw, i, j);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Partition functions
// ---------------------------------------------------------------------------

/// Average of prod_j det K(p_j) / det K(q_j) for one weight family: the ratio
/// det(deformed kernel) / det(Cauchy kernel) over the (possibly swapped)
/// representation.  Exactly 1 when the p and q multisets coincide.
[[nodiscard]] inline PartitionResult partition_m(const CurvePair& curve, const PointPairs& pts,
                                                 const HatWeight& hw) {
    pts.validate_basic();
    if (pts.m2() != 0) {
        throw ValidationError("partition_m: conjugated points present; use partition_general");
    }
    PointPairs reduced = pts;
    detail::reduce_coincident(reduced.p, reduced.q);
    const std::size_t m = reduced.m1();
    if (m == 0) return PartitionResult{};
    validate_separation(curve, reduced);

    std::vector<Complex> all = reduced.p;
    all.insert(all.end(), reduced.q.begin(), reduced.q.end());
    const detail::Representation rep =
        detail::choose_representation(curve, all, reduced.q, /*need_nonzero_a=*/false);

    const auto fp = detail::frames_at(rep.curve, reduced.p);
    const auto fq = detail::frames_at(rep.curve, reduced.q);
    LogMatrix qgrid(m, std::vector<LogComplex>(m));
    LogMatrix dgrid(m, std::vector<LogComplex>(m));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            qgrid[i][j] = detail::cauchy_entry(fp[i], fq[j], "partition_m", i, j);
            dgrid[i][j] = detail::deformed_entry(fp[i], fq[j], hw, i, j);
        }
    }
    const ScaledDet denominator = log_det_scaled(qgrid);
    const ScaledDet numerator = log_det_scaled(dgrid);
    return detail::ratio_result(numerator, denominator, 1.0, Complex{1.0, 0.0});
}

/// Closed form for the Gaussian ensemble: the deformed kernel collapses to
/// (1/pairing) * (nu(q)^dag nu(p) / nu(q)^dag nu(q))^n.
[[nodiscard]] inline PartitionResult gaussian_partition(const CurvePair& curve,
                                                        const PointPairs& pts, int n) {
    if (n < 1) throw ValidationError("gaussian_partition: n must be positive");
    pts.validate_basic();
    if (pts.m2() != 0) {
        throw ValidationError("gaussian_partition: conjugated points not supported");
    }
    PointPairs reduced = pts;
    detail::reduce_coincident(reduced.p, reduced.q);
    const std::size_t m = reduced.m1();
    if (m == 0) return PartitionResult{};
    validate_separation(curve, reduced);

    const auto fp = detail::frames_at(curve, reduced.p);
    const auto fq = detail::frames_at(curve, reduced.q);
    LogMatrix qgrid(m, std::vector<LogComplex>(m));
    LogMatrix ngrid(m, std::vector<LogComplex>(m));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const LogComplex base =
                detail::cauchy_entry(fp[i], fq[j], "gaussian_partition", i, j);
            qgrid[i][j] = base;
            const Complex overlap =
                std::conj(fq[j].a) * fp[i].a + std::conj(fq[j].b) * fp[i].b;
            const Complex norm_q = Complex{std::norm(fq[j].a) + std::norm(fq[j].b), 0.0};
            LogComplex entry = base;
            entry *= LogComplex::from_pow(overlap, n);
            entry /= LogComplex::from_pow(norm_q, n);
            ngrid[i][j] = entry;
        }
    }
    const ScaledDet denominator = log_det_scaled(qgrid);
    const ScaledDet numerator = log_det_scaled(ngrid);
    return detail::ratio_result(numerator, denominator, 1.0, Complex{1.0, 0.0});
}

// ---------------------------------------------------------------------------
// Stieltjes entry and the general block determinant
// ---------------------------------------------------------------------------

namespace detail {

/// S[w sigma_{r,R}](alpha beta) - sum_{k=1}^{sum_upper} ratio_k(|alpha|^2)
/// ratio_k(|beta|^2) M(k) / (alpha beta)^k, with r/R the min/max of the
/// squared moduli.  The cut Stieltjes transform integrates the radial weight
/// over [0, r] and [R, inf) with the pole at alpha*beta excluded by the
/// genericity requirement.
[[nodiscard]] inline Complex stieltjes_bracket(Complex alpha, Complex beta, const HatWeight& hw,
                                               const QuadratureSpec& spec, int sum_upper) {
    if (alpha == Complex{0.0, 0.0} || beta == Complex{0.0, 0.0}) {
        throw ValidationError("stieltjes_kernel_entry: alpha and beta must be nonzero");
    }
    spec.validate();
    const double ra = std::norm(alpha);
    const double rb = std::norm(beta);
    const double r = std::min(ra, rb);
    const double big_r = std::max(ra, rb);
    const Complex x = alpha * beta;
    const double ax = std::abs(x);
    if (std::fabs(x.imag()) <= 1e-12 * ax && x.real() >= 0.0) {
        const double xr = x.real();
        if (xr <= r * (1.0 + 1e-12) || xr >= big_r * (1.0 - 1e-12)) {
            std::ostringstream oss;
            oss << "stieltjes_kernel_entry: pole alpha*beta = " << xr
                << " lies on the cut weight support (coincident denominator charts)";
            throw DegenerateConfiguration(oss.str());
        }
    }
    QuadratureSpec half = spec;
    half.tolerance = spec.tolerance / 2.0;
    auto integrand = [&hw, x](double t) { return Complex{hw.evaluate(t), 0.0} / (x - t); };
    const Complex low = adaptive_integral(integrand, 0.0, r, half);
    const Complex high =
        adaptive_integral(integrand, big_r, std::numeric_limits<double>::infinity(), half);
    Complex value = low - high;

    const double log_ax = std::log(ax);
    const double arg_x = std::arg(x);
    Complex sum{0.0, 0.0};
    Complex comp{0.0, 0.0};
    for (int k = 1; k <= sum_upper; ++k) {
        const double r1 = hw.incomplete_mellin_ratio(k, ra);
        const double r2 = hw.incomplete_mellin_ratio(k, rb);
        if (!(r1 > 0.0) || !(r2 > 0.0)) continue;
        const double lt =
            std::log(r1) + std::log(r2) + std::log(hw.mellin(k)) - k * log_ax;
        if (lt > 700.0) {
            throw AccuracyError("stieltjes_kernel_entry: moment term overflows at k=" +
                                    std::to_string(k),
                                value, std::numeric_limits<double>::infinity());
        }
        const Complex term = std::polar(std::exp(lt), -k * arg_x);
        const Complex y = term - comp;
        const Complex t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return value - sum;
}

}  // namespace detail

/// The standalone Stieltjes kernel entry (moment sum truncated at N-1).
[[nodiscard]] inline Complex stieltjes_kernel_entry(Complex alpha, Complex beta,
                                                    const HatWeight& hw,
                                                    const QuadratureSpec& spec) {
    return detail::stieltjes_bracket(alpha, beta, hw, spec, hw.size() - 1);
}

/// General partition function with conjugated pairs: the (m1+m2) x (m1+m2)
/// block determinant over the denominator Cauchy determinants,
///
///   Z = (-1)^{m1 m2} det [ G(p~, p)    conj Qd(p~, q~) ]   /  (det Q(p,q) det conj Q(p~,q~))
///                        [ Qd^T(q, p)  B(q, q~)        ]
///
/// with rows (p~-group, q-group) and columns (p-group, q~-group):
///   G[l][j]  = (1/pi) sum_{r=0}^{N-1} (a(p_j) conj a(p~_l))^r (b(p_j) conj b(p~_l))^{N-1-r} / M(r+1)
///   Qd       = deformed kernel (transposed arrangement in the lower-left)
///   B[k][l]  = -pi b(q_k)^{-(N+1)} conj(b(q~_l))^{-(N+1)} * stieltjes bracket with
///              the moment sum running to N (one term beyond the standalone entry)
/// The m2 = 0 sector collapses to partition_m; m1 = 0 is its conjugate.
[[nodiscard]] inline PartitionResult partition_general(const CurvePair& curve,
                                                       const PointPairs& pts,
                                                       const HatWeight& hw,
                                                       const QuadratureSpec& spec) {
    pts.validate_basic();
    PointPairs reduced = pts;
    detail::reduce_coincident(reduced.p, reduced.q);
    detail::reduce_coincident(reduced.p_tilde, reduced.q_tilde);
    const std::size_t m1 = reduced.m1();
    const std::size_t m2 = reduced.m2();
    if (m1 == 0 && m2 == 0) return PartitionResult{};
    if (m2 == 0) return partition_m(curve, reduced, hw);
    if (m1 == 0) {
        PointPairs mirrored;
        mirrored.p = reduced.p_tilde;
        mirrored.q = reduced.q_tilde;
        PartitionResult res = partition_m(curve, mirrored, hw);
        res.value = std::conj(res.value);
        return res;
    }
    validate_separation(curve, reduced);

    std::vector<Complex> all = reduced.p;
    all.insert(all.end(), reduced.q.begin(), reduced.q.end());
    all.insert(all.end(), reduced.p_tilde.begin(), reduced.p_tilde.end());
    all.insert(all.end(), reduced.q_tilde.begin(), reduced.q_tilde.end());
    std::vector<Complex> denominators = reduced.q;
    denominators.insert(denominators.end(), reduced.q_tilde.begin(), reduced.q_tilde.end());
    const detail::Representation rep =
        detail::choose_representation(curve, all, denominators, /*need_nonzero_a=*/true);

    const auto fp = detail::frames_at(rep.curve, reduced.p);
    const auto fq = detail::frames_at(rep.curve, reduced.q);
    const auto fpt = detail::frames_at(rep.curve, reduced.p_tilde);
    const auto fqt = detail::frames_at(rep.curve, reduced.q_tilde);
    const int n = hw.size();

    // Denominator Cauchy determinants (second one over conjugated values).
    LogMatrix q1(m1, std::vector<LogComplex>(m1));
    for (std::size_t i = 0; i < m1; ++i) {
        for (std::size_t j = 0; j < m1; ++j) {
            q1[i][j] = detail::cauchy_entry(fp[i], fq[j], "partition_general", i, j);
        }
    }
    LogMatrix q2(m2, std::vector<LogComplex>(m2));
    for (std::size_t i = 0; i < m2; ++i) {
        for (std::size_t j = 0; j < m2; ++j) {
            q2[i][j] = detail::log_conj(
                detail::cauchy_entry(fpt[i], fqt[j], "partition_general (conj)", i, j));
        }
    }

    // Numerator block matrix.
    const std::size_t dim = m1 + m2;
    LogMatrix blk(dim, std::vector<LogComplex>(dim));
    // Top-left (p~_l rows, p_j columns): the finite coupling sum.
    for (std::size_t l = 0; l < m2; ++l) {
        for (std::size_t j = 0; j < m1; ++j) {
            const Complex aa = fp[j].a * std::conj(fpt[l].a);
            const Complex bb = fp[j].b * std::conj(fpt[l].b);
            std::vector<LogComplex> terms;
            terms.reserve(static_cast<std::size_t>(n));
            for (int r = 0; r < n; ++r) {
                LogComplex t = LogComplex::from_pow(aa, r) * LogComplex::from_pow(bb, n - 1 - r);
                if (t.is_zero()) continue;
                t /= LogComplex::from(Complex{kPi * hw.mellin(r + 1.0), 0.0});
                terms.push_back(t);
            }
            blk[l][j] = detail::log_sum(terms);
        }
    }
    // Top-right (p~_l rows, q~_k columns): conjugated deformed kernel.
    for (std::size_t l = 0; l < m2; ++l) {
        for (std::size_t k = 0; k < m2; ++k) {
            blk[l][m1 + k] =
                detail::log_conj(detail::deformed_entry(fpt[l], fqt[k], hw, l, k));
        }
    }
    // Bottom-left (q_k rows, p_j columns): deformed kernel, transposed layout.
    for (std::size_t k = 0; k < m1; ++k) {
        for (std::size_t j = 0; j < m1; ++j) {
            blk[m2 + k][j] = detail::deformed_entry(fp[j], fq[k], hw, j, k);
        }
    }
    // Bottom-right (q_k rows, q~_l columns): dressed Stieltjes bracket.
    for (std::size_t k = 0; k < m1; ++k) {
        for (std::size_t l = 0; l < m2; ++l) {
            const Complex alpha = fq[k].kappa;
            const Complex beta = std::conj(fqt[l].kappa);
            const Complex bracket = detail::stieltjes_bracket(alpha, beta, hw, spec, n);
            LogComplex entry = LogComplex::from(Complex{-kPi, 0.0} * bracket);
            entry *= LogComplex::from_pow(fq[k].b, -(n + 1));
            entry *= LogComplex::from_pow(std::conj(fqt[l].b), -(n + 1));
            blk[m2 + k][m1 + l] = entry;
        }
    }

    const ScaledDet d1 = log_det_scaled(q1);
    const ScaledDet d2 = log_det_scaled(q2);
    const ScaledDet num = log_det_scaled(blk);
    if (d1.det.is_zero() || d2.det.is_zero()) {
        throw DegenerateConfiguration("partition_general: singular Cauchy determinant");
    }
    LogComplex ratio = num.det / d1.det / d2.det;
    const double sign = (m1 % 2 == 1 && m2 % 2 == 1) ? -1.0 : 1.0;
    ratio *= LogComplex::from(Complex{sign, 0.0});
    PartitionResult out;
    out.value = ratio.value();
    out.log_abs =
        ratio.is_zero() ? -std::numeric_limits<double>::infinity() : ratio.logmag;
    out.condition_estimate = std::max({d1.condition, d2.condition, num.condition});
    return out;
}

// ---------------------------------------------------------------------------
// Exact 1-point winding density and mean winding number
// ---------------------------------------------------------------------------

/// Exact 1-point density of the winding field at p:
///   N b'/b + (a'/a - b'/b) Y_N(kappa, kappa)  when |b| >= |a| (bounded chart),
///   N a'/a - (a'/a - b'/b) Y_N(1/kappa, 1/kappa)  otherwise.
/// At an exact zero of a (or b) the finite limiting value N b'/b (or N a'/a)
/// is returned; the two branches agree wherever both are defined.
[[nodiscard]] inline Complex c1_exact(const CurvePair& curve, Complex p, const HatWeight& hw) {
    if (std::fabs(std::abs(p) - 1.0) > kUnitCircleTolerance) {
        throw ValidationError("c1_exact: p must lie on the unit circle");
    }
    const CurveFrame f = curve_frame(curve, p);
    const double ma = std::abs(f.a);
    const double mb = std::abs(f.b);
    if (ma == 0.0 && mb == 0.0) {
        throw ValidationError("c1_exact: a and b vanish simultaneously at p");
    }
    const double n = static_cast<double>(hw.size());
    if (mb >= ma) {
        if (ma == 0.0) return n * f.b_prime / f.b;
        const Complex kappa = f.a / f.b;
        const Complex ups = upsilon(kappa, kappa, hw);
        return n * f.b_prime / f.b + (f.a_prime / f.a - f.b_prime / f.b) * ups;
    }
    if (mb == 0.0) return n * f.a_prime / f.a;
    const Complex inv_kappa = f.b / f.a;
    const Complex ups = upsilon(inv_kappa, inv_kappa, hw);
    return n * f.a_prime / f.a - (f.a_prime / f.a - f.b_prime / f.b) * ups;
}

/// Mean winding number: (1 / 2 pi i) times the contour integral of the exact
/// 1-point density, with quadrature panels split at the circle zeros of a and
/// b (the density is continuous but not smooth there).  The exact mean is
/// real; a residual imaginary part above 1e-8 raises an accuracy error.
[[nodiscard]] inline double mean_winding_exact(const CurvePair& curve, const HatWeight& hw,
                                               const QuadratureSpec& spec) {
    auto density = [&curve, &hw](Complex p) { return c1_exact(curve, p, hw); };
    const Complex total = circle_integral_pv(density, curve_pole_set(curve), spec);
    const double threshold = 1e-8 * std::max(1.0, std::fabs(total.real()));
    if (std::fabs(total.imag()) > threshold) {
        throw AccuracyError("mean_winding_exact: residual imaginary part " +
                                std::to_string(total.imag()),
                            total, std::fabs(total.imag()));
    }
    return total.real();
}

}  // namespace windrmt
