// Winding extraction from determinant loops and the Monte Carlo estimator.

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "support/test_util.hpp"
#include "windrmt/curves.hpp"
#include "windrmt/errors.hpp"
#include "windrmt/logdet.hpp"
#include "windrmt/polya.hpp"
#include "windrmt/rng.hpp"
#include "windrmt/sampling.hpp"
#include "windrmt/winding.hpp"

using namespace windrmt;

namespace {

std::vector<Complex> loop_samples(int nodes, const std::function<Complex(Complex)>& f) {
    std::vector<Complex> values(static_cast<std::size_t>(nodes));
    for (int j = 0; j < nodes; ++j) {
        values[static_cast<std::size_t>(j)] =
            f(std::polar(1.0, kTwoPi * static_cast<double>(j) / nodes));
    }
    return values;
}

}  // namespace

TEST_CASE("winding extraction from a sampled loop") {
    SECTION("pure powers and simple rational zero counts") {
        REQUIRE(winding_from_samples(loop_samples(64, [](Complex p) { return std::pow(p, 5); })) ==
                5);
        REQUIRE(winding_from_samples(loop_samples(64, [](Complex p) { return 2.0 + p; })) == 0);
        REQUIRE(winding_from_samples(loop_samples(
                    64, [](Complex p) { return (p - 0.5) * (p - 2.0); })) == 1);
        REQUIRE(winding_from_samples(loop_samples(
                    32, [](Complex) { return Complex{3.0, -4.0}; })) == 0);
        REQUIRE(winding_from_samples(loop_samples(64, [](Complex p) { return 1.0 / p; })) == -1);
    }
    SECTION("result is invariant under global rescaling") {
        auto base = loop_samples(64, [](Complex p) { return std::pow(p, 3) * (p - 1.7); });
        REQUIRE(winding_from_samples(base) == 3);
        auto scaled = base;
        for (Complex& v : scaled) v *= 1e-150 * Complex{2.0, 1.0};
        REQUIRE(winding_from_samples(scaled) == 3);
    }
    SECTION("validation and gap-closure guards") {
        REQUIRE_THROWS_AS(winding_from_samples(std::vector<Complex>(15, Complex{1.0, 0.0})),
                          ValidationError);
        REQUIRE_THROWS_AS(winding_from_samples(std::vector<Complex>(32, Complex{0.0, 0.0})),
                          SamplingError);
        // p - 1 vanishes exactly at node 0 of the grid.
        REQUIRE_THROWS_AS(winding_from_samples(loop_samples(64, [](Complex p) { return p - 1.0; })),
                          SamplingError);
    }
    SECTION("coarse grids fail loudly instead of aliasing") {
        REQUIRE_THROWS_AS(
            winding_from_samples(loop_samples(16, [](Complex p) { return std::pow(p, 10); })),
            AccuracyError);
    }
}

TEST_CASE("grid refinement resolves fast phase variation") {
    QuadratureSpec spec;
    spec.node_count = 16;
    auto sample_at = [](Complex p) { return LogComplex::from_pow(p, 9); };
    SECTION("doubling reaches the resolvable regime") {
        REQUIRE(detail::winding_with_refinement(sample_at, spec) == 9);
    }
    SECTION("exhausted refinement becomes a discardable realization") {
        QuadratureSpec tight = spec;
        tight.max_refinements = 0;
        REQUIRE_THROWS_AS(detail::winding_with_refinement(sample_at, tight), SamplingError);
    }
    SECTION("exact zero sample is a discardable realization") {
        QuadratureSpec plain;
        auto vanishing = [](Complex p) { return LogComplex::from(p - 1.0); };
        REQUIRE_THROWS_AS(detail::winding_with_refinement(vanishing, plain), SamplingError);
    }
}

TEST_CASE("matrix and eigenvalue realization routes agree") {
    const CurvePair curve = testing::curve_generic();
    QuadratureSpec spec;
    RandomStream rs{20260814, 91};
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rs.u01() * 6.0);  // 2..7
        const Eigen::MatrixXcd k1 = sample_ginue(n, rs);
        const Eigen::MatrixXcd k2 = sample_ginue(n, rs);
        const Eigen::MatrixXcd ratio = Eigen::PartialPivLU<Eigen::MatrixXcd>(k1).solve(k2);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(ratio, false);
        REQUIRE(solver.info() == Eigen::Success);
        std::vector<Complex> eigs(solver.eigenvalues().data(),
                                  solver.eigenvalues().data() + n);
        REQUIRE(winding_realization_matrices(k1, k2, curve, spec) ==
                winding_realization_eigs(eigs, curve, spec));
    }
}

TEST_CASE("eigenvalue route realizes the argument principle") {
    QuadratureSpec spec;
    SECTION("zeros of 1 + p z land at -1/z") {
        // winding of prod (1 + p z_j) counts |z_j| > 1.
        const CurvePair curve = validate_curve(
            LaurentPolynomial::from_terms({{0, Complex{1.0, 0.0}}}),
            LaurentPolynomial::from_terms({{1, Complex{1.0, 0.0}}}));
        const std::vector<Complex> eigs{{-3.0, 0.0}, {0.5, 0.0}, {-0.2, 0.0}, {4.0, 0.0}};
        REQUIRE(winding_realization_eigs(eigs, curve, spec) == 2);
    }
    SECTION("zeros of p + z land at -z") {
        const CurvePair curve = testing::curve_linear();  // a = p, b = 1
        const std::vector<Complex> eigs{{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
        REQUIRE(winding_realization_eigs(eigs, curve, spec) == 3);
        const std::vector<Complex> mixed{{0.3, 0.1}, {-2.0, 1.0}};
        REQUIRE(winding_realization_eigs(mixed, curve, spec) == 1);
    }
    SECTION("empty eigenvalue list is rejected") {
        const CurvePair curve = testing::curve_linear();
        REQUIRE_THROWS_AS(winding_realization_eigs({}, curve, spec), ValidationError);
    }
    SECTION("high-degree curves are not aliased by a coarse starting grid") {
        // det = prod (1e6 p^40 + z_j) winds 40 * 3 = 120 times: every zero of
        // 1e6 p^40 + z sits at radius (|z| / 1e6)^(1/40) < 1.  On a 16-node
        // grid (or any refinement up to 128) the 120-turn phase wraps to a
        // small step under the pi/2 guard and the winding silently aliases
        // to 120 mod nodes; the bandwidth-derived node floor must catch it.
        const CurvePair curve = validate_curve(
            LaurentPolynomial::from_terms({{40, Complex{1.0e6, 0.0}}}),
            LaurentPolynomial::from_terms({{0, Complex{1.0, 0.0}}}));
        const std::vector<Complex> eigs{{0.5, 0.0}, {-0.3, 0.2}, {0.1, -0.4}};
        QuadratureSpec coarse;
        coarse.node_count = 16;
        REQUIRE(winding_realization_eigs(eigs, curve, coarse) == 120);
        const Eigen::MatrixXcd k1 = Eigen::MatrixXcd::Identity(3, 3);
        Eigen::MatrixXcd k2 = Eigen::MatrixXcd::Zero(3, 3);
        for (int j = 0; j < 3; ++j) k2(j, j) = eigs[static_cast<std::size_t>(j)];
        REQUIRE(winding_realization_matrices(k1, k2, curve, coarse) == 120);
    }
}

TEST_CASE("monte carlo mean winding estimator") {
    QuadratureSpec spec;
    SECTION("argument guards") {
        const CurvePair curve = testing::curve_linear();
        REQUIRE_THROWS_AS(
            mc_mean_winding(curve, Ensemble::ginue(), 3, 50, RandomStream{1, 0}, spec),
            ValidationError);
        REQUIRE_THROWS_AS(
            mc_mean_winding(curve, Ensemble::ginue(), 0, 200, RandomStream{1, 0}, spec),
            ValidationError);
        Ensemble bare;
        bare.kind = Ensemble::Kind::mb;
        REQUIRE_THROWS_AS(mc_mean_winding(curve, bare, 3, 200, RandomStream{1, 0}, spec),
                          ValidationError);
        const HatWeight hw{MBParams{1.0, 0.0}, 5};
        REQUIRE_THROWS_AS(
            mc_mean_winding(curve, Ensemble::mb(hw), 3, 200, RandomStream{1, 0}, spec),
            ValidationError);  // weight bound to N = 5, run requests N = 3
    }
    SECTION("b = 0 makes the winding deterministic") {
        const CurvePair curve = validate_curve(
            LaurentPolynomial::from_terms({{1, Complex{1.0, 0.0}}}), LaurentPolynomial{});
        const WindingEstimate est =
            mc_mean_winding(curve, Ensemble::ginue(), 3, 150, RandomStream{20260814, 101}, spec);
        REQUIRE(est.mean == 3.0);
        REQUIRE(est.std_error == 0.0);
        REQUIRE(est.trials == 150);
        REQUIRE(est.discarded == 0);
        REQUIRE(est.histogram.size() == 1);
        REQUIRE(est.histogram.at(3) == 150);
    }
    SECTION("inversion-symmetric curve averages to N/2") {
        const CurvePair curve = testing::curve_linear();
        const WindingEstimate est =
            mc_mean_winding(curve, Ensemble::ginue(), 4, 400, RandomStream{20260814, 103}, spec);
        long total = 0;
        for (const auto& [w, c] : est.histogram) total += c;
        REQUIRE(total == est.trials);
        REQUIRE(est.std_error > 0.0);
        REQUIRE(std::fabs(est.mean - 2.0) < 3.5 * est.std_error + 1e-12);
    }
    SECTION("result is independent of the thread count") {
        const CurvePair curve = testing::curve_generic();
        const RandomStream base{20260814, 107};
        const WindingEstimate one =
            mc_mean_winding(curve, Ensemble::ginue(), 3, 200, base, spec, 1);
        const WindingEstimate four =
            mc_mean_winding(curve, Ensemble::ginue(), 3, 200, base, spec, 4);
        REQUIRE(one.mean == four.mean);
        REQUIRE(one.std_error == four.std_error);
        REQUIRE(one.discarded == four.discarded);
        REQUIRE(one.histogram == four.histogram);
    }
    SECTION("determinantal ensemble run at matching size") {
        const HatWeight hw{MBParams{2.0, 0.5}, 3};
        const CurvePair curve = testing::curve_linear();
        const WindingEstimate est =
            mc_mean_winding(curve, Ensemble::mb(hw), 3, 200, RandomStream{20260814, 109}, spec);
        REQUIRE(est.trials + est.discarded == 200);
        // a = p, b = 1: winding counts eigenvalues inside the unit disk, and
        // the weight is inversion-symmetric, so the mean is N/2.
        REQUIRE(std::fabs(est.mean - 1.5) < 3.5 * est.std_error + 1e-12);
    }
}
