// SPDX-License-Identifier: MIT
//
// Tests for the partition module: the Upsilon sum, the Cauchy-type and
// deformed kernels, the determinant-ratio partition functions (including the
// general block form with conjugated pairs), the Stieltjes entry, the exact
// 1-point winding density, and the mean winding number.  Reference values
// come from the direct eigenvalue-integral oracle in tests/support.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "support/oracles.hpp"
#include "support/test_util.hpp"
#include "windrmt/curves.hpp"
#include "windrmt/errors.hpp"
#include "windrmt/numerics.hpp"
#include "windrmt/partition.hpp"
#include "windrmt/polya.hpp"
#include "windrmt/rng.hpp"

using namespace windrmt;
using windrmt::testing::curve_figure;
using windrmt::testing::curve_generic;
using windrmt::testing::curve_linear;
using windrmt::testing::mixed_products_generic;
using windrmt::testing::separated_circle_points;
using windrmt::testing::separated_point_pairs;

namespace {

double rel_diff(Complex got, Complex want) {
    const double scale = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / scale;
}

}  // namespace

TEST_CASE("upsilon symmetries and special values") {
    SECTION("complementary symmetry: Y(u,u) + Y(1/u,1/u) = N") {
        const HatWeight hw{MBParams{1.3, 0.4}, 9};
        RandomStream rs{20260814, 1};
        for (int trial = 0; trial < 12; ++trial) {
            const Complex u =
                std::polar(rs.uniform(0.3, 2.5), rs.uniform(0.0, kTwoPi));
            const Complex total =
                upsilon(u, u, hw) + upsilon(1.0 / u, 1.0 / u, hw);
            REQUIRE(std::abs(total - Complex{9.0, 0.0}) < 1e-10 * 9.0);
        }
    }
    SECTION("gamma=1, delta=0, |u|=1 gives N/2") {
        const HatWeight hw{MBParams{1.0, 0.0}, 8};
        RandomStream rs{20260814, 2};
        for (int trial = 0; trial < 8; ++trial) {
            const Complex u = std::polar(1.0, rs.uniform(0.0, kTwoPi));
            REQUIRE(std::abs(upsilon(u, u, hw) - Complex{4.0, 0.0}) < 1e-12 * 8.0);
        }
    }
    SECTION("large |v| saturates to N") {
        const HatWeight hw{MBParams{2.0, 0.5}, 6};
        const Complex v{1e8, 0.0};
        REQUIRE(std::abs(upsilon(v, v, hw) - Complex{6.0, 0.0}) < 1e-6 * 6.0);
    }
    SECTION("reflection identity in (u,v)") {
        const HatWeight hw{MBParams{1.7, 0.8}, 7};
        const int n = hw.size();
        RandomStream rs{20260814, 3};
        for (int trial = 0; trial < 10; ++trial) {
            const Complex u =
                std::polar(rs.uniform(0.5, 2.0), rs.uniform(0.0, kTwoPi));
            const Complex v =
                std::polar(rs.uniform(0.5, 2.0), rs.uniform(0.0, kTwoPi));
            if (std::abs(u - v) < 1e-3) continue;
            const Complex w = u / v;
            const Complex wn = std::pow(w, n);
            const Complex lhs = upsilon(u, v, hw);
            const Complex rhs =
                w * ((wn - 1.0) / (w - 1.0) - wn * upsilon(1.0 / u, 1.0 / v, hw));
            REQUIRE(rel_diff(lhs, rhs) < 1e-9);
        }
    }
    SECTION("v = 0 is a domain error") {
        const HatWeight hw{MBParams{1.0, 0.0}, 3};
        REQUIRE_THROWS_AS(upsilon(Complex{1.0, 0.0}, Complex{0.0, 0.0}, hw),
                          ValidationError);
    }
}

TEST_CASE("cauchy kernel entries and antisymmetry") {
    SECTION("explicit 1x1 value") {
        const CurvePair curve = curve_linear();
        PointPairs pts;
        pts.p = {Complex{1.0, 0.0}};
        pts.q = {Complex{0.0, 1.0}};
        const Eigen::MatrixXcd k = cauchy_kernel(curve, pts);
        REQUIRE(rel_diff(k(0, 0), Complex{1.0, 0.0} / Complex{1.0, -1.0}) < 1e-14);
    }
    SECTION("transpose antisymmetry") {
        const CurvePair curve = curve_generic();
        RandomStream rs{20260814, 4};
        const PointPairs pts = separated_point_pairs(curve, 3, 0, rs);
        PointPairs swapped;
        swapped.p = pts.q;
        swapped.q = pts.p;
        const Eigen::MatrixXcd forward = cauchy_kernel(curve, pts);
        const Eigen::MatrixXcd backward = cauchy_kernel(curve, swapped);
        REQUIRE((forward.transpose() + backward).cwiseAbs().maxCoeff() <
                1e-14 * backward.cwiseAbs().maxCoeff());
    }
    SECTION("constant a and b degenerate") {
        const CurvePair curve =
            validate_curve(LaurentPolynomial::from_terms({{0, Complex{2.0, 0.0}}}),
                           LaurentPolynomial::from_terms({{0, Complex{1.0, 0.0}}}));
        PointPairs pts;
        pts.p = {Complex{1.0, 0.0}};
        pts.q = {Complex{0.0, 1.0}};
        REQUIRE_THROWS_AS(cauchy_kernel(curve, pts), DegenerateConfiguration);
    }
}

TEST_CASE("deformed kernel collapses to the cauchy kernel at coincidence") {
    const CurvePair curve = curve_generic();
    const HatWeight hw{MBParams{1.0, 0.0}, 6};
    RandomStream rs{20260814, 5};
    const Complex q = testing::random_circle_point(rs);
    PointPairs pts;
    pts.q = {q};
    pts.p = {q * std::polar(1.0, 1e-8)};
    const LogMatrix deformed = deformed_kernel(curve, pts, hw);
    const Eigen::MatrixXcd cauchy = cauchy_kernel(curve, pts);
    REQUIRE(rel_diff(deformed[0][0].value(), cauchy(0, 0)) < 1e-5);

    PointPairs exact;
    exact.q = {q};
    exact.p = {q};
    REQUIRE_THROWS_AS(deformed_kernel(curve, exact, hw), DegenerateConfiguration);
}

TEST_CASE("partition_m basics and reductions") {
    SECTION("coincident points give exactly one") {
        const CurvePair curve = curve_figure();
        const HatWeight hw{MBParams{1.7, 0.3}, 7};
        RandomStream rs{20260814, 6};
        PointPairs pts = separated_point_pairs(curve, 3, 0, rs);
        pts.q = pts.p;
        const PartitionResult res = partition_m(curve, pts, hw);
        REQUIRE(res.value == Complex{1.0, 0.0});
        REQUIRE(res.log_abs == 0.0);
        REQUIRE(res.condition_estimate == 1.0);
    }
    SECTION("tilde points rejected") {
        const CurvePair curve = curve_linear();
        const HatWeight hw{MBParams{1.0, 0.0}, 2};
        RandomStream rs{20260814, 7};
        const PointPairs pts = separated_point_pairs(curve, 1, 1, rs);
        REQUIRE_THROWS_AS(partition_m(curve, pts, hw), ValidationError);
    }
    SECTION("separation violation detected") {
        const CurvePair curve =
            validate_curve(LaurentPolynomial::from_terms({{2, Complex{1.0, 0.0}}}),
                           LaurentPolynomial::from_terms({{0, Complex{1.0, 0.0}}}));
        const HatWeight hw{MBParams{1.0, 0.0}, 3};
        PointPairs pts;
        pts.p = {std::polar(1.0, 0.3), std::polar(1.0, 1.1)};
        const Complex q0 = std::polar(1.0, 2.0);
        pts.q = {q0, -q0};  // kappa(q) = q^2 coincide
        REQUIRE_THROWS_AS(partition_m(curve, pts, hw), AssumptionViolation);
    }
    SECTION("matches the Gaussian closed form at gamma=1, delta=0") {
        const CurvePair curve = curve_generic();
        const HatWeight hw{MBParams{1.0, 0.0}, 8};
        RandomStream rs{20260814, 8};
        for (int trial = 0; trial < 5; ++trial) {
            const PointPairs pts = separated_point_pairs(curve, 2, 0, rs);
            const PartitionResult exact = partition_m(curve, pts, hw);
            const PartitionResult gauss = gaussian_partition(curve, pts, 8);
            REQUIRE(rel_diff(exact.value, gauss.value) < 1e-9);
        }
    }
    SECTION("a <-> b swapped representation gives the same value") {
        const CurvePair curve = curve_generic();
        const CurvePair swapped = detail::swapped_curve(curve);
        const HatWeight hw{MBParams{1.4, 0.6}, 9};
        RandomStream rs{20260814, 9};
        const PointPairs pts = separated_point_pairs(curve, 2, 0, rs);
        const std::size_t m = pts.m1();
        auto assemble = [&](const CurvePair& c) {
            const auto fp = detail::frames_at(c, pts.p);
            const auto fq = detail::frames_at(c, pts.q);
            LogMatrix qgrid(m, std::vector<LogComplex>(m));
            LogMatrix dgrid(m, std::vector<LogComplex>(m));
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < m; ++j) {
                    qgrid[i][j] = detail::cauchy_entry(fp[i], fq[j], "test", i, j);
                    dgrid[i][j] = detail::deformed_entry(fp[i], fq[j], hw, i, j);
                }
            }
            return (log_det_scaled(dgrid).det / log_det_scaled(qgrid).det).value();
        };
        REQUIRE(rel_diff(assemble(curve), assemble(swapped)) < 1e-10);
    }
}

TEST_CASE("partition_m against the eigenvalue-integral oracle") {
    const QuadratureSpec spec{};
    SECTION("N = 1") {
        const CurvePair curve = curve_generic();
        RandomStream rs{20260814, 10};
        const struct {
            double gamma, delta;
            std::size_t m;
        } cases[] = {{2.0, 0.5, 1}, {1.3, 0.7, 2}, {1.0, 0.0, 1}};
        for (const auto& c : cases) {
            const HatWeight hw{MBParams{c.gamma, c.delta}, 1};
            const PointPairs pts = separated_point_pairs(curve, c.m, 0, rs);
            const PartitionResult got = partition_m(curve, pts, hw);
            const Complex want = testing::oracle_partition(curve, pts, hw, spec);
            INFO("gamma=" << c.gamma << " delta=" << c.delta << " m=" << c.m
                          << " got=" << got.value << " want=" << want);
            REQUIRE(rel_diff(got.value, want) < 1e-6);
        }
    }
    SECTION("N = 2") {
        const CurvePair curve = curve_generic();
        RandomStream rs{20260814, 11};
        const struct {
            double gamma, delta;
            std::size_t m;
        } cases[] = {{1.2, 0.25, 1}, {2.0, 0.5, 2}};
        for (const auto& c : cases) {
            const HatWeight hw{MBParams{c.gamma, c.delta}, 2};
            const PointPairs pts = separated_point_pairs(curve, c.m, 0, rs);
            const PartitionResult got = partition_m(curve, pts, hw);
            const Complex want = testing::oracle_partition(curve, pts, hw, spec);
            INFO("gamma=" << c.gamma << " delta=" << c.delta << " m=" << c.m
                          << " got=" << got.value << " want=" << want);
            REQUIRE(rel_diff(got.value, want) < 1e-3);
            CHECK(rel_diff(got.value, want) < 1e-6);
        }
    }
}

TEST_CASE("gaussian partition closed form") {
    SECTION("m=1, a=p, b=1 closed form") {
        const CurvePair curve = curve_linear();
        RandomStream rs{20260814, 12};
        for (int trial = 0; trial < 6; ++trial) {
            const Complex p = testing::random_circle_point(rs);
            const Complex q = testing::random_circle_point(rs);
            if (std::abs(p - q) < 0.05) continue;
            PointPairs pts;
            pts.p = {p};
            pts.q = {q};
            const int n = 12;
            const PartitionResult got = gaussian_partition(curve, pts, n);
            const Complex want = std::pow((std::conj(q) * p + 1.0) / 2.0, n);
            REQUIRE(rel_diff(got.value, want) < 1e-12);
        }
    }
    SECTION("coincidence and validation") {
        const CurvePair curve = curve_linear();
        PointPairs pts;
        pts.p = {Complex{1.0, 0.0}};
        pts.q = {Complex{1.0, 0.0}};
        REQUIRE(gaussian_partition(curve, pts, 5).value == Complex{1.0, 0.0});
        REQUIRE_THROWS_AS(gaussian_partition(curve, pts, 0), ValidationError);
    }
}

TEST_CASE("oracle self-check: residue route vs product grid and Gaussian form") {
    const QuadratureSpec spec{};
    SECTION("planar integral two routes agree") {
        // The grid route truncates the radial tail and its fixed angular mesh
        // loses accuracy in thin layers around the pole radii, so it only
        // guards against sign or factor errors in the residue route.  The
        // sharp cross-validation is the Gaussian closed form below.
        const HatWeight hw{MBParams{1.0, 0.0}, 1};
        testing::AngularRational f;
        f.num_z = {Complex{0.4, 0.2}};
        f.den_z = {Complex{-0.8, 0.9}};
        f.num_zb = {Complex{0.1, -0.7}};
        f.den_zb = {Complex{1.1, 0.4}};
        auto weight = [&hw](double t) { return hw.evaluate(t); };
        const Complex fine = testing::planar_integral(f, weight, spec);
        const Complex coarse = testing::planar_integral_grid(f, weight, 4000, 512, 400.0);
        INFO("fine=" << fine << " coarse=" << coarse);
        REQUIRE(rel_diff(coarse, fine) < 5e-2);
    }
    SECTION("oracle matches the independent Gaussian closed form") {
        const CurvePair curve = curve_generic();
        RandomStream rs{20260814, 13};
        for (int n = 1; n <= 2; ++n) {
            const HatWeight hw{MBParams{1.0, 0.0}, n};
            const PointPairs pts = separated_point_pairs(curve, 1, 0, rs);
            const Complex oracle = testing::oracle_partition(curve, pts, hw, spec);
            const Complex gauss = gaussian_partition(curve, pts, n).value;
            INFO("n=" << n << " oracle=" << oracle << " gauss=" << gauss);
            REQUIRE(rel_diff(oracle, gauss) < 1e-8);
        }
    }
}

TEST_CASE("stieltjes kernel entry") {
    const QuadratureSpec spec{};
    const HatWeight hw{MBParams{2.0, 0.5}, 1};
    SECTION("validation and degeneracy") {
        REQUIRE_THROWS_AS(
            stieltjes_kernel_entry(Complex{0.0, 0.0}, Complex{1.0, 0.0}, hw, spec),
            ValidationError);
        const Complex alpha{0.7, 0.4};
        REQUIRE_THROWS_AS(stieltjes_kernel_entry(alpha, std::conj(alpha), hw, spec),
                          DegenerateConfiguration);
    }
    SECTION("pair symmetry") {
        const Complex alpha = std::polar(0.9, 0.3);
        const Complex beta = std::polar(1.4, 0.9);
        const Complex one = stieltjes_kernel_entry(alpha, beta, hw, spec);
        const Complex two = stieltjes_kernel_entry(beta, alpha, hw, spec);
        REQUIRE(rel_diff(one, two) < 1e-12);
    }
    SECTION("N = 1 value against the planar oracle") {
        for (const auto& [gamma, delta] : {std::pair{2.0, 0.5}, std::pair{1.0, 0.0}}) {
            const HatWeight hw1{MBParams{gamma, delta}, 1};
            const Complex alpha = std::polar(0.9, 0.3);
            const Complex beta = std::polar(1.4, 0.9);
            const Complex entry = stieltjes_kernel_entry(alpha, beta, hw1, spec);
            testing::AngularRational f;
            f.den_z = {-alpha};
            f.den_zb = {-beta};
            const Complex oracle =
                testing::planar_integral(f, [&](double t) { return hw1.evaluate(t); },
                                         spec) /
                kPi;
            INFO("gamma=" << gamma << " delta=" << delta << " entry=" << entry
                          << " oracle=" << oracle);
            REQUIRE(rel_diff(entry, oracle) < 1e-6);
        }
    }
}

TEST_CASE("partition_general reductions and conjugation symmetry") {
    const QuadratureSpec spec{};
    const CurvePair curve = curve_generic();
    const HatWeight hw{MBParams{1.5, 0.4}, 3};
    RandomStream rs{20260814, 14};
    SECTION("m2 = 0 delegates to partition_m") {
        const PointPairs pts = separated_point_pairs(curve, 2, 0, rs);
        const PartitionResult a = partition_general(curve, pts, hw, spec);
        const PartitionResult b = partition_m(curve, pts, hw);
        REQUIRE(rel_diff(a.value, b.value) < 1e-12);
        REQUIRE(a.log_abs == b.log_abs);
    }
    SECTION("m1 = 0 is the conjugate of partition_m") {
        PointPairs pts = separated_point_pairs(curve, 0, 2, rs);
        const PartitionResult a = partition_general(curve, pts, hw, spec);
        PointPairs mirror;
        mirror.p = pts.p_tilde;
        mirror.q = pts.q_tilde;
        const PartitionResult b = partition_m(curve, mirror, hw);
        REQUIRE(rel_diff(a.value, std::conj(b.value)) < 1e-12);
    }
    SECTION("full coincidence gives exactly one") {
        PointPairs pts = separated_point_pairs(curve, 2, 2, rs);
        pts.q = pts.p;
        pts.q_tilde = pts.p_tilde;
        const PartitionResult res = partition_general(curve, pts, hw, spec);
        REQUIRE(res.value == Complex{1.0, 0.0});
        REQUIRE(res.log_abs == 0.0);
    }
    SECTION("swapping the groups conjugates the value") {
        for (int trial = 0; trial < 4; ++trial) {
            PointPairs pts = separated_point_pairs(curve, 1, 1, rs);
            if (!mixed_products_generic(curve, pts)) continue;
            PointPairs flipped;
            flipped.p = pts.p_tilde;
            flipped.q = pts.q_tilde;
            flipped.p_tilde = pts.p;
            flipped.q_tilde = pts.q;
            const PartitionResult a = partition_general(curve, pts, hw, spec);
            const PartitionResult b = partition_general(curve, flipped, hw, spec);
            INFO("a=" << a.value << " conj(b)=" << std::conj(b.value));
            REQUIRE(rel_diff(a.value, std::conj(b.value)) < 1e-10);
        }
    }
}

TEST_CASE("partition_general against the eigenvalue-integral oracle") {
    const QuadratureSpec spec{};
    const CurvePair curve = curve_generic();
    RandomStream rs{20260814, 15};

    const struct {
        int n;
        std::size_t m1, m2;
        double gamma, delta;
        double tol;
    } cases[] = {
        {1, 1, 1, 1.0, 0.0, 1e-5},   // the contract case
        {1, 1, 1, 2.0, 0.5, 1e-6},   //
        {1, 1, 1, 1.3, 0.7, 1e-6},   //
        {1, 2, 1, 1.6, 0.2, 1e-5},   // rectangular blocks
        {1, 1, 2, 1.6, 0.2, 1e-5},   // rectangular blocks, flipped
        {2, 1, 1, 2.0, 0.5, 1e-3},   //
        {2, 2, 1, 1.2, 0.25, 1e-3},  //
    };
    for (const auto& c : cases) {
        const HatWeight hw{MBParams{c.gamma, c.delta}, c.n};
        PointPairs pts;
        for (int guard = 0;; ++guard) {
            REQUIRE(guard < 50);
            pts = separated_point_pairs(curve, c.m1, c.m2, rs);
            if (mixed_products_generic(curve, pts)) break;
        }
        const PartitionResult got = partition_general(curve, pts, hw, spec);
        const Complex want = testing::oracle_partition(curve, pts, hw, spec);
        INFO("N=" << c.n << " m1=" << c.m1 << " m2=" << c.m2 << " gamma=" << c.gamma
                  << " delta=" << c.delta << " got=" << got.value << " want=" << want
                  << " rel=" << rel_diff(got.value, want));
        REQUIRE(rel_diff(got.value, want) < c.tol);
    }
}

TEST_CASE("partition equals one at coincidence for 100 random configurations") {
    const QuadratureSpec spec{};
    const CurvePair curves[] = {curve_linear(), curve_generic(), curve_figure()};
    RandomStream rs{20260814, 16};
    int done = 0;
    while (done < 100) {
        const CurvePair& curve = curves[done % 3];
        const std::size_t m1 = static_cast<std::size_t>(rs.uniform(0.0, 3.0));
        const std::size_t m2 = static_cast<std::size_t>(rs.uniform(0.0, 3.0));
        if (m1 + m2 == 0) continue;
        const double gamma = rs.uniform(0.7, 2.2);
        const double delta = rs.uniform(-0.2, 1.5);
        const int n = 1 + static_cast<int>(rs.uniform(0.0, 10.0));
        const HatWeight hw{MBParams{gamma, delta}, n};
        PointPairs pts = separated_point_pairs(curve, m1, m2, rs);
        pts.q = pts.p;
        pts.q_tilde = pts.p_tilde;
        const PartitionResult res = partition_general(curve, pts, hw, spec);
        REQUIRE(res.value == Complex{1.0, 0.0});
        REQUIRE(res.log_abs == 0.0);
        REQUIRE(res.condition_estimate == 1.0);
        ++done;
    }
}

TEST_CASE("exact 1-point winding density") {
    SECTION("a=p, b=1 at gamma=1, delta=0") {
        const CurvePair curve = curve_linear();
        const HatWeight hw{MBParams{1.0, 0.0}, 5};
        RandomStream rs{20260814, 17};
        for (int trial = 0; trial < 6; ++trial) {
            const Complex p = testing::random_circle_point(rs);
            const Complex want = 2.5 / p;
            REQUIRE(rel_diff(c1_exact(curve, p, hw), want) < 1e-12);
        }
    }
    SECTION("branch consistency") {
        const CurvePair curve = curve_generic();
        const HatWeight hw{MBParams{1.6, 0.9}, 6};
        RandomStream rs{20260814, 18};
        for (int trial = 0; trial < 6; ++trial) {
            const Complex p = testing::random_circle_point(rs);
            const CurveFrame f = curve_frame(curve, p);
            if (std::abs(f.a) < 0.05 || std::abs(f.b) < 0.05) continue;
            const Complex got = c1_exact(curve, p, hw);
            // Evaluate the other branch by hand.
            const double n = hw.size();
            Complex other;
            if (std::abs(f.b) >= std::abs(f.a)) {
                const Complex inv = f.b / f.a;
                other = n * f.a_prime / f.a -
                        (f.a_prime / f.a - f.b_prime / f.b) * upsilon(inv, inv, hw);
            } else {
                const Complex kappa = f.a / f.b;
                other = n * f.b_prime / f.b +
                        (f.a_prime / f.a - f.b_prime / f.b) * upsilon(kappa, kappa, hw);
            }
            REQUIRE(rel_diff(got, other) < 1e-10);
        }
    }
    SECTION("finite at a zero of a") {
        // a = p - 1 vanishes at p = 1.
        const CurvePair curve = validate_curve(
            LaurentPolynomial::from_terms({{1, Complex{1.0, 0.0}}, {0, Complex{-1.0, 0.0}}}),
            LaurentPolynomial::from_terms({{0, Complex{1.0, 0.0}}}));
        const HatWeight hw{MBParams{1.0, 0.0}, 4};
        const Complex at_zero = c1_exact(curve, Complex{1.0, 0.0}, hw);
        REQUIRE(std::abs(at_zero) == 0.0);  // N b'/b with b constant
        const Complex near_zero = c1_exact(curve, std::polar(1.0, 1e-3), hw);
        REQUIRE(std::abs(near_zero) < 1.0);
    }
}

TEST_CASE("mean winding number, exact route") {
    const QuadratureSpec spec{};
    SECTION("a=p, b=1, gamma=1, delta=0, N=5 gives 5/2") {
        const CurvePair curve = curve_linear();
        const HatWeight hw{MBParams{1.0, 0.0}, 5};
        REQUIRE(std::fabs(mean_winding_exact(curve, hw, spec) - 2.5) < 1e-9);
    }
    SECTION("constant curves wind zero times") {
        const CurvePair curve =
            validate_curve(LaurentPolynomial::from_terms({{0, Complex{2.0, 0.0}}}),
                           LaurentPolynomial::from_terms({{0, Complex{1.0, 0.0}}}));
        const HatWeight hw{MBParams{1.8, 0.3}, 6};
        REQUIRE(std::fabs(mean_winding_exact(curve, hw, spec)) < 1e-12);
    }
    SECTION("invariant under global phase rotation of a") {
        const HatWeight hw{MBParams{1.5, 0.5}, 4};
        const CurvePair curve = curve_generic();
        LaurentPolynomial rotated = curve.a;
        for (auto& [k, c] : rotated.coefficients) c *= std::polar(1.0, 0.77);
        const CurvePair curve2 = validate_curve(rotated, curve.b);
        const double w1 = mean_winding_exact(curve, hw, spec);
        const double w2 = mean_winding_exact(curve2, hw, spec);
        REQUIRE(std::fabs(w1 - w2) < 1e-9);
    }
    SECTION("monomial curve approaches the asymptotic value") {
        // a = 1.3 p, b = 1, gamma = 2, delta = 0.5: the subleading term
        // vanishes (gamma - 1 - 2 delta = 0) and the mean tends to
        // N r^4 / (r^4 + 1).
        const CurvePair curve =
            validate_curve(LaurentPolynomial::from_terms({{1, Complex{1.3, 0.0}}}),
                           LaurentPolynomial::from_terms({{0, Complex{1.0, 0.0}}}));
        const int n = 40;
        const HatWeight hw{MBParams{2.0, 0.5}, n};
        const double r4 = std::pow(1.3, 4.0);
        const double lead = n * r4 / (r4 + 1.0);
        REQUIRE(std::fabs(mean_winding_exact(curve, hw, spec) - lead) < 0.05);
    }
}

TEST_CASE("generalized Andreief identity on discrete measures") {
    RandomStream rs{20260814, 19};
    auto random_matrix = [&rs](Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXcd m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                m(i, j) = Complex{rs.uniform(-1.0, 1.0), rs.uniform(-1.0, 1.0)};
            }
        }
        return m;
    };
    const struct {
        int n_points, m, n, atoms;
    } cases[] = {{2, 1, 1, 4}, {3, 0, 0, 5}, {2, 2, 1, 4}, {3, 1, 2, 3}};
    for (const auto& c : cases) {
        const Eigen::MatrixXcd a_mat = random_matrix(c.m, c.n_points + c.m);
        const Eigen::MatrixXcd b_mat = random_matrix(c.n, c.n_points + c.n);
        const Eigen::MatrixXcd f_tab = random_matrix(c.n_points + c.m, c.atoms);
        const Eigen::MatrixXcd g_tab = random_matrix(c.n_points + c.n, c.atoms);
        std::vector<Complex> weights;
        for (int l = 0; l < c.atoms; ++l) {
            weights.push_back(Complex{rs.uniform(0.1, 1.0), rs.uniform(-0.2, 0.2)});
        }
        const Complex lhs =
            testing::andreief_lhs(a_mat, f_tab, b_mat, g_tab, weights, c.n_points);
        const Complex rhs =
            testing::andreief_rhs(a_mat, f_tab, b_mat, g_tab, weights, c.n_points);
        INFO("n_points=" << c.n_points << " m=" << c.m << " n=" << c.n << " lhs=" << lhs
                         << " rhs=" << rhs);
        REQUIRE(rel_diff(lhs, rhs) < 1e-12);
    }
}
