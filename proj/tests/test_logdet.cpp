// Log-scale complex arithmetic and overflow-proof determinants.

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "windrmt/errors.hpp"
#include "windrmt/logdet.hpp"
#include "windrmt/rng.hpp"

using namespace windrmt;
using Cx = std::complex<double>;

namespace {

double rel_diff(Cx got, Cx want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

Eigen::MatrixXcd random_matrix(int n, RandomStream& rs) {
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m(i, j) = rs.complex_normal();
    }
    return m;
}

}  // namespace

TEST_CASE("log-scale complex numbers") {
    RandomStream rs{20260814, 51};
    SECTION("round trip and zero") {
        for (int trial = 0; trial < 20; ++trial) {
            const Cx z = rs.complex_normal();
            REQUIRE(rel_diff(LogComplex::from(z).value(), z) < 1e-14);
        }
        REQUIRE(LogComplex::from(Cx{0.0, 0.0}).is_zero());
        REQUIRE(LogComplex::from(Cx{0.0, 0.0}).value() == Cx{0.0, 0.0});
    }
    SECTION("integer powers, including far outside double range") {
        const Cx z{2.0, 1.0};
        REQUIRE(rel_diff(LogComplex::from_pow(z, 5).value(), std::pow(z, 5)) < 1e-13);
        REQUIRE(rel_diff(LogComplex::from_pow(z, -3).value(), std::pow(z, -3)) < 1e-13);
        const LogComplex huge = LogComplex::from_pow(z, 2000);
        REQUIRE(std::isfinite(huge.logmag));
        REQUIRE(std::fabs(huge.logmag - 2000.0 * std::log(std::abs(z))) < 1e-9);
        REQUIRE(std::fabs(std::abs(huge.unit) - 1.0) < 1e-12);
    }
    SECTION("zero base powers") {
        REQUIRE(LogComplex::from_pow(Cx{0.0, 0.0}, 0).value() == Cx{1.0, 0.0});
        REQUIRE(LogComplex::from_pow(Cx{0.0, 0.0}, 3).is_zero());
        REQUIRE_THROWS_AS(LogComplex::from_pow(Cx{0.0, 0.0}, -2), NumericalError);
    }
    SECTION("multiplication and division mirror complex arithmetic") {
        for (int trial = 0; trial < 20; ++trial) {
            const Cx x = rs.complex_normal();
            const Cx y = rs.complex_normal();
            if (std::abs(y) < 1e-6) continue;
            REQUIRE(rel_diff((LogComplex::from(x) * LogComplex::from(y)).value(), x * y) < 1e-13);
            REQUIRE(rel_diff((LogComplex::from(x) / LogComplex::from(y)).value(), x / y) < 1e-13);
        }
        REQUIRE((LogComplex::from(Cx{0.0, 0.0}) * LogComplex::from(Cx{3.0, 1.0})).is_zero());
        REQUIRE_THROWS_AS(LogComplex::from(Cx{1.0, 0.0}) / LogComplex::from(Cx{0.0, 0.0}),
                          NumericalError);
    }
    SECTION("direction stays normalized over long products") {
        LogComplex acc = LogComplex::from(Cx{1.0, 0.0});
        for (int i = 0; i < 1000; ++i) {
            acc *= LogComplex::from(std::polar(1.7, 0.1 * i));
        }
        REQUIRE(std::fabs(std::abs(acc.unit) - 1.0) < 1e-12);
        REQUIRE(std::fabs(acc.logmag - 1000.0 * std::log(1.7)) < 1e-8);
    }
}

TEST_CASE("determinant of ordinary matrices in log scale") {
    RandomStream rs{20260814, 53};
    SECTION("matches a direct determinant on moderate matrices") {
        for (int n : {1, 2, 3, 5, 8}) {
            for (int trial = 0; trial < 5; ++trial) {
                const Eigen::MatrixXcd m = random_matrix(n, rs);
                REQUIRE(rel_diff(log_det(m).value(), m.determinant()) < 1e-9);
            }
        }
    }
    SECTION("identity, permutation sign, and the empty matrix") {
        REQUIRE(rel_diff(log_det(Eigen::MatrixXcd::Identity(4, 4)).value(), Cx{1.0, 0.0}) <
                1e-14);
        Eigen::MatrixXcd swapped = Eigen::MatrixXcd::Identity(4, 4);
        swapped.row(0).swap(swapped.row(2));
        REQUIRE(rel_diff(log_det(swapped).value(), Cx{-1.0, 0.0}) < 1e-14);
        REQUIRE(log_det(Eigen::MatrixXcd(0, 0)).value() == Cx{1.0, 0.0});
    }
    SECTION("exactly singular matrices give exact zero") {
        Eigen::MatrixXcd m = random_matrix(3, rs);
        m.row(2) = m.row(0);
        REQUIRE(log_det(m).is_zero());
    }
    SECTION("non-square is rejected") {
        REQUIRE_THROWS_AS(log_det(Eigen::MatrixXcd(2, 3)), ValidationError);
    }
}

TEST_CASE("determinant with log-scale entries and row/column scaling") {
    RandomStream rs{20260814, 59};
    auto wrap = [](const Eigen::MatrixXcd& m) {
        std::vector<std::vector<LogComplex>> entries(
            static_cast<std::size_t>(m.rows()),
            std::vector<LogComplex>(static_cast<std::size_t>(m.cols())));
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    LogComplex::from(m(i, j));
            }
        }
        return entries;
    };
    SECTION("agrees with the plain route on representable matrices") {
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::MatrixXcd m = random_matrix(5, rs);
            const ScaledDet sd = log_det_scaled(wrap(m));
            REQUIRE(rel_diff(sd.det.value(), m.determinant()) < 1e-9);
            REQUIRE(sd.condition >= 1.0);
        }
    }
    SECTION("handles entries far beyond double range") {
        // [[e^800, 1], [2, e^-800]] has determinant 1 - 2 = -1.
        std::vector<std::vector<LogComplex>> entries{
            {LogComplex{800.0, {1.0, 0.0}}, LogComplex::from(Cx{1.0, 0.0})},
            {LogComplex::from(Cx{2.0, 0.0}), LogComplex{-800.0, {1.0, 0.0}}}};
        const ScaledDet sd = log_det_scaled(entries);
        REQUIRE(rel_diff(sd.det.value(), Cx{-1.0, 0.0}) < 1e-12);
    }
    SECTION("graded anti-diagonal keeps the permutation sign") {
        // Reversal of 3 elements is the transposition (1 3): sign -1, so the
        // determinant of antidiag(e^500, 2, e^-500) is -2.
        const LogComplex zero = LogComplex::from(Cx{0.0, 0.0});
        std::vector<std::vector<LogComplex>> entries{
            {zero, zero, LogComplex{500.0, {1.0, 0.0}}},
            {zero, LogComplex::from(Cx{2.0, 0.0}), zero},
            {LogComplex{-500.0, {1.0, 0.0}}, zero, zero}};
        const ScaledDet sd = log_det_scaled(entries);
        REQUIRE(rel_diff(sd.det.value(), Cx{-2.0, 0.0}) < 1e-12);
    }
    SECTION("zero row or column short-circuits to exact zero") {
        const LogComplex zero = LogComplex::from(Cx{0.0, 0.0});
        std::vector<std::vector<LogComplex>> entries{
            {LogComplex::from(Cx{1.0, 0.0}), LogComplex::from(Cx{2.0, 0.0})}, {zero, zero}};
        REQUIRE(log_det_scaled(entries).det.is_zero());
    }
    SECTION("near-singular matrices report a large condition estimate") {
        Eigen::MatrixXcd m = random_matrix(4, rs);
        m.row(3) = m.row(1) + 1e-12 * random_matrix(4, rs).row(0);
        const ScaledDet sd = log_det_scaled(wrap(m));
        REQUIRE(sd.condition > 1e6);
    }
    SECTION("ragged input is rejected") {
        std::vector<std::vector<LogComplex>> ragged{{LogComplex{}, LogComplex{}},
                                                    {LogComplex{}}};
        REQUIRE_THROWS_AS(log_det_scaled(ragged), ValidationError);
    }
}
