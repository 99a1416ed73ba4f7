#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "lcid/errors.hpp"
#include "lcid/rng.hpp"
#include "lcid/estimators.hpp"
#include "lcid/sysid.hpp"
#include "oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace lcid;

namespace {

FixedDenominatorFilter random_stable_filter(Rng& rng) {
    // Two real poles drawn inside the unit circle.
    const double p1 = 1.6 * rng.uniform() - 0.8;
    const double p2 = 1.6 * rng.uniform() - 0.8;
    VectorXd denom(2);
    denom << -(p1 + p2), p1 * p2;
    return FixedDenominatorFilter(denom, 0.5 + rng.uniform());
}

}  // namespace

TEST_CASE("mutual coherence on the worked examples") {
    CHECK(mutual_coherence(MatrixXd::Identity(3, 3)) == 0.0);

    MatrixXd proportional(3, 2);
    proportional << 1, 2, -1, -2, 0.5, 1;
    CHECK(mutual_coherence(proportional) == doctest::Approx(1.0));

    MatrixXd pair(2, 2);
    pair << 1, 1 / std::sqrt(2.0), 0, 1 / std::sqrt(2.0);
    CHECK(mutual_coherence(pair) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));

    MatrixXd with_zero = MatrixXd::Identity(3, 3);
    with_zero.col(1).setZero();
    CHECK_THROWS_WITH_AS(mutual_coherence(with_zero), doctest::Contains("column 1"),
                         std::invalid_argument);
}

TEST_CASE("coherence is the max-norm of the unit-column Gram matrix") {
    Rng rng(201);
    for (int trial = 0; trial < 50; ++trial) {
        MatrixXd a = oracle::random_matrix(rng, 6, 4);
        for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) /= a.col(j).norm();
        const double mu = mutual_coherence(a);
        const double lemma = (a.transpose() * a - MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff();
        CHECK(std::abs(mu - lemma) <= 1e-12);
    }
}

TEST_CASE("coherence condition against the 1/(3s) bound") {
    CHECK(coherence_condition(MatrixXd::Identity(4, 4), 7));

    MatrixXd pair(2, 2);  // mu = 0.98
    pair << 1, 0.98, 0, std::sqrt(1 - 0.98 * 0.98);
    CHECK_FALSE(coherence_condition(pair, 10));

    // mu = 0.05 still misses the s = 10 bound: 0.05 > 1/30.
    MatrixXd mild(2, 2);
    mild << 1, 0.05, 0, std::sqrt(1 - 0.05 * 0.05);
    CHECK_FALSE(coherence_condition(mild, 10));
    CHECK(coherence_condition(mild, 6));  // 1/18 = 0.0556 > 0.05
}

TEST_CASE("recovery probability bound") {
    const double got = recovery_bound(40, 10, 1.0);
    const double expected = (1.0 - 30.0 / 1600.0) * (1.0 - std::exp(-10.0 / 7.0));
    CHECK(got == doctest::Approx(expected).epsilon(1e-14));
    CHECK(got == doctest::Approx(0.7461).epsilon(1e-4));

    // Large s drives the second factor to one.
    CHECK(recovery_bound(4000, 1000, 1.0) ==
          doctest::Approx(1.0 - 3000.0 / (4000.0 * 4000.0)).epsilon(1e-10));
    // Large nu drives the first factor to one.
    CHECK(recovery_bound(40, 10, 50.0) ==
          doctest::Approx(1.0 - std::exp(-10.0 / 7.0)).epsilon(1e-10));

    CHECK_THROWS_AS(recovery_bound(10, 10, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(recovery_bound(10, 0, 1.0), std::invalid_argument);
}

TEST_CASE("all-pole filtering on the worked examples") {
    const FixedDenominatorFilter unity;
    VectorXd u(4);
    u << 1, -2, 3, 0.5;
    CHECK((filter_fixed_denominator(u, unity) - u).norm() == 0.0);
    CHECK((recover_input(u, unity) - u).norm() == 0.0);

    VectorXd denom(1);
    denom << -0.5;  // F = 1 / (1 - 0.5 q^-1)
    const FixedDenominatorFilter geometric(denom);
    VectorXd impulse = VectorXd::Zero(5);
    impulse[0] = 1.0;
    const VectorXd response = filter_fixed_denominator(impulse, geometric);
    for (int t = 0; t < 5; ++t) CHECK(response[t] == doctest::Approx(std::pow(0.5, t)));

    VectorXd u_prime(3);
    u_prime << 1, 0, 0;
    const VectorXd recovered = recover_input(u_prime, geometric);
    CHECK(recovered[0] == doctest::Approx(1.0));
    CHECK(recovered[1] == doctest::Approx(-0.5));
    CHECK(recovered[2] == doctest::Approx(0.0));
}

TEST_CASE("filtering matches the truncated-impulse-response convolution") {
    Rng rng(202);
    VectorXd denom(2);
    denom << -0.9, 0.4;  // stable complex pair
    const FixedDenominatorFilter f(denom, 1.3);
    const int n = 40;
    const VectorXd u = rng.normal_vector(n);

    VectorXd h(n);
    for (int t = 0; t < n; ++t) {
        double acc = t == 0 ? f.gain() : 0.0;
        if (t >= 1) acc -= denom[0] * h[t - 1];
        if (t >= 2) acc -= denom[1] * h[t - 2];
        h[t] = acc;
    }
    VectorXd convolved = VectorXd::Zero(n);
    for (int t = 0; t < n; ++t)
        for (int k = 0; k <= t; ++k) convolved[t] += h[k] * u[t - k];

    CHECK((filter_fixed_denominator(u, f) - convolved).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("filter and recover are exact inverses") {
    Rng rng(203);
    for (int trial = 0; trial < 30; ++trial) {
        const FixedDenominatorFilter f = random_stable_filter(rng);
        const VectorXd u = 2.0 * rng.normal_vector(25);
        const VectorXd round_trip = recover_input(filter_fixed_denominator(u, f), f);
        CHECK((round_trip - u).lpNorm<Eigen::Infinity>() < 1e-12);
    }
}

TEST_CASE("unstable denominators are rejected at construction") {
    VectorXd denom(1);
    denom << -1.05;
    CHECK_THROWS_AS(FixedDenominatorFilter{denom}, std::invalid_argument);
    VectorXd marginal(1);
    marginal << 1.0;  // pole on the unit circle
    CHECK_THROWS_AS(FixedDenominatorFilter{marginal}, std::invalid_argument);
    CHECK_THROWS_AS(FixedDenominatorFilter(VectorXd(), 0.0), std::invalid_argument);
}

TEST_CASE("regressor construction from a generator sequence") {
    // Impulse at t = 1 with n_theta = 2, N = 3: samples cover t = -1 ... 2.
    VectorXd u_prime(4);
    u_prime << 0, 0, 1, 0;
    const RegressorMatrix phi = build_regressor(u_prime, 2, 3);
    MatrixXd expected(3, 2);
    expected << 0, 0, 1, 0, 0, 1;
    CHECK((phi.matrix() - expected).norm() == 0.0);

    const RegressorMatrix ones = build_regressor(VectorXd::Ones(6), 2, 5);
    CHECK(ones.matrix().isOnes(0.0));
    CHECK(mutual_coherence(ones.matrix()) == doctest::Approx(1.0));

    CHECK_THROWS_WITH_AS(build_regressor(VectorXd::Ones(5), 2, 5), doctest::Contains("6"),
                         std::invalid_argument);
}

TEST_CASE("white-noise regressor has near-identity normalized Gram") {
    Rng rng(204);
    const int n = 10000, n_theta = 5;
    const VectorXd u = rng.normal_vector(n + n_theta - 1);
    const RegressorMatrix phi = build_regressor(u, n_theta, n);
    const MatrixXd gram = phi.matrix().transpose() * phi.matrix() / n;
    CHECK((gram - MatrixXd::Identity(n_theta, n_theta)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("regressor round-trips through its matrix and truncates") {
    Rng rng(205);
    const VectorXd gen = rng.normal_vector(8);
    const RegressorMatrix phi = RegressorMatrix::from_generator(gen, 5, 4);
    for (Eigen::Index i = 0; i + 1 < phi.rows(); ++i)
        for (Eigen::Index j = 0; j + 1 < phi.cols(); ++j)
            CHECK(phi.matrix()(i, j) == phi.matrix()(i + 1, j + 1));

    const RegressorMatrix rebuilt = RegressorMatrix::from_matrix(phi.matrix());
    CHECK((rebuilt.generator() - gen).norm() == 0.0);

    const RegressorMatrix top = phi.top_rows(3);
    CHECK((top.matrix() - phi.matrix().topRows(3)).norm() == 0.0);

    MatrixXd not_toeplitz = phi.matrix();
    not_toeplitz(2, 2) += 1.0;
    CHECK_THROWS_AS(RegressorMatrix::from_matrix(not_toeplitz), std::invalid_argument);
}

TEST_CASE("Fisher information of the linear regression") {
    VectorXd gen = VectorXd::Zero(4);
    gen[2] = 1.0;  // impulse: orthonormal columns
    const RegressorMatrix phi = RegressorMatrix::from_generator(gen, 3, 2);
    CHECK((fim(phi, 1.0) - MatrixXd::Identity(2, 2)).norm() < 1e-14);

    Rng rng(206);
    const RegressorMatrix random_phi = RegressorMatrix::from_generator(rng.normal_vector(9), 6, 4);
    const MatrixXd direct = random_phi.matrix().transpose() * random_phi.matrix() / 0.25;
    CHECK((fim(random_phi, 0.25) - direct).norm() < 1e-12);

    const RegressorMatrix scaled =
        RegressorMatrix::from_generator(2.0 * random_phi.generator(), 6, 4);
    CHECK((fim(scaled, 0.25) - 4.0 * direct).norm() < 1e-10);

    CHECK_THROWS_AS(fim(random_phi, 0.0), std::invalid_argument);
}

TEST_CASE("bandpass autocorrelation on the worked examples") {
    const SpectrumCoefficients white = bandpass_autocorrelation(0.0, M_PI, 2.5, 8);
    CHECK(white.autocorrelation()[0] == doctest::Approx(2.5));
    for (int k = 1; k < 8; ++k) CHECK(std::abs(white.autocorrelation()[k]) < 1e-12);

    const SpectrumCoefficients narrow = bandpass_autocorrelation(0.1, 0.3, 1.0, 50);
    CHECK(narrow.autocorrelation()[0] == doctest::Approx(0.2 / M_PI).epsilon(1e-12));
    CHECK(narrow.autocorrelation()[3] ==
          doctest::Approx((std::sin(0.9) - std::sin(0.3)) / (3.0 * M_PI)).epsilon(1e-12));

    for (int j : {16, 64}) {
        const SpectrumCoefficients r = bandpass_autocorrelation(0.1, 0.3, 1.0, j);
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(r.toeplitz(j), Eigen::EigenvaluesOnly);
        CHECK(eig.eigenvalues()[0] > -1e-8);
    }

    CHECK_THROWS_AS(bandpass_autocorrelation(0.3, 0.1, 1.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(bandpass_autocorrelation(0.1, 0.3, -1.0, 8), std::invalid_argument);
}

TEST_CASE("spectrum coefficients validate nonnegativity") {
    VectorXd bad(2);
    bad << 1.0, 2.0;  // Toeplitz eigenvalues {3, -1}
    CHECK_THROWS_AS(SpectrumCoefficients{bad}, NotPsdError);
}

TEST_CASE("gram target from a spectrum") {
    VectorXd white(4);
    white << 1.5, 0, 0, 0;
    const GramTarget t = gram_target_from_spectrum(SpectrumCoefficients(white), 3, 20);
    CHECK((t.matrix - 30.0 * MatrixXd::Identity(3, 3)).norm() < 1e-12);

    const GramTarget doubled = gram_target_from_spectrum(SpectrumCoefficients(white), 3, 40);
    CHECK((doubled.matrix - 2.0 * t.matrix).norm() < 1e-12);

    CHECK_THROWS_AS(gram_target_from_spectrum(SpectrumCoefficients(white), 5, 20),
                    std::invalid_argument);
}

TEST_CASE("gram target matches the realized process second moments") {
    const SpectrumCoefficients r = bandpass_autocorrelation(0.1, 0.3, 1.0, 50);
    const int n_theta = 4;
    const int n = 100000;
    const VectorXd u = realize_input_fdm(r, n, n_theta, 4242);
    const RegressorMatrix phi = build_regressor(u, n_theta, n);
    const MatrixXd sample = phi.matrix().transpose() * phi.matrix() / n;
    const MatrixXd expected = gram_target_from_spectrum(r, n_theta, n).matrix / n;
    CHECK((sample - expected).norm() / expected.norm() < 0.05);
}

TEST_CASE("realized inputs are seeded and reproducible") {
    const SpectrumCoefficients r = bandpass_autocorrelation(0.1, 0.3, 1.0, 50);
    const VectorXd a = realize_input_fdm(r, 200, 5, 99);
    const VectorXd b = realize_input_fdm(r, 200, 5, 99);
    CHECK((a - b).norm() == 0.0);
    const VectorXd c = realize_input_fdm(r, 200, 5, 100);
    CHECK((a - c).norm() > 0.0);
}

TEST_CASE("white realization reproduces the lag-zero autocorrelation") {
    VectorXd white(1);
    white << 2.0;
    const int n = 10000;
    const VectorXd u = realize_input_fdm(SpectrumCoefficients(white), n, 1, 7);
    const double r0_hat = u.squaredNorm() / n;
    CHECK(std::abs(r0_hat - 2.0) / 2.0 < 0.1);
}

TEST_CASE("narrowband realization is highly coherent at the paper scale") {
    const SpectrumCoefficients r = bandpass_autocorrelation(0.1, 0.3, 1.0, 50);
    const VectorXd u = realize_input_fdm(r, 100, 40, 31415);
    const RegressorMatrix phi = build_regressor(u, 40, 100);
    CHECK(mutual_coherence(phi.matrix()) >= 0.9);
}

TEST_CASE("gram target construction validates symmetry and positivity") {
    MatrixXd asym(2, 2);
    asym << 1, 0.5, -0.5, 1;
    CHECK_THROWS_AS(GramTarget(asym, 1.0), std::invalid_argument);
    MatrixXd indefinite(2, 2);
    indefinite << 1, 2, 2, 1;
    CHECK_THROWS_AS(GramTarget(indefinite, 1.0), NotPsdError);
    CHECK_THROWS_AS(GramTarget(MatrixXd::Identity(2, 2), 0.0), std::invalid_argument);
    const GramTarget t(2.0 * MatrixXd::Identity(2, 2), 0.5);
    CHECK((t.desired_fim() - 4.0 * MatrixXd::Identity(2, 2)).norm() < 1e-14);
}
