#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lcid/bench.hpp"
#include "lcid/rng.hpp"
#include "oracles.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace lcid;

namespace {

Scenario small_scenario() {
    Scenario sc;
    sc.n_theta = 12;
    sc.n = 40;
    sc.s = 4;
    sc.snr_list = {10.0};
    sc.mc_runs = 6;
    sc.seed = 777;
    sc.spectrum = add_white_floor(bandpass_autocorrelation(0.2, 0.8, 1.0, 16), 0.02);
    sc.grid_size = 256;
    return sc;
}

bool records_equal_ignoring_time(const std::vector<MetricsRecord>& a,
                                 const std::vector<MetricsRecord>& b) {
    if (a.size() != b.size()) return false;
    auto same = [](double x, double y) {
        return (std::isnan(x) && std::isnan(y)) || x == y;
    };
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].method != b[i].method || a[i].snr != b[i].snr || a[i].run != b[i].run ||
            a[i].status != b[i].status)
            return false;
        if (!same(a[i].nrmse, b[i].nrmse) || !same(a[i].v_app, b[i].v_app) ||
            !same(a[i].mu_phi, b[i].mu_phi) || !same(a[i].mu_h, b[i].mu_h) ||
            !same(a[i].fim_fit_error, b[i].fim_fit_error))
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("noise variance hits the requested signal-to-noise ratio") {
    Rng rng(501);
    const RegressorMatrix phi =
        RegressorMatrix::from_generator(rng.normal_vector(12), 10, 3);
    const VectorXd theta0 = rng.normal_vector(3);
    const double signal = (phi.matrix() * theta0).squaredNorm();

    CHECK(snr_to_sigma2(0.0, phi, theta0) == doctest::Approx(signal / 10.0).epsilon(1e-12));
    CHECK(snr_to_sigma2(10.0, phi, theta0) ==
          doctest::Approx(signal / 100.0).epsilon(1e-12));

    // Seeded realizations land within 1 dB of the target on average at N=100.
    const RegressorMatrix wide = RegressorMatrix::from_generator(rng.normal_vector(104), 100, 5);
    const VectorXd t5 = rng.normal_vector(5);
    const double sigma2 = snr_to_sigma2(12.0, wide, t5);
    const double s2 = (wide.matrix() * t5).squaredNorm();
    double db_sum = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        const VectorXd e = std::sqrt(sigma2) * rng.normal_vector(100);
        db_sum += 10.0 * std::log10(s2 / e.squaredNorm());
    }
    CHECK(std::abs(db_sum / 100.0 - 12.0) < 1.0);
}

TEST_CASE("desired sensitivity on the worked examples") {
    CHECK(std::abs(desired_sensitivity(0.3, 0.0)) == 0.0);

    const double omega = 1.234;
    const std::complex<double> z = std::exp(std::complex<double>(0.0, -omega));
    CHECK(std::abs(desired_sensitivity(1.0, omega) - (1.0 - z)) < 1e-14);

    CHECK(std::abs(desired_sensitivity(0.1, M_PI)) == doctest::Approx(1.1).epsilon(1e-12));
    CHECK_THROWS_AS(desired_sensitivity(1.5, 1.0), std::invalid_argument);
}

TEST_CASE("performance degradation cost vanishes exactly at the truth") {
    Rng rng(502);
    for (int trial = 0; trial < 5; ++trial) {
        const VectorXd theta0 = generate_theta0(12, 5, 256, 1000 + trial);
        CHECK(v_app(theta0, theta0, 0.1, 256) == 0.0);
    }
}

TEST_CASE("performance degradation cost converges in the grid size") {
    const VectorXd theta0 = generate_theta0(10, 4, 512, 503);
    Rng rng(1503);
    VectorXd direction = rng.normal_vector(10);
    VectorXd theta_hat = theta0 + (1e-3 * theta0.norm() / direction.norm()) * direction;
    const double coarse = v_app(theta_hat, theta0, 0.1, 512);
    const double fine = v_app(theta_hat, theta0, 0.1, 4096);
    CHECK(std::abs(coarse - fine) / fine < 0.01);
}

TEST_CASE("performance degradation cost is locally quadratic in the mismatch") {
    const VectorXd theta0 = generate_theta0(10, 4, 512, 504);
    Rng rng(505);
    VectorXd direction = rng.normal_vector(10);
    direction *= 1e-4 / direction.norm();
    const double once = v_app(theta0 + direction, theta0, 0.1, 1024);
    const double twice = v_app(theta0 + 2.0 * direction, theta0, 0.1, 1024);
    CHECK(twice / once == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("performance degradation cost rejects vanishing models") {
    VectorXd theta0 = VectorXd::Zero(6);
    theta0[0] = 1.0;
    VectorXd dead = VectorXd::Zero(6);  // G identically zero
    CHECK_THROWS_AS(v_app(dead, theta0, 0.1, 128), DegenerateModelError);
}

TEST_CASE("normalized parameter error on the worked examples") {
    Rng rng(506);
    const VectorXd theta0 = rng.normal_vector(7);
    CHECK(nrmse(theta0, theta0) == 0.0);
    CHECK(nrmse(VectorXd::Zero(7), theta0) == doctest::Approx(1.0));
    CHECK(nrmse(2.0 * theta0, theta0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(nrmse(theta0, VectorXd::Zero(7)), std::invalid_argument);
}

TEST_CASE("generated parameters have the leading support and a usable response") {
    const VectorXd theta0 = generate_theta0(20, 6, 512, 507);
    for (int k = 0; k < 6; ++k) CHECK(theta0[k] != 0.0);
    for (int k = 6; k < 20; ++k) CHECK(theta0[k] == 0.0);

    double min_mag = 1e300, max_mag = 0.0;
    for (int i = 1; i <= 512; ++i) {
        const double omega = M_PI * i / 512;
        std::complex<double> g(0.0, 0.0);
        const std::complex<double> z = std::exp(std::complex<double>(0.0, -omega));
        std::complex<double> zk(1.0, 0.0);
        for (int k = 0; k < 20; ++k) {
            zk *= z;
            g += theta0[k] * zk;
        }
        min_mag = std::min(min_mag, std::abs(g));
        max_mag = std::max(max_mag, std::abs(g));
    }
    CHECK(min_mag > 0.05 * max_mag);

    CHECK((generate_theta0(20, 6, 512, 507) - theta0).norm() == 0.0);
    CHECK((generate_theta0(20, 6, 512, 508) - theta0).norm() > 0.0);
}

TEST_CASE("scenario validation rejects inconsistent definitions") {
    Scenario sc = small_scenario();
    sc = finalize_scenario(sc);
    CHECK_NOTHROW(sc.validate());

    Scenario bad = sc;
    bad.mc_runs = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = sc;
    bad.theta0[0] = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = sc;
    bad.theta0[sc.s] = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = sc;
    bad.n = sc.n_theta - 1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("oracle refit is exact at a 200 dB surrogate for noiseless data") {
    Scenario sc = small_scenario();
    sc.snr_list = {200.0};
    sc.mc_runs = 1;
    BenchOptions opt;
    opt.methods = {Method::fdm_known_sparsity};
    const auto records = run_benchmark(sc, opt);
    REQUIRE(records.size() == 1);
    CHECK(records[0].status == "ok");
    CHECK(records[0].nrmse <= 1e-6);
}

TEST_CASE("benchmark reproduces the designed-versus-realized ordering") {
    Scenario sc;  // desk-scale narrowband scenario, reduced run count
    sc.mc_runs = 15;
    sc.snr_list = {5.0, 15.0};
    BenchOptions opt;
    opt.methods = {Method::omp_method, Method::lcid_omp, Method::fdm_known_sparsity};
    opt.jobs = 2;
    const auto records = run_benchmark(sc, opt);

    double lcid15 = 0, omp15 = 0, lcid5 = 0, oracle5 = 0;
    int count15 = 0, count5 = 0;
    for (const auto& rec : records) {
        REQUIRE(rec.status == "ok");
        if (rec.method == "LCID-OMP") {
            // transformed coordinates are less coherent than the regressor
            CHECK(rec.mu_h < rec.mu_phi);
        }
        if (rec.snr == 15.0) {
            if (rec.method == "LCID-OMP") { lcid15 += rec.nrmse; ++count15; }
            if (rec.method == "OMP") omp15 += rec.nrmse;
        } else {
            if (rec.method == "LCID-OMP") { lcid5 += rec.nrmse; ++count5; }
            if (rec.method == "FDM-KnownSparsity") oracle5 += rec.nrmse;
        }
    }
    REQUIRE(count15 == 15);
    CHECK(lcid15 / count15 < omp15 / count15);
    // The oracle comparison at low SNR is reported, not required: it held in
    // the reference study but depends on the exact information target.
    WARN(lcid5 / count5 < oracle5 / count5);
}

TEST_CASE("benchmark records are identical for any worker count") {
    Scenario sc = small_scenario();
    BenchOptions serial;
    serial.methods = {Method::ls_bic, Method::ladmm, Method::lcid_omp};
    serial.jobs = 1;
    BenchOptions parallel = serial;
    parallel.jobs = 4;
    const auto a = run_benchmark(sc, serial);
    const auto b = run_benchmark(sc, parallel);
    CHECK(records_equal_ignoring_time(a, b));

    const auto again = run_benchmark(sc, serial);
    CHECK(records_equal_ignoring_time(a, again));
}

TEST_CASE("failed runs are tagged and the sweep continues") {
    Scenario sc = small_scenario();
    sc.mc_runs = 3;
    BenchOptions opt;
    opt.methods = {Method::ladmm};
    opt.cv.grid_min = 1e5;  // absurd penalty grid: lasso returns zero, v_app degenerates
    opt.cv.grid_max = 1e6;
    opt.cv.grid_size = 2;
    const auto records = run_benchmark(sc, opt);
    REQUIRE(records.size() == 3);
    for (const auto& rec : records) {
        CHECK(rec.status == "degenerate_model");
        CHECK(std::isnan(rec.nrmse));
    }
}

TEST_CASE("aggregation computes means, standard errors and failures") {
    MetricsRecord r1{"OMP", 5.0, 0, 1.0, 0.1, 0.9, NAN, 0.1, 0.01, "ok"};
    MetricsRecord r2{"OMP", 5.0, 1, 3.0, 0.3, 0.9, NAN, 0.1, 0.01, "ok"};
    MetricsRecord r3{"OMP", 5.0, 2, NAN, NAN, NAN, NAN, NAN, 0.01, "rank_deficient"};
    MetricsRecord r4{"LS-BIC", 5.0, 0, 2.0, 0.2, 0.9, NAN, 0.1, 0.01, "ok"};

    const auto rows = aggregate({r1, r2, r3, r4});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].method == "LS-BIC");  // ordered by method name then snr
    CHECK(rows[0].mean_nrmse == doctest::Approx(2.0));
    CHECK(rows[0].se_nrmse == 0.0);
    CHECK(rows[1].method == "OMP");
    CHECK(rows[1].mean_nrmse == doctest::Approx(2.0));
    CHECK(rows[1].se_nrmse == doctest::Approx(1.0));
    CHECK(rows[1].failures == 1);

    const auto permuted = aggregate({r4, r3, r2, r1});
    REQUIRE(permuted.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(permuted[i].method == rows[i].method);
        CHECK(permuted[i].mean_nrmse == rows[i].mean_nrmse);
        CHECK(permuted[i].se_nrmse == rows[i].se_nrmse);
    }
}

TEST_CASE("scenario json round trip and validation") {
    const std::string text = R"({
        "n_theta": 12, "n": 40, "s": 4, "eta": 0.2,
        "snr_list": [5, 15], "mc_runs": 7, "seed": 99,
        "spectrum": {"type": "bandpass", "w1": 0.2, "w2": 0.8, "power": 1.0, "order": 16,
                     "floor": 0.02},
        "grid_size": 256
    })";
    const Scenario sc = scenario_from_json_text(text);
    CHECK(sc.n_theta == 12);
    CHECK(sc.mc_runs == 7);
    CHECK(sc.seed == 99);
    CHECK(sc.snr_list == std::vector<double>{5.0, 15.0});
    CHECK(sc.spectrum.order() == 16);

    CHECK_THROWS_WITH_AS(scenario_from_json_text(R"({"bogus": 1})"),
                         doctest::Contains("unknown key"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(scenario_from_json_text(R"({"spectrum": {"type": "bandpass", "w3": 1}})"),
                         doctest::Contains("unknown key"), std::invalid_argument);
    CHECK_THROWS_AS(scenario_from_json_text("{nope"), std::invalid_argument);

    const std::string with_theta = R"({"n_theta": 4, "n": 10, "s": 2,
        "theta0": [0.5, -0.25, 0, 0],
        "spectrum": {"type": "autocorrelation", "r": [1, 0, 0, 0]},
        "mc_runs": 2, "grid_size": 64})";
    const Scenario explicit_theta = finalize_scenario(scenario_from_json_text(with_theta));
    CHECK(explicit_theta.theta0[0] == 0.5);
    CHECK(explicit_theta.theta0[3] == 0.0);
}

TEST_CASE("records and summary files follow the documented schema") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "lcid_bench_io_test";
    fs::create_directories(dir);

    MetricsRecord ok{"OMP", 5.0, 0, 0.5, 0.125, 0.9, NAN, 0.1, 0.015625, "ok"};
    MetricsRecord failed{"OMP", 5.0, 1, NAN, NAN, NAN, NAN, NAN, 0.5, "rank_deficient"};
    write_records_csv((dir / "records.csv").string(), {ok, failed});

    std::ifstream in(dir / "records.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "method,snr,run,nrmse,v_app,mu_phi,mu_h,fim_fit_error,wall_time_s,status");
    std::getline(in, line);
    CHECK(line == "OMP,5,0,0.5,0.125,0.90000000000000002,,0.10000000000000001,0.015625,ok");
    std::getline(in, line);
    CHECK(line == "OMP,5,1,,,,,,0.5,rank_deficient");

    write_summary_csv((dir / "summary.csv").string(), aggregate({ok, failed}));
    std::ifstream sum(dir / "summary.csv");
    std::getline(sum, line);
    CHECK(line == "method,snr,mean_nrmse,se_nrmse,mean_vapp,se_vapp,failures");
    std::getline(sum, line);
    CHECK(line == "OMP,5,0.5,0,0.125,0,1");

    fs::remove_all(dir);
}
