#include "lcid/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <thread>

#include "lcid/rng.hpp"

namespace lcid {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::complex<double> fir_response(const Eigen::VectorXd& theta, std::complex<double> z) {
    // G(z) = theta_1 z + theta_2 z^2 + ... with z = e^{-i omega}
    std::complex<double> acc(0.0, 0.0);
    for (Eigen::Index k = theta.size() - 1; k >= 0; --k) acc = (acc + theta[k]) * z;
    return acc;
}

std::uint64_t run_seed(std::uint64_t master, double snr, int run) {
    std::uint64_t snr_bits;
    static_assert(sizeof(snr_bits) == sizeof(snr));
    std::memcpy(&snr_bits, &snr, sizeof(snr));
    return mix_seed(mix_seed(master, snr_bits), static_cast<std::uint64_t>(run));
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<int> leading_support(int s) {
    std::vector<int> out(static_cast<size_t>(s));
    for (int i = 0; i < s; ++i) out[static_cast<size_t>(i)] = i;
    return out;
}

std::vector<int> nonzero_support(const Eigen::VectorXd& v) {
    std::vector<int> out;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v[i] != 0.0) out.push_back(static_cast<int>(i));
    return out;
}

std::string failure_tag(const std::exception& e) {
    if (dynamic_cast<const DegenerateModelError*>(&e)) return "degenerate_model";
    if (dynamic_cast<const RankDeficiencyError*>(&e)) return "rank_deficient";
    if (dynamic_cast<const NotPsdError*>(&e)) return "not_psd";
    if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_input";
    return "error";
}

// Everything shared by the runs of one SNR level.
struct SnrContext {
    double snr = 0.0;
    const RegressorMatrix* phi_design = nullptr;
    const Eigen::MatrixXd* h_design = nullptr;
    double lambda_ladmm = 0.0;
    double lambda_lcid_ladmm = 0.0;
};

struct RunData {
    RegressorMatrix phi_fdm;
    Eigen::VectorXd white_noise;  // shared standard-normal draw, length N
};

RunData make_run_data(const Scenario& scenario, double snr, int run) {
    const std::uint64_t seed = run_seed(scenario.seed, snr, run);
    RunData data{build_regressor(realize_input_fdm(scenario.spectrum, scenario.n,
                                                   scenario.n_theta, mix_seed(seed, 1)),
                                 scenario.n_theta, scenario.n),
                 Rng(mix_seed(seed, 2)).normal_vector(scenario.n)};
    return data;
}

Eigen::VectorXd observations(const RegressorMatrix& phi, const Eigen::VectorXd& theta0,
                             double snr, const Eigen::VectorXd& white_noise) {
    const double sigma = std::sqrt(snr_to_sigma2(snr, phi, theta0));
    return phi.matrix() * theta0 + sigma * white_noise;
}

CvFit lasso_cv_fit() {
    return [](const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double lambda) {
        return ladmm_lasso(a, y, lambda);
    };
}

CvFit lcid_ladmm_cv_fit(const Eigen::MatrixXd& h) {
    return [&h](const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double lambda) {
        const RegressorMatrix phi = RegressorMatrix::from_matrix(a);
        const TransformedLs tls = transformed_ls(phi, h, y);
        return ladmm_lasso(h, tls.x_hat, lambda);
    };
}

SparseEstimate estimate_for_method(Method m, const Scenario& scenario, const SnrContext& ctx,
                                   const RunData& data, const Eigen::VectorXd& y_fdm,
                                   const Eigen::VectorXd& y_design) {
    switch (m) {
        case Method::ls_aicc:
            return order_select_ls(data.phi_fdm, y_fdm, OrderCriterion::aicc, scenario.n_theta);
        case Method::ls_bic:
            return order_select_ls(data.phi_fdm, y_fdm, OrderCriterion::bic, scenario.n_theta);
        case Method::omp_method:
            return omp(data.phi_fdm.matrix(), y_fdm, scenario.s);
        case Method::ladmm: {
            SparseEstimate est;
            est.theta = ladmm_lasso(data.phi_fdm.matrix(), y_fdm, ctx.lambda_ladmm);
            est.support = nonzero_support(est.theta);
            est.sparsity = static_cast<int>(est.support.size());
            return est;
        }
        case Method::fdm_known_sparsity:
            return ls_refit(data.phi_fdm, y_fdm, leading_support(scenario.s));
        case Method::lcid_omp: {
            const TransformedLs tls = transformed_ls(*ctx.phi_design, *ctx.h_design, y_design);
            return lcid_estimate(tls.x_hat, *ctx.h_design, *ctx.phi_design, y_design,
                                 LcidEstimateMode::fixed(scenario.s));
        }
        case Method::lcid_bic: {
            const TransformedLs tls = transformed_ls(*ctx.phi_design, *ctx.h_design, y_design);
            return lcid_estimate(tls.x_hat, *ctx.h_design, *ctx.phi_design, y_design,
                                 LcidEstimateMode::order_bic());
        }
        case Method::lcid_ladmm: {
            // The lasso on the transformed model estimates theta directly
            // (x = H theta), so its solution is the estimate; no refit.
            const TransformedLs tls = transformed_ls(*ctx.phi_design, *ctx.h_design, y_design);
            SparseEstimate est;
            est.theta = ladmm_lasso(*ctx.h_design, tls.x_hat, ctx.lambda_lcid_ladmm);
            est.support = nonzero_support(est.theta);
            est.sparsity = static_cast<int>(est.support.size());
            return est;
        }
    }
    throw std::logic_error("unknown method");
}

}  // namespace

void Scenario::validate() const {
    if (n_theta < 2) throw std::invalid_argument("scenario: n_theta must be >= 2");
    if (n < n_theta) throw std::invalid_argument("scenario: need n >= n_theta");
    if (s < 1 || s > n_theta) throw std::invalid_argument("scenario: need 1 <= s <= n_theta");
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("scenario: eta must be in [0, 1]");
    if (snr_list.empty()) throw std::invalid_argument("scenario: snr_list is empty");
    if (mc_runs < 1) throw std::invalid_argument("scenario: mc_runs must be >= 1");
    if (grid_size < 2) throw std::invalid_argument("scenario: grid_size must be >= 2");
    if (spectrum.order() < n_theta)
        throw std::invalid_argument("scenario: spectrum order must be >= n_theta");
    if (theta0.size() != n_theta)
        throw std::invalid_argument("scenario: theta0 must have n_theta entries");
    for (int k = 0; k < n_theta; ++k) {
        const bool leading = k < s;
        if (leading && theta0[k] == 0.0)
            throw std::invalid_argument("scenario: theta0 must be nonzero on its leading s entries");
        if (!leading && theta0[k] != 0.0)
            throw std::invalid_argument("scenario: theta0 must be zero beyond its leading s entries");
    }
    for (int i = 1; i <= grid_size; ++i) {
        const double omega = M_PI * i / grid_size;
        if (std::abs(fir_response(theta0, std::exp(std::complex<double>(0.0, -omega)))) < 1e-12)
            throw std::invalid_argument("scenario: G(theta0) vanishes on the evaluation grid");
    }
}

Eigen::VectorXd generate_theta0(int n_theta, int s, int grid_size, std::uint64_t seed) {
    if (s < 1 || s > n_theta) throw std::invalid_argument("generate_theta0: need 1 <= s <= n_theta");
    Rng rng(mix_seed(seed, 0x7468657461ULL));
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Eigen::VectorXd theta = Eigen::VectorXd::Zero(n_theta);
        for (int k = 0; k < s; ++k) theta[k] = std::pow(0.9, k + 1) * rng.normal();
        double min_mag = std::numeric_limits<double>::infinity();
        double max_mag = 0.0;
        for (int i = 1; i <= grid_size; ++i) {
            const double omega = M_PI * i / grid_size;
            const double mag =
                std::abs(fir_response(theta, std::exp(std::complex<double>(0.0, -omega))));
            min_mag = std::min(min_mag, mag);
            max_mag = std::max(max_mag, mag);
        }
        if (min_mag > 0.05 * max_mag) return theta;
    }
    throw NumericError("generate_theta0: rejection sampling did not terminate");
}

Scenario finalize_scenario(Scenario scenario) {
    if (scenario.theta0.size() == 0)
        scenario.theta0 =
            generate_theta0(scenario.n_theta, scenario.s, scenario.grid_size, scenario.seed);
    scenario.validate();
    return scenario;
}

const std::vector<Method>& all_methods() {
    static const std::vector<Method> methods = {
        Method::ls_aicc,   Method::ls_bic,     Method::omp_method, Method::ladmm,
        Method::fdm_known_sparsity, Method::lcid_omp, Method::lcid_ladmm, Method::lcid_bic};
    return methods;
}

std::string method_name(Method m) {
    switch (m) {
        case Method::ls_aicc: return "LS-AICc";
        case Method::ls_bic: return "LS-BIC";
        case Method::omp_method: return "OMP";
        case Method::ladmm: return "LADMM";
        case Method::fdm_known_sparsity: return "FDM-KnownSparsity";
        case Method::lcid_omp: return "LCID-OMP";
        case Method::lcid_ladmm: return "LCID-LADMM";
        case Method::lcid_bic: return "LCID-BIC";
    }
    throw std::logic_error("unknown method");
}

Method method_from_name(const std::string& name) {
    for (Method m : all_methods())
        if (method_name(m) == name) return m;
    throw std::invalid_argument("unknown method '" + name + "'");
}

bool method_uses_design(Method m) {
    return m == Method::lcid_omp || m == Method::lcid_ladmm || m == Method::lcid_bic;
}

double snr_to_sigma2(double snr_db, const RegressorMatrix& phi, const Eigen::VectorXd& theta0) {
    if (theta0.size() != phi.cols())
        throw std::invalid_argument("snr_to_sigma2: theta0 has wrong length");
    const double signal = (phi.matrix() * theta0).squaredNorm();
    if (!(signal > 0.0)) throw std::invalid_argument("snr_to_sigma2: Phi theta0 is zero");
    return signal / (phi.rows() * std::pow(10.0, snr_db / 10.0));
}

std::complex<double> desired_sensitivity(double eta, double omega) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("desired_sensitivity: eta must be in [0, 1]");
    const std::complex<double> z = std::exp(std::complex<double>(0.0, -omega));
    const double pole = (1.0 - eta) / (1.0 + eta);
    return (1.0 - z) / (1.0 - pole * z);
}

double v_app(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta0, double eta,
             int grid_size) {
    if (grid_size < 2) throw std::invalid_argument("v_app: grid_size must be >= 2");
    if (theta_hat.size() != theta0.size())
        throw std::invalid_argument("v_app: parameter vectors differ in length");
    const Eigen::VectorXd delta = theta_hat - theta0;
    const double step = M_PI / grid_size;
    double sum = 0.0;
    for (int i = 1; i <= grid_size; ++i) {
        const double omega = step * i;
        const std::complex<double> z = std::exp(std::complex<double>(0.0, -omega));
        const std::complex<double> s = desired_sensitivity(eta, omega);
        const std::complex<double> g_hat = fir_response(theta_hat, z);
        if (std::abs(g_hat) < 1e-12)
            throw DegenerateModelError("v_app: estimated model magnitude " +
                                       std::to_string(std::abs(g_hat)) + " at omega = " +
                                       std::to_string(omega));
        const std::complex<double> g0 = fir_response(theta0, z);
        const std::complex<double> g_diff = fir_response(delta, z);
        // (S(G_hat) - S) / S with S(G_hat) = 1 / (1 + G0 C(G_hat)) reduces to
        // (1 - S) (G_hat - G0) / (G_hat S (1 + W)); the difference form keeps
        // the integrand exactly zero when theta_hat == theta0.
        const std::complex<double> a = (1.0 - s) / s;
        const std::complex<double> w = (g0 / g_hat) * a;
        const std::complex<double> ratio = a * g_diff / (g_hat * (1.0 + w));
        const double weight = (i == 1 || i == grid_size) ? 0.5 * step : step;
        sum += weight * std::norm(ratio);
    }
    return 0.5 * sum / M_PI;
}

double nrmse(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta0) {
    if (theta_hat.size() != theta0.size())
        throw std::invalid_argument("nrmse: parameter vectors differ in length");
    const double denom = theta0.norm();
    if (!(denom > 0.0)) throw std::invalid_argument("nrmse: theta0 is zero");
    return (theta0 - theta_hat).norm() / denom;
}

std::vector<MetricsRecord> run_benchmark(const Scenario& scenario_in, const BenchOptions& options) {
    const Scenario scenario = finalize_scenario(scenario_in);
    if (options.methods.empty()) throw std::invalid_argument("run_benchmark: no methods");
    if (options.jobs < 1) throw std::invalid_argument("run_benchmark: jobs must be >= 1");

    const bool need_design =
        std::any_of(options.methods.begin(), options.methods.end(), method_uses_design);
    const bool need_ladmm_cv =
        std::count(options.methods.begin(), options.methods.end(), Method::ladmm) > 0;
    const bool need_lcid_ladmm_cv =
        std::count(options.methods.begin(), options.methods.end(), Method::lcid_ladmm) > 0;

    const size_t n_methods = options.methods.size();
    const size_t n_snr = scenario.snr_list.size();
    const size_t n_runs = static_cast<size_t>(scenario.mc_runs);
    std::vector<MetricsRecord> records(n_snr * n_runs * n_methods);

    const GramTarget gram_target =
        gram_target_from_spectrum(scenario.spectrum, scenario.n_theta, scenario.n);

    for (size_t si = 0; si < n_snr; ++si) {
        const double snr = scenario.snr_list[si];
        SnrContext ctx;
        ctx.snr = snr;

        // The design problem has no noise input, so one design serves every
        // run of this SNR level unless per-run designs were requested.
        std::optional<DesignResult> design;
        if (need_design && !options.per_run_design) {
            design = run_lcid(options.design, gram_target, scenario.n);
            ctx.phi_design = &design->phi;
            ctx.h_design = &design->h;
        }

        // Hyperparameters are tuned once per (method, snr) on the run-0 data.
        if ((need_ladmm_cv || need_lcid_ladmm_cv) && !options.per_run_cv) {
            const RunData first = make_run_data(scenario, snr, 0);
            if (need_ladmm_cv) {
                const Eigen::VectorXd y0 = observations(first.phi_fdm, scenario.theta0, snr,
                                                        first.white_noise);
                ctx.lambda_ladmm =
                    cross_validate(lasso_cv_fit(), first.phi_fdm.matrix(), y0, options.cv);
            }
            if (need_lcid_ladmm_cv && ctx.phi_design) {
                const Eigen::VectorXd y0 = observations(*ctx.phi_design, scenario.theta0, snr,
                                                        first.white_noise);
                ctx.lambda_lcid_ladmm = cross_validate(lcid_ladmm_cv_fit(*ctx.h_design),
                                                       ctx.phi_design->matrix(), y0, options.cv);
            }
        }

        auto evaluate_run = [&](int run) {
            RunData data = make_run_data(scenario, snr, run);

            std::optional<DesignResult> run_design;
            SnrContext run_ctx = ctx;
            if (need_design && options.per_run_design) {
                run_design = run_lcid(options.design, gram_target, scenario.n);
                run_ctx.phi_design = &run_design->phi;
                run_ctx.h_design = &run_design->h;
            }
            if (options.per_run_cv) {
                if (need_ladmm_cv) {
                    const Eigen::VectorXd y0 = observations(data.phi_fdm, scenario.theta0, snr,
                                                            data.white_noise);
                    run_ctx.lambda_ladmm =
                        cross_validate(lasso_cv_fit(), data.phi_fdm.matrix(), y0, options.cv);
                }
                if (need_lcid_ladmm_cv && run_ctx.phi_design) {
                    const Eigen::VectorXd y0 = observations(*run_ctx.phi_design, scenario.theta0,
                                                            snr, data.white_noise);
                    run_ctx.lambda_lcid_ladmm =
                        cross_validate(lcid_ladmm_cv_fit(*run_ctx.h_design),
                                       run_ctx.phi_design->matrix(), y0, options.cv);
                }
            }

            const Eigen::VectorXd y_fdm =
                observations(data.phi_fdm, scenario.theta0, snr, data.white_noise);
            Eigen::VectorXd y_design;
            if (run_ctx.phi_design)
                y_design = observations(*run_ctx.phi_design, scenario.theta0, snr,
                                        data.white_noise);

            for (size_t mi = 0; mi < n_methods; ++mi) {
                const Method m = options.methods[mi];
                MetricsRecord rec;
                rec.method = method_name(m);
                rec.snr = snr;
                rec.run = run;
                const auto start = std::chrono::steady_clock::now();
                try {
                    const SparseEstimate est = estimate_for_method(m, scenario, run_ctx, data,
                                                                   y_fdm, y_design);
                    rec.wall_time_s = elapsed_s(start);
                    rec.nrmse = nrmse(est.theta, scenario.theta0);
                    rec.v_app = v_app(est.theta, scenario.theta0, scenario.eta,
                                      scenario.grid_size);
                    const RegressorMatrix& phi_used =
                        method_uses_design(m) ? *run_ctx.phi_design : data.phi_fdm;
                    rec.mu_phi = mutual_coherence(phi_used.matrix());
                    rec.mu_h = method_uses_design(m) ? mutual_coherence(*run_ctx.h_design) : kNan;
                    rec.fim_fit_error =
                        (phi_used.matrix().transpose() * phi_used.matrix() -
                         gram_target.matrix).norm() /
                        std::sqrt(static_cast<double>(scenario.n) * scenario.n_theta);
                } catch (const std::exception& e) {
                    rec.wall_time_s = elapsed_s(start);
                    rec.nrmse = kNan;
                    rec.v_app = kNan;
                    rec.mu_phi = kNan;
                    rec.mu_h = kNan;
                    rec.fim_fit_error = kNan;
                    rec.status = failure_tag(e);
                }
                records[(si * n_runs + static_cast<size_t>(run)) * n_methods + mi] =
                    std::move(rec);
            }
        };

        if (options.jobs == 1) {
            for (int run = 0; run < scenario.mc_runs; ++run) evaluate_run(run);
        } else {
            std::atomic<int> next{0};
            const int workers = std::min(options.jobs, scenario.mc_runs);
            std::vector<std::thread> pool;
            pool.reserve(static_cast<size_t>(workers));
            for (int w = 0; w < workers; ++w)
                pool.emplace_back([&]() {
                    for (int run = next.fetch_add(1); run < scenario.mc_runs;
                         run = next.fetch_add(1))
                        evaluate_run(run);
                });
            for (auto& t : pool) t.join();
        }
    }
    return records;
}

std::vector<SummaryRow> aggregate(const std::vector<MetricsRecord>& records) {
    if (records.empty()) throw std::invalid_argument("aggregate: no records");
    struct Key {
        std::string method;
        double snr;
        bool operator<(const Key& other) const {
            if (method != other.method) return method < other.method;
            return snr < other.snr;
        }
    };
    struct Accum {
        std::vector<double> nrmse, vapp;
        int failures = 0;
    };
    std::map<Key, Accum> groups;
    for (const auto& rec : records) {
        Accum& acc = groups[Key{rec.method, rec.snr}];
        if (rec.status == "ok") {
            acc.nrmse.push_back(rec.nrmse);
            acc.vapp.push_back(rec.v_app);
        } else {
            ++acc.failures;
        }
    }

    auto mean_se = [](const std::vector<double>& xs, double& mean, double& se) {
        if (xs.empty()) {
            mean = kNan;
            se = kNan;
            return;
        }
        mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        if (xs.size() < 2) {
            se = 0.0;
            return;
        }
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var /= static_cast<double>(xs.size() - 1);
        se = std::sqrt(var / static_cast<double>(xs.size()));
    };

    std::vector<SummaryRow> rows;
    rows.reserve(groups.size());
    for (const auto& [key, acc] : groups) {
        SummaryRow row;
        row.method = key.method;
        row.snr = key.snr;
        mean_se(acc.nrmse, row.mean_nrmse, row.se_nrmse);
        mean_se(acc.vapp, row.mean_vapp, row.se_vapp);
        row.failures = acc.failures;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace lcid
