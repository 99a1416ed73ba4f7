#include "cli_commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "lcid/matrix_io.hpp"
#include "lcid/plot.hpp"
#include "json.hpp"

namespace lcid::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

SpectrumCoefficients spectrum_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open spectrum file " + path);
    json obj = json::parse(in, nullptr, true);
    // Reuse the scenario spectrum schema by wrapping it.
    json wrapper = {{"spectrum", obj}};
    return scenario_from_json_text(wrapper.dump()).spectrum;
}

void write_trace_csv(const std::string& path, const DesignDiagnostics& diag) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "iter,objective,mu_h,mu_phi,fim_fit_error,constraint_residual\n";
    for (const auto& row : diag.trace)
        out << row.iter << "," << format_double(row.objective) << "," << format_double(row.mu_h)
            << "," << format_double(row.mu_phi) << "," << format_double(row.fim_fit_error) << ","
            << format_double(row.constraint_residual) << "\n";
    if (!out) throw std::runtime_error("write failed for " + path);
}

int input_error(const std::string& message) {
    std::cerr << "error: " << message << "\n";
    return kExitInputError;
}

}  // namespace

int cmd_design(const DesignOptions& options) {
    try {
        if (options.gram_target_csv.empty() == options.spectrum_json.empty())
            throw std::invalid_argument(
                "provide exactly one of --gram-target <csv> or --spectrum <json>");
        if (options.n < 1) throw std::invalid_argument("--n (number of rows N) is required");

        Eigen::MatrixXd t;
        if (!options.gram_target_csv.empty()) {
            t = read_matrix_csv(options.gram_target_csv);
        } else {
            if (options.n_theta < 1)
                throw std::invalid_argument("--n-theta is required with a spectrum input");
            t = gram_target_from_spectrum(spectrum_from_file(options.spectrum_json),
                                          options.n_theta, options.n)
                    .matrix;
        }
        const GramTarget gram_target(t, 1.0);

        const RegressorMatrix phi_init =
            options.phi_init_csv.empty()
                ? default_phi_init(gram_target, options.n)
                : RegressorMatrix::from_matrix(read_matrix_csv(options.phi_init_csv));
        const Eigen::MatrixXd h_init = options.h_init_csv.empty()
                                           ? Eigen::MatrixXd::Identity(t.rows(), t.cols())
                                           : read_matrix_csv(options.h_init_csv);
        DesignResult result = run_lcid(options.config, gram_target, phi_init, h_init);

        ensure_out_dir(options.out_dir);
        write_matrix_csv(join(options.out_dir, "phi.csv"), result.phi.matrix());
        write_matrix_csv(join(options.out_dir, "h.csv"), result.h);
        write_trace_csv(join(options.out_dir, "trace.csv"), result.diagnostics);

        const DesignTraceRow& last = result.diagnostics.trace.back();
        json summary = {
            {"n", result.phi.rows()},
            {"n_theta", result.phi.cols()},
            {"lambda", options.config.lambda},
            {"lambda_prime", options.config.lambda_prime},
            {"sigma0", options.config.sigma0},
            {"decay", options.config.decay},
            {"psd_floor", options.config.psd_floor.epsilon},
            {"max_outer_iters", options.config.max_outer_iters},
            {"inner_iters", options.config.inner_iters},
            {"stop_tol", options.config.stop_tol},
            {"iterations", result.diagnostics.iterations},
            {"converged", result.diagnostics.converged},
            {"h_condition", result.diagnostics.h_condition},
            {"step2_violations", result.diagnostics.step2_violations},
            {"step3_violations", result.diagnostics.step3_violations},
            {"mu_h", last.mu_h},
            {"mu_phi", last.mu_phi},
            {"fim_fit_error", last.fim_fit_error},
            {"constraint_residual", last.constraint_residual},
        };
        std::ofstream summary_out(join(options.out_dir, "design.json"));
        summary_out << summary.dump(2) << "\n";
        if (!summary_out) throw std::runtime_error("write failed for design.json");

        std::cout << "design: " << result.phi.rows() << "x" << result.phi.cols() << " in "
                  << result.diagnostics.iterations << " iterations, mu_h = " << last.mu_h
                  << ", mu_phi = " << last.mu_phi << ", fim_fit_error = " << last.fim_fit_error
                  << "\n";
        return kExitOk;
    } catch (const DegenerateDesignError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerateDesign;
    } catch (const std::exception& e) {
        return input_error(e.what());
    }
}

int cmd_coherence(const CoherenceOptions& options) {
    try {
        const Eigen::MatrixXd m = read_matrix_csv(options.matrix_csv);
        const double mu = mutual_coherence(m);
        const double bound = 1.0 / (3.0 * options.s);
        const bool ok = coherence_condition(m, options.s);
        std::cout << "mu = " << format_double(mu) << "\n"
                  << "bound 1/(3s) = " << format_double(bound) << " (s = " << options.s << ")\n"
                  << "condition mu < 1/(3s): " << (ok ? "true" : "false") << "\n"
                  << "recovery probability bound (nu = " << options.nu
                  << "): " << format_double(recovery_bound(static_cast<int>(m.cols()), options.s,
                                                           options.nu))
                  << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        return input_error(e.what());
    }
}

int cmd_estimate(const EstimateOptions& options) {
    try {
        if (options.phi_csv.empty() || options.y_csv.empty())
            throw std::invalid_argument("--phi and --y are required");
        const RegressorMatrix phi = RegressorMatrix::from_matrix(read_matrix_csv(options.phi_csv));
        const Eigen::VectorXd y = read_vector_csv(options.y_csv);
        if (y.size() != phi.rows())
            throw std::invalid_argument("y has " + std::to_string(y.size()) + " rows but phi has " +
                                        std::to_string(phi.rows()));
        const int n_theta = static_cast<int>(phi.cols());
        const int k_max = options.k_max > 0 ? options.k_max : n_theta;

        const bool needs_h = options.method.rfind("lcid-", 0) == 0;
        Eigen::MatrixXd h;
        if (needs_h) {
            if (options.h_csv.empty())
                throw std::invalid_argument("method " + options.method + " requires --h <csv>");
            h = read_matrix_csv(options.h_csv);
        }

        auto tuned_lambda = [&](const CvFit& fit) {
            if (options.lambda >= 0.0) return options.lambda;
            return cross_validate(fit, phi.matrix(), y, options.cv);
        };

        SparseEstimate est;
        if (options.method == "omp") {
            if (options.s < 1) throw std::invalid_argument("method omp requires --s >= 1");
            est = omp(phi.matrix(), y, options.s);
        } else if (options.method == "ladmm") {
            const double lambda = tuned_lambda(
                [](const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double l) {
                    return ladmm_lasso(a, b, l);
                });
            est.theta = ladmm_lasso(phi.matrix(), y, lambda);
            for (Eigen::Index i = 0; i < est.theta.size(); ++i)
                if (est.theta[i] != 0.0) est.support.push_back(static_cast<int>(i));
            est.sparsity = static_cast<int>(est.support.size());
        } else if (options.method == "ls-aicc") {
            est = order_select_ls(phi, y, OrderCriterion::aicc, k_max);
        } else if (options.method == "ls-bic") {
            est = order_select_ls(phi, y, OrderCriterion::bic, k_max);
        } else if (options.method == "lcid-omp") {
            if (options.s < 1) throw std::invalid_argument("method lcid-omp requires --s >= 1");
            const TransformedLs tls = transformed_ls(phi, h, y);
            est = lcid_estimate(tls.x_hat, h, phi, y, LcidEstimateMode::fixed(options.s));
        } else if (options.method == "lcid-bic") {
            const TransformedLs tls = transformed_ls(phi, h, y);
            est = lcid_estimate(tls.x_hat, h, phi, y, LcidEstimateMode::order_bic(k_max));
        } else if (options.method == "lcid-aicc") {
            const TransformedLs tls = transformed_ls(phi, h, y);
            est = lcid_estimate(tls.x_hat, h, phi, y, LcidEstimateMode::order_aicc(k_max));
        } else if (options.method == "lcid-ladmm") {
            const TransformedLs tls = transformed_ls(phi, h, y);
            const double lambda = tuned_lambda(
                [&h](const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double l) {
                    const RegressorMatrix phi_tr = RegressorMatrix::from_matrix(a);
                    const TransformedLs t = transformed_ls(phi_tr, h, b);
                    const Eigen::VectorXd sparse = ladmm_lasso(h, t.x_hat, l);
                    std::vector<int> support;
                    for (Eigen::Index i = 0; i < sparse.size(); ++i)
                        if (sparse[i] != 0.0) support.push_back(static_cast<int>(i));
                    if (support.empty()) return Eigen::VectorXd::Zero(a.cols()).eval();
                    return ls_refit(phi_tr, b, support).theta;
                });
            const Eigen::VectorXd sparse = ladmm_lasso(h, tls.x_hat, lambda);
            std::vector<int> support;
            for (Eigen::Index i = 0; i < sparse.size(); ++i)
                if (sparse[i] != 0.0) support.push_back(static_cast<int>(i));
            if (support.empty()) throw std::invalid_argument("lcid-ladmm: lasso support is empty");
            est = ls_refit(phi, y, support);
        } else {
            throw std::invalid_argument("unknown method '" + options.method + "'");
        }

        ensure_out_dir(options.out_dir);
        write_vector_csv(join(options.out_dir, "theta.csv"), est.theta);
        json support_json = {{"support", est.support},
                             {"sparsity", est.sparsity},
                             {"rank_warning", est.rank_warning}};
        std::ofstream support_out(join(options.out_dir, "support.json"));
        support_out << support_json.dump(2) << "\n";
        if (!support_out) throw std::runtime_error("write failed for support.json");
        std::cout << "estimate: method " << options.method << ", sparsity " << est.sparsity
                  << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        return input_error(e.what());
    }
}

int cmd_bench(const BenchOptionsCli& options) {
    try {
        Scenario scenario = options.scenario;
        if (!options.scenario_json.empty()) scenario = load_scenario(options.scenario_json);
        scenario = finalize_scenario(scenario);

        const std::vector<MetricsRecord> records = run_benchmark(scenario, options.options);
        ensure_out_dir(options.out_dir);
        write_records_csv(join(options.out_dir, "records.csv"), records);
        const std::vector<SummaryRow> summary = aggregate(records);
        write_summary_csv(join(options.out_dir, "summary.csv"), summary);

        if (options.plots) {
            std::map<std::string, PlotSeries> nrmse_series, vapp_series;
            for (const auto& row : summary) {
                auto& ns = nrmse_series[row.method];
                ns.label = row.method;
                ns.x.push_back(row.snr);
                ns.y.push_back(row.mean_nrmse);
                auto& vs = vapp_series[row.method];
                vs.label = row.method;
                vs.x.push_back(row.snr);
                vs.y.push_back(row.mean_vapp);
            }
            std::vector<PlotSeries> ns, vs;
            for (auto& [name, s] : nrmse_series) ns.push_back(std::move(s));
            for (auto& [name, s] : vapp_series) vs.push_back(std::move(s));
            write_svg_line_chart(join(options.out_dir, "nrmse.svg"), "Mean NRMSE vs SNR",
                                 "SNR (dB)", "mean NRMSE", ns, /*log_y=*/true);
            write_svg_line_chart(join(options.out_dir, "vapp.svg"),
                                 "Mean performance degradation vs SNR", "SNR (dB)", "mean V_app",
                                 vs, /*log_y=*/true);
        }

        const bool all_failed =
            std::all_of(records.begin(), records.end(),
                        [](const MetricsRecord& r) { return r.status != "ok"; });
        std::cout << "bench: " << records.size() << " records, "
                  << std::count_if(records.begin(), records.end(),
                                   [](const MetricsRecord& r) { return r.status != "ok"; })
                  << " failures\n";
        return all_failed ? kExitAllRunsFailed : kExitOk;
    } catch (const std::exception& e) {
        return input_error(e.what());
    }
}

int cmd_spectrum(const SpectrumOptions& options) {
    try {
        const SpectrumCoefficients r =
            bandpass_autocorrelation(options.w1, options.w2, options.power, options.order);
        json obj = {{"type", "autocorrelation"},
                    {"r", std::vector<double>(r.autocorrelation().data(),
                                              r.autocorrelation().data() + r.order())}};
        if (options.out.empty()) {
            std::cout << obj.dump(2) << "\n";
        } else {
            std::ofstream out(options.out);
            out << obj.dump(2) << "\n";
            if (!out) throw std::runtime_error("write failed for " + options.out);
        }
        return kExitOk;
    } catch (const std::exception& e) {
        return input_error(e.what());
    }
}

}  // namespace lcid::cli
