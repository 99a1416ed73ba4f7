#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lcid/bench.hpp"
#include "lcid/design.hpp"
#include "lcid/estimators.hpp"
#include "lcid/proxops.hpp"
#include "lcid/sysid.hpp"

namespace py = pybind11;
using namespace lcid;

namespace {

FactorOrientation orientation_from_string(const std::string& name) {
    if (name == "transpose_of_input") return FactorOrientation::transpose_of_input;
    if (name == "same_as_input") return FactorOrientation::same_as_input;
    throw std::invalid_argument("orientation must be 'transpose_of_input' or 'same_as_input'");
}

Eigen::MatrixXd trace_matrix(const DesignDiagnostics& diag) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(diag.trace.size()), 9);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const DesignTraceRow& row = diag.trace[static_cast<size_t>(i)];
        m.row(i) << row.iter, row.varsigma, row.objective, row.mu_h, row.mu_phi,
            row.fim_fit_error, row.constraint_residual, row.step2_increase, row.step3_increase;
    }
    return m;
}

py::dict record_to_dict(const MetricsRecord& rec) {
    py::dict d;
    d["method"] = rec.method;
    d["snr"] = rec.snr;
    d["run"] = rec.run;
    d["nrmse"] = rec.nrmse;
    d["v_app"] = rec.v_app;
    d["mu_phi"] = rec.mu_phi;
    d["mu_h"] = rec.mu_h;
    d["fim_fit_error"] = rec.fim_fit_error;
    d["wall_time_s"] = rec.wall_time_s;
    d["status"] = rec.status;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Low-coherence input design for sparse system identification";

    // ---- projection / factorization kernels
    m.def("project_l1_ball", &project_l1_ball, py::arg("v"), py::arg("radius"),
          "Euclidean projection onto the l1 ball.");
    m.def("prox_inf_norm", &prox_inf_norm, py::arg("v"), py::arg("eta"),
          "Proximal mapping of eta * max-norm via the Moreau decomposition.");
    m.def(
        "nearest_psd",
        [](const Eigen::MatrixXd& m_in, double epsilon) {
            return nearest_psd(SymMatrix(m_in), PsdFloor(epsilon)).mat();
        },
        py::arg("m"), py::arg("epsilon") = 1e-10,
        "Nearest matrix with eigenvalues at or above the floor.");
    m.def(
        "psd_sqrt", [](const Eigen::MatrixXd& m_in) { return psd_sqrt(SymMatrix(m_in)); },
        py::arg("m"), "Symmetric square root of a PSD matrix.");
    m.def(
        "orthogonal_factor",
        [](const Eigen::MatrixXd& p, const std::string& orientation) {
            return orthogonal_factor(p, orientation_from_string(orientation));
        },
        py::arg("p"), py::arg("orientation") = "transpose_of_input",
        "Semi-unitary Procrustes factor of a product matrix.");
    m.def(
        "toeplitz_ls_fit",
        [](const std::vector<std::pair<Eigen::MatrixXd, double>>& targets) {
            std::vector<ToeplitzTarget> converted;
            converted.reserve(targets.size());
            for (const auto& [matrix, weight] : targets) converted.push_back({matrix, weight});
            const ToeplitzFit fit = toeplitz_ls_fit(converted);
            return std::make_pair(fit.coeffs, fit.matrix.matrix());
        },
        py::arg("targets"),
        "Weighted Toeplitz least-squares fit; returns (diagonal coefficients, matrix).");

    // ---- model structure and spectra
    m.def("mutual_coherence", &mutual_coherence, py::arg("a"));
    m.def("coherence_condition", &coherence_condition, py::arg("a"), py::arg("s"));
    m.def("recovery_bound", &recovery_bound, py::arg("n_theta"), py::arg("s"), py::arg("nu"));
    m.def(
        "filter_fixed_denominator",
        [](const Eigen::VectorXd& u, const Eigen::VectorXd& denominator, double gain) {
            return filter_fixed_denominator(u, FixedDenominatorFilter(denominator, gain));
        },
        py::arg("u"), py::arg("denominator"), py::arg("gain") = 1.0,
        "Apply the all-pole filter gain / (1 + a_1 q^-1 + ...).");
    m.def(
        "recover_input",
        [](const Eigen::VectorXd& u_prime, const Eigen::VectorXd& denominator, double gain) {
            return recover_input(u_prime, FixedDenominatorFilter(denominator, gain));
        },
        py::arg("u_prime"), py::arg("denominator"), py::arg("gain") = 1.0,
        "Invert the all-pole filter exactly.");
    m.def(
        "build_regressor",
        [](const Eigen::VectorXd& u_prime, int n_theta, int n) {
            return build_regressor(u_prime, n_theta, n).matrix();
        },
        py::arg("u_prime"), py::arg("n_theta"), py::arg("n"),
        "Toeplitz regressor from n + n_theta - 1 input samples.");
    m.def(
        "fim",
        [](const Eigen::MatrixXd& phi, double sigma2) {
            return fim(RegressorMatrix::from_matrix(phi), sigma2);
        },
        py::arg("phi"), py::arg("sigma2") = 1.0);
    m.def(
        "bandpass_autocorrelation",
        [](double w1, double w2, double power, int order) {
            return Eigen::VectorXd(
                bandpass_autocorrelation(w1, w2, power, order).autocorrelation());
        },
        py::arg("w1"), py::arg("w2"), py::arg("power") = 1.0, py::arg("order") = 50);
    m.def(
        "add_white_floor",
        [](const Eigen::VectorXd& r, double power) {
            return Eigen::VectorXd(
                add_white_floor(SpectrumCoefficients(r), power).autocorrelation());
        },
        py::arg("r"), py::arg("power"));
    m.def(
        "gram_target_from_spectrum",
        [](const Eigen::VectorXd& r, int n_theta, int n) {
            return gram_target_from_spectrum(SpectrumCoefficients(r), n_theta, n).matrix;
        },
        py::arg("r"), py::arg("n_theta"), py::arg("n"));
    m.def(
        "realize_input_fdm",
        [](const Eigen::VectorXd& r, int n, int n_theta, std::uint64_t seed) {
            return realize_input_fdm(SpectrumCoefficients(r), n, n_theta, seed);
        },
        py::arg("r"), py::arg("n"), py::arg("n_theta"), py::arg("seed"),
        "Seeded realization of a process with the given autocorrelation.");

    // ---- joint design
    py::class_<DesignResult>(m, "DesignResult")
        .def_property_readonly("phi", [](const DesignResult& r) { return r.phi.matrix(); })
        .def_readonly("h", &DesignResult::h)
        .def_readonly("gram_target", &DesignResult::gram_target)
        .def_property_readonly("iterations",
                               [](const DesignResult& r) { return r.diagnostics.iterations; })
        .def_property_readonly("converged",
                               [](const DesignResult& r) { return r.diagnostics.converged; })
        .def_property_readonly("h_condition",
                               [](const DesignResult& r) { return r.diagnostics.h_condition; })
        .def_property_readonly(
            "mu_h", [](const DesignResult& r) { return r.diagnostics.trace.back().mu_h; })
        .def_property_readonly(
            "mu_phi", [](const DesignResult& r) { return r.diagnostics.trace.back().mu_phi; })
        .def_property_readonly(
            "fim_fit_error",
            [](const DesignResult& r) { return r.diagnostics.trace.back().fim_fit_error; })
        .def_property_readonly(
            "trace", [](const DesignResult& r) { return trace_matrix(r.diagnostics); },
            "Columns: iter, varsigma, objective, mu_h, mu_phi, fim_fit_error, "
            "constraint_residual, step2_increase, step3_increase.");

    m.def(
        "run_lcid",
        [](const Eigen::MatrixXd& gram_target, int n, double lambda_, double lambda_prime,
           double sigma0, double decay, double psd_floor, int max_outer_iters, int inner_iters,
           double stop_tol) {
            DesignConfig config;
            config.lambda = lambda_;
            config.lambda_prime = lambda_prime;
            config.sigma0 = sigma0;
            config.decay = decay;
            config.psd_floor = PsdFloor(psd_floor);
            config.max_outer_iters = max_outer_iters;
            config.inner_iters = inner_iters;
            config.stop_tol = stop_tol;
            return run_lcid(config, GramTarget(gram_target, 1.0), n);
        },
        py::arg("gram_target"), py::arg("n"), py::arg("lambda_") = DesignConfig{}.lambda,
        py::arg("lambda_prime") = DesignConfig{}.lambda_prime, py::arg("sigma0") = 1.0,
        py::arg("decay") = 0.97, py::arg("psd_floor") = 1e-10, py::arg("max_outer_iters") = 300,
        py::arg("inner_iters") = 3, py::arg("stop_tol") = 1e-8,
        "Alternating joint design of a Toeplitz regressor and a low-coherence "
        "coordinate transformation.");

    m.def(
        "transformed_ls",
        [](const Eigen::MatrixXd& phi, const Eigen::MatrixXd& h, const Eigen::VectorXd& y) {
            const TransformedLs out = transformed_ls(RegressorMatrix::from_matrix(phi), h, y);
            return std::make_pair(out.x_hat, out.noise_cov);
        },
        py::arg("phi"), py::arg("h"), py::arg("y"),
        "Least squares in the transformed coordinates; returns (x_hat, noise shape).");

    // ---- sparse estimation
    py::class_<SparseEstimate>(m, "SparseEstimate")
        .def_readonly("theta", &SparseEstimate::theta)
        .def_readonly("support", &SparseEstimate::support)
        .def_readonly("sparsity", &SparseEstimate::sparsity)
        .def_readonly("rank_warning", &SparseEstimate::rank_warning);

    m.def("omp", &omp, py::arg("a"), py::arg("b"), py::arg("s"),
          "Orthogonal matching pursuit with per-round least-squares refits.");
    m.def("ladmm_lasso", &ladmm_lasso, py::arg("a"), py::arg("b"), py::arg("lambda_"),
          py::arg("rho") = 1.0, py::arg("max_iters") = 2000, py::arg("tol") = 1e-8);
    m.def(
        "ls_refit",
        [](const Eigen::MatrixXd& phi, const Eigen::VectorXd& y, const std::vector<int>& support) {
            return ls_refit(RegressorMatrix::from_matrix(phi), y, support);
        },
        py::arg("phi"), py::arg("y"), py::arg("support"));
    m.def(
        "order_select_ls",
        [](const Eigen::MatrixXd& phi, const Eigen::VectorXd& y, const std::string& criterion,
           int k_max) {
            OrderCriterion c;
            if (criterion == "aicc")
                c = OrderCriterion::aicc;
            else if (criterion == "bic")
                c = OrderCriterion::bic;
            else
                throw std::invalid_argument("criterion must be 'aicc' or 'bic'");
            return order_select_ls(RegressorMatrix::from_matrix(phi), y, c,
                                   k_max > 0 ? k_max : static_cast<int>(phi.cols()));
        },
        py::arg("phi"), py::arg("y"), py::arg("criterion"), py::arg("k_max") = 0);
    m.def(
        "lcid_estimate",
        [](const Eigen::VectorXd& x_hat, const Eigen::MatrixXd& h, const Eigen::MatrixXd& phi,
           const Eigen::VectorXd& y, const std::string& mode, int s, int k_max) {
            LcidEstimateMode parsed;
            if (mode == "fixed-s")
                parsed = LcidEstimateMode::fixed(s);
            else if (mode == "order-bic")
                parsed = LcidEstimateMode::order_bic(k_max);
            else if (mode == "order-aicc")
                parsed = LcidEstimateMode::order_aicc(k_max);
            else
                throw std::invalid_argument(
                    "mode must be 'fixed-s', 'order-bic' or 'order-aicc'");
            return lcid_estimate(x_hat, h, RegressorMatrix::from_matrix(phi), y, parsed);
        },
        py::arg("x_hat"), py::arg("h"), py::arg("phi"), py::arg("y"), py::arg("mode") = "fixed-s",
        py::arg("s") = 0, py::arg("k_max") = 0,
        "Support from omp on the transformed estimate, parameters refit on phi.");
    m.def(
        "cross_validate",
        [](const CvFit& fit, const Eigen::MatrixXd& phi, const Eigen::VectorXd& y,
           double train_fraction, int grid_size, double grid_min, double grid_max) {
            CvProtocol protocol;
            protocol.train_fraction = train_fraction;
            protocol.grid_size = grid_size;
            protocol.grid_min = grid_min;
            protocol.grid_max = grid_max;
            return cross_validate(fit, phi, y, protocol);
        },
        py::arg("fit"), py::arg("phi"), py::arg("y"), py::arg("train_fraction") = 0.8,
        py::arg("grid_size") = 200, py::arg("grid_min") = 1e-5, py::arg("grid_max") = 10.0,
        "Chronological-split hyperparameter selection over a log-spaced grid.");

    // ---- benchmark metrics and sweep
    m.def(
        "snr_to_sigma2",
        [](double snr_db, const Eigen::MatrixXd& phi, const Eigen::VectorXd& theta0) {
            return snr_to_sigma2(snr_db, RegressorMatrix::from_matrix(phi), theta0);
        },
        py::arg("snr_db"), py::arg("phi"), py::arg("theta0"));
    m.def("desired_sensitivity", &desired_sensitivity, py::arg("eta"), py::arg("omega"));
    m.def("v_app", &v_app, py::arg("theta_hat"), py::arg("theta0"), py::arg("eta") = 0.1,
          py::arg("grid_size") = 2048);
    m.def("nrmse", &nrmse, py::arg("theta_hat"), py::arg("theta0"));
    m.def("generate_theta0", &generate_theta0, py::arg("n_theta"), py::arg("s"),
          py::arg("grid_size"), py::arg("seed"));
    m.def(
        "run_benchmark",
        [](const std::string& scenario_json, const std::vector<std::string>& methods, int jobs,
           bool per_run_cv, bool per_run_design) {
            const Scenario scenario = scenario_from_json_text(scenario_json);
            BenchOptions options;
            if (!methods.empty()) {
                options.methods.clear();
                for (const auto& name : methods)
                    options.methods.push_back(method_from_name(name));
            }
            options.jobs = jobs;
            options.per_run_cv = per_run_cv;
            options.per_run_design = per_run_design;
            const auto records = run_benchmark(scenario, options);
            py::list out;
            for (const auto& rec : records) out.append(record_to_dict(rec));
            return out;
        },
        py::arg("scenario_json"), py::arg("methods") = std::vector<std::string>{},
        py::arg("jobs") = 1, py::arg("per_run_cv") = false, py::arg("per_run_design") = false,
        "Monte-Carlo estimator comparison; scenario given as a JSON string.");
}
