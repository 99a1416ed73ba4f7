#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "lcid/design.hpp"
#include "lcid/errors.hpp"
#include "lcid/estimators.hpp"
#include "lcid/sysid.hpp"

namespace lcid {

/// An estimated model is too close to zero on the frequency grid for the
/// model-reference controller to be evaluated.
class DegenerateModelError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Monte-Carlo study definition. Defaults are the desk-scale version of the
/// narrowband model-reference scenario; theta0 is generated from the seed
/// when left empty.
struct Scenario {
    int n_theta = 40;
    int n = 100;
    int s = 10;
    Eigen::VectorXd theta0;
    double eta = 0.1;
    std::vector<double> snr_list = {5.0, 15.0, 29.0};
    int mc_runs = 50;
    std::uint64_t seed = 1111;
    // Narrowband target over the crossover band, plus a small flat floor so
    // the implied information target stays positive definite.
    SpectrumCoefficients spectrum =
        add_white_floor(bandpass_autocorrelation(0.1, 0.3, 1.0, 50), 0.003);
    int grid_size = 2048;

    void validate() const;  // throws invalid_argument; requires theta0 set
};

/// Decaying random FIR coefficients on the leading support, rejection-sampled
/// until |G| stays above 5% of its grid maximum (controller well-posedness).
Eigen::VectorXd generate_theta0(int n_theta, int s, int grid_size, std::uint64_t seed);

/// Fills theta0 if empty, then validates.
Scenario finalize_scenario(Scenario scenario);

enum class Method {
    ls_aicc,
    ls_bic,
    omp_method,
    ladmm,
    fdm_known_sparsity,
    lcid_omp,
    lcid_ladmm,
    lcid_bic,
};

const std::vector<Method>& all_methods();
std::string method_name(Method m);
Method method_from_name(const std::string& name);
bool method_uses_design(Method m);

struct MetricsRecord {
    std::string method;
    double snr = 0.0;
    int run = 0;
    double nrmse = 0.0;
    double v_app = 0.0;
    double mu_phi = 0.0;
    double mu_h = 0.0;  // NaN when the method has no transformation
    double fim_fit_error = 0.0;
    double wall_time_s = 0.0;
    std::string status = "ok";
};

struct BenchOptions {
    std::vector<Method> methods = all_methods();
    int jobs = 1;
    bool per_run_cv = false;      // re-tune hyperparameters inside every run
    bool per_run_design = false;  // re-run the input design inside every run
    DesignConfig design;
    CvProtocol cv;
};

/// Noise variance giving the requested SNR (dB) for the signal Phi theta0:
/// sigma^2 = ||Phi theta0||^2 / (N 10^(snr/10)).
double snr_to_sigma2(double snr_db, const RegressorMatrix& phi, const Eigen::VectorXd& theta0);

/// Desired closed-loop sensitivity (1 - z) / (1 - (1-eta)/(1+eta) z) at
/// z = e^{-i omega}.
std::complex<double> desired_sensitivity(double eta, double omega);

/// Performance degradation cost: half the squared H2 norm of the relative
/// mismatch between the achieved and desired sensitivities, by trapezoidal
/// quadrature on grid_size frequencies in (0, pi].
double v_app(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta0, double eta,
             int grid_size);

double nrmse(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta0);

/// Runs every (method, snr, run) cell. Per-run seeds derive from
/// (scenario.seed, snr, run); the input design and hyperparameter tuning are
/// shared across runs at fixed snr unless the per-run flags are set. Records
/// come back in (snr, run, method) order regardless of the jobs count;
/// failed runs carry an error tag in `status` instead of aborting the sweep.
std::vector<MetricsRecord> run_benchmark(const Scenario& scenario, const BenchOptions& options);

struct SummaryRow {
    std::string method;
    double snr = 0.0;
    double mean_nrmse = 0.0;
    double se_nrmse = 0.0;
    double mean_vapp = 0.0;
    double se_vapp = 0.0;
    int failures = 0;
};

/// Per-(method, snr) means and standard errors over the successful runs,
/// ordered by method name then snr.
std::vector<SummaryRow> aggregate(const std::vector<MetricsRecord>& records);

/// Scenario JSON (snake_case keys, unknown keys rejected).
Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text);

/// Results CSV, schema
/// method,snr,run,nrmse,v_app,mu_phi,mu_h,fim_fit_error,wall_time_s,status.
void write_records_csv(const std::string& path, const std::vector<MetricsRecord>& records);

/// Summary CSV, schema method,snr,mean_nrmse,se_nrmse,mean_vapp,se_vapp,failures.
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);

}  // namespace lcid
