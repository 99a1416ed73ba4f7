#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "lcid/proxops.hpp"
#include "lcid/regressor.hpp"
#include "lcid/sysid.hpp"

namespace lcid {

/// Penalties and schedules for the joint input / coordinate-transformation
/// design. lambda weighs the coherence penalty, lambda_prime the Gram-fit
/// penalty; the coupling weight varsigma starts at sigma0 and shrinks by
/// `decay` every outer iteration.
struct DesignConfig {
    double lambda = 2000.0;
    double lambda_prime = 1e-7;
    double sigma0 = 1.0;
    double decay = 0.97;
    PsdFloor psd_floor{1e-10};
    int max_outer_iters = 300;
    int inner_iters = 3;
    double stop_tol = 1e-8;

    void validate() const;
};

struct DesignTraceRow {
    int iter = 0;
    double varsigma = 0.0;
    double objective = 0.0;
    double mu_h = 0.0;
    double mu_phi = 0.0;
    double fim_fit_error = 0.0;       // ||Phi^T Phi - T||_F / sqrt(N n_theta)
    double constraint_residual = 0.0; // ||N^c + I - H^T H||_F
    double step2_increase = 0.0;      // largest observed inner-round objective increase
    double step3_increase = 0.0;
};

struct DesignDiagnostics {
    std::vector<DesignTraceRow> trace;
    double h_condition = 0.0;
    int iterations = 0;
    bool converged = false;
    int step2_violations = 0;
    int step3_violations = 0;
};

struct DesignResult {
    RegressorMatrix phi;
    Eigen::MatrixXd h;
    DesignDiagnostics diagnostics;
    Eigen::MatrixXd gram_target;
};

/// The design ended with a numerically singular transformation.
class DegenerateDesignError : public std::runtime_error {
public:
    DegenerateDesignError(const std::string& what, DesignDiagnostics diagnostics);
    const DesignDiagnostics& diagnostics() const { return diagnostics_; }

private:
    DesignDiagnostics diagnostics_;
};

/// Coherence step: proximal mapping of the elementwise max-norm of
/// H^T H - I (through the l1-ball projection with radius lambda * varsigma),
/// followed by the eigenvalue-floor correction keeping N + I >= epsilon.
SymMatrix step_update_n(const Eigen::MatrixXd& h, double lambda, double varsigma,
                        const PsdFloor& floor);

struct HUpdate {
    Eigen::MatrixXd h;
    Eigen::MatrixXd u_opt;
    Eigen::MatrixXd q_opt;
    std::vector<double> objectives;  // relaxed objective after each inner round
};

/// Transformation step: `inner` rounds of the closed-form H update,
/// column normalization, and Procrustes refresh of the semi-unitary
/// factors. Pass the factors carried over from the previous outer
/// iteration; omitting them starts from identity-padded factors.
HUpdate step_update_h(const RegressorMatrix& phi, const SymMatrix& n_c, double varsigma, int inner,
                      const Eigen::MatrixXd& u_prev, const Eigen::MatrixXd& q_prev);
HUpdate step_update_h(const RegressorMatrix& phi, const SymMatrix& n_c, double varsigma, int inner);

struct PhiUpdate {
    RegressorMatrix phi;
    Eigen::MatrixXd u_opt;
    Eigen::MatrixXd z_opt;
    std::vector<double> objectives;
};

/// Regressor step: `inner` rounds of the per-diagonal closed-form Toeplitz
/// update against the two targets Z T^(1/2) (weight 1) and U H (weight
/// lambda_prime), each followed by the Procrustes refresh of Z and U.
PhiUpdate step_update_phi(const Eigen::MatrixXd& h, const GramTarget& gram_target,
                          double lambda_prime, int inner, const Eigen::MatrixXd& prev_z,
                          const Eigen::MatrixXd& prev_u);

/// Full alternating design loop. h_init columns are normalized if needed;
/// phi_init must have full column rank. Throws DegenerateDesignError if the
/// final transformation has condition number above 1e12.
DesignResult run_lcid(const DesignConfig& config, const GramTarget& gram_target,
                      const RegressorMatrix& phi_init, const Eigen::MatrixXd& h_init);

/// Same, with the default initialization: h = I and phi = the Toeplitz
/// least-squares fit of the row-padded orthogonal factor of T^(1/2).
DesignResult run_lcid(const DesignConfig& config, const GramTarget& gram_target,
                      Eigen::Index n_rows);

/// The default regressor initialization used by the overload above.
RegressorMatrix default_phi_init(const GramTarget& gram_target, Eigen::Index n_rows);

struct TransformedLs {
    Eigen::VectorXd x_hat;       // estimate of x = H theta
    Eigen::MatrixXd noise_cov;   // H (Phi^T Phi)^-1 H^T; caller scales by sigma^2
};

/// Least-squares estimate in the transformed coordinates x = H theta.
TransformedLs transformed_ls(const RegressorMatrix& phi, const Eigen::MatrixXd& h,
                             const Eigen::VectorXd& y);

/// Penalized design objective
///   ||H (Phi^T Phi)^-1 H^T - I||_F^2 + lambda' ||Phi^T Phi - T||_F^2
///   + lambda ||N||_max + 1/(2 varsigma) ||N + I - H^T H||_F^2,
/// evaluated for the diagnostics trace. Returns +inf when Phi^T Phi is
/// numerically singular.
double design_objective(const RegressorMatrix& phi, const Eigen::MatrixXd& h, const SymMatrix& n_c,
                        const GramTarget& gram_target, const DesignConfig& config, double varsigma);

}  // namespace lcid
