#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "lcid/regressor.hpp"

namespace lcid {

struct SparseEstimate {
    Eigen::VectorXd theta;          // exactly zero outside the support
    std::vector<int> support;       // ascending indices (0-based)
    int sparsity = 0;               // |support|
    bool rank_warning = false;      // greedy selection stopped early
};

/// Orthogonal matching pursuit: s rounds of selecting the column with the
/// largest normalized residual correlation, refitting by least squares on
/// the selected set each round. A rank-deficient selection stops early and
/// sets rank_warning.
SparseEstimate omp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int s);

/// Greedy selection order of omp run to depth s (prefixes of this order are
/// exactly the omp supports for smaller sparsity levels).
std::vector<int> omp_selection_path(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int s,
                                    bool* truncated = nullptr);

/// Lasso 1/2 ||a theta - b||^2 + lambda ||theta||_1 via ADMM splitting.
/// Returns the soft-threshold iterate, so entries are exactly zero.
Eigen::VectorXd ladmm_lasso(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double lambda,
                            double rho = 1.0, int max_iters = 2000, double tol = 1e-8);

/// Least squares restricted to the given support columns of the original
/// regressor; zero elsewhere.
SparseEstimate ls_refit(const RegressorMatrix& phi, const Eigen::VectorXd& y,
                        const std::vector<int>& support);

enum class OrderCriterion { aicc, bic };

/// Model-order selection: least squares on the leading k columns for
/// k = 1..k_max, scored by AICc or BIC on the residual sum of squares.
SparseEstimate order_select_ls(const RegressorMatrix& phi, const Eigen::VectorXd& y,
                               OrderCriterion criterion, int k_max);

struct LcidEstimateMode {
    enum class Kind { fixed_s, order_bic, order_aicc } kind = Kind::fixed_s;
    int s = 0;      // fixed_s sparsity
    int k_max = 0;  // order modes; 0 means n_theta

    static LcidEstimateMode fixed(int s) { return {Kind::fixed_s, s, 0}; }
    static LcidEstimateMode order_bic(int k_max = 0) { return {Kind::order_bic, 0, k_max}; }
    static LcidEstimateMode order_aicc(int k_max = 0) { return {Kind::order_aicc, 0, k_max}; }
};

/// Final estimation stage for a designed (phi, h): support from omp on the
/// transformed estimate x_hat against the dictionary h, parameters refit on
/// the original regressor. Order modes score the omp candidate supports by
/// the chosen criterion on the original-domain residuals.
SparseEstimate lcid_estimate(const Eigen::VectorXd& x_hat, const Eigen::MatrixXd& h,
                             const RegressorMatrix& phi, const Eigen::VectorXd& y,
                             const LcidEstimateMode& mode);

/// Support-recovery probability lower bound for l1 estimation with a
/// coherence-qualified regressor:
/// (1 - (n_theta - s) / n_theta^{1+nu}) * (1 - exp(-s/7)).
double recovery_bound(int n_theta, int s, double nu);

struct CvProtocol {
    double train_fraction = 0.8;
    int grid_size = 200;
    double grid_min = 1e-5;
    double grid_max = 10.0;
};

using CvFit = std::function<Eigen::VectorXd(const Eigen::MatrixXd& a_train,
                                            const Eigen::VectorXd& y_train, double hyper)>;

/// Single chronological train/validation split; fits the estimator on the
/// training rows for each point of the log-spaced hyperparameter grid and
/// returns the value with the smallest validation residual (ties go to the
/// smallest value).
double cross_validate(const CvFit& fit, const Eigen::MatrixXd& phi, const Eigen::VectorXd& y,
                      const CvProtocol& protocol);

}  // namespace lcid
