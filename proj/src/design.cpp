#include "lcid/design.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lcid/errors.hpp"

namespace lcid {

namespace {

constexpr double kDegenerateCondition = 1e12;

// Trace-only coherence: NaN instead of throwing on a transiently zero column.
double coherence_or_nan(const Eigen::MatrixXd& a) {
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        if (a.col(j).norm() == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return mutual_coherence(a);
}

void normalize_columns(Eigen::MatrixXd& h) {
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
        const double norm = h.col(j).norm();
        if (norm > 0.0) {
            h.col(j) /= norm;
        } else {
            h.col(j).setZero();
            h(j % h.rows(), j) = 1.0;
        }
    }
}

double step2_objective(const Eigen::MatrixXd& h, const Eigen::MatrixXd& u,
                       const Eigen::MatrixXd& q, const Eigen::MatrixXd& phi,
                       const Eigen::MatrixXd& sqrt_ni, double varsigma) {
    const double fit = (u * h - phi).squaredNorm();
    const double coupling = (h - q * sqrt_ni).squaredNorm();
    return fit + coupling / varsigma;
}

double step3_objective(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& u,
                       const Eigen::MatrixXd& z, const Eigen::MatrixXd& h,
                       const Eigen::MatrixXd& sqrt_t, double lambda_prime) {
    const double fit = (phi - u * h).squaredNorm();
    const double gram = (phi - z * sqrt_t).squaredNorm();
    return fit + lambda_prime * gram;
}

double max_consecutive_increase(const std::vector<double>& values) {
    double inc = 0.0;
    for (size_t i = 1; i < values.size(); ++i) inc = std::max(inc, values[i] - values[i - 1]);
    return inc;
}

double condition_number(const Eigen::MatrixXd& h) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(h);
    const double smin = svd.singularValues()[svd.singularValues().size() - 1];
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return svd.singularValues()[0] / smin;
}

}  // namespace

void DesignConfig::validate() const {
    if (!(lambda >= 0.0)) throw std::invalid_argument("DesignConfig: lambda must be >= 0");
    if (!(lambda_prime >= 0.0))
        throw std::invalid_argument("DesignConfig: lambda_prime must be >= 0");
    if (!(sigma0 > 0.0)) throw std::invalid_argument("DesignConfig: sigma0 must be positive");
    if (!(decay > 0.0 && decay < 1.0))
        throw std::invalid_argument("DesignConfig: decay must lie in (0, 1)");
    if (max_outer_iters < 1)
        throw std::invalid_argument("DesignConfig: max_outer_iters must be >= 1");
    if (inner_iters < 1) throw std::invalid_argument("DesignConfig: inner_iters must be >= 1");
    if (!(stop_tol >= 0.0)) throw std::invalid_argument("DesignConfig: stop_tol must be >= 0");
}

DegenerateDesignError::DegenerateDesignError(const std::string& what, DesignDiagnostics diagnostics)
    : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}

SymMatrix step_update_n(const Eigen::MatrixXd& h, double lambda, double varsigma,
                        const PsdFloor& floor) {
    if (h.rows() != h.cols())
        throw std::invalid_argument("step_update_n: h must be square");
    if (!(lambda >= 0.0) || !(varsigma > 0.0))
        throw std::invalid_argument("step_update_n: need lambda >= 0 and varsigma > 0");
    const Eigen::Index n = h.cols();
    const SymMatrix f(h.transpose() * h - Eigen::MatrixXd::Identity(n, n));
    const Eigen::VectorXd f_vec = Eigen::Map<const Eigen::VectorXd>(f.mat().data(), n * n);
    const Eigen::VectorXd n_vec = prox_inf_norm(f_vec, lambda * varsigma);
    const SymMatrix raw(Eigen::Map<const Eigen::MatrixXd>(n_vec.data(), n, n));
    const SymMatrix corrected =
        nearest_psd(SymMatrix(raw.mat() + Eigen::MatrixXd::Identity(n, n)), floor);
    return SymMatrix(corrected.mat() - Eigen::MatrixXd::Identity(n, n));
}

HUpdate step_update_h(const RegressorMatrix& phi, const SymMatrix& n_c, double varsigma, int inner,
                      const Eigen::MatrixXd& u_prev, const Eigen::MatrixXd& q_prev) {
    if (!(varsigma > 0.0)) throw std::invalid_argument("step_update_h: varsigma must be positive");
    if (inner < 1) throw std::invalid_argument("step_update_h: inner must be >= 1");
    const Eigen::Index n_theta = phi.cols();
    if (n_c.dim() != n_theta || u_prev.rows() != phi.rows() || u_prev.cols() != n_theta ||
        q_prev.rows() != n_theta || q_prev.cols() != n_theta)
        throw std::invalid_argument("step_update_h: dimension mismatch");

    const Eigen::MatrixXd sqrt_ni =
        psd_sqrt(SymMatrix(n_c.mat() + Eigen::MatrixXd::Identity(n_theta, n_theta)));
    const double blend = 1.0 / (1.0 + 1.0 / varsigma);

    HUpdate out;
    out.u_opt = u_prev;
    out.q_opt = q_prev;
    for (int round = 0; round < inner; ++round) {
        out.h = blend * (out.u_opt.transpose() * phi.matrix() +
                         (1.0 / varsigma) * out.q_opt * sqrt_ni);
        normalize_columns(out.h);
        out.u_opt = orthogonal_factor(out.h * phi.matrix().transpose(),
                                      FactorOrientation::transpose_of_input);
        out.q_opt = orthogonal_factor(out.h.transpose() * sqrt_ni,
                                      FactorOrientation::same_as_input);
        out.objectives.push_back(
            step2_objective(out.h, out.u_opt, out.q_opt, phi.matrix(), sqrt_ni, varsigma));
    }
    return out;
}

HUpdate step_update_h(const RegressorMatrix& phi, const SymMatrix& n_c, double varsigma,
                      int inner) {
    const Eigen::Index n_theta = phi.cols();
    Eigen::MatrixXd u0 = Eigen::MatrixXd::Zero(phi.rows(), n_theta);
    u0.topRows(n_theta).setIdentity();
    return step_update_h(phi, n_c, varsigma, inner, u0,
                         Eigen::MatrixXd::Identity(n_theta, n_theta));
}

PhiUpdate step_update_phi(const Eigen::MatrixXd& h, const GramTarget& gram_target,
                          double lambda_prime, int inner, const Eigen::MatrixXd& prev_z,
                          const Eigen::MatrixXd& prev_u) {
    if (!(lambda_prime >= 0.0))
        throw std::invalid_argument("step_update_phi: lambda_prime must be >= 0");
    if (inner < 1) throw std::invalid_argument("step_update_phi: inner must be >= 1");
    const Eigen::Index n_theta = h.cols();
    if (h.rows() != n_theta || gram_target.matrix.rows() != n_theta ||
        prev_z.cols() != n_theta || prev_u.cols() != n_theta || prev_z.rows() != prev_u.rows())
        throw std::invalid_argument("step_update_phi: dimension mismatch");

    const Eigen::MatrixXd sqrt_t = psd_sqrt(SymMatrix(gram_target.matrix));

    PhiUpdate out{RegressorMatrix::from_generator(
                      Eigen::VectorXd::Zero(prev_z.rows() + n_theta - 1), prev_z.rows(), n_theta),
                  prev_u, prev_z, {}};
    for (int round = 0; round < inner; ++round) {
        out.phi = toeplitz_ls_fit({{out.z_opt * sqrt_t, 1.0}, {out.u_opt * h, lambda_prime}}).matrix;
        out.z_opt = orthogonal_factor(sqrt_t * out.phi.matrix().transpose(),
                                      FactorOrientation::transpose_of_input);
        out.u_opt = orthogonal_factor(h * out.phi.matrix().transpose(),
                                      FactorOrientation::transpose_of_input);
        out.objectives.push_back(
            step3_objective(out.phi.matrix(), out.u_opt, out.z_opt, h, sqrt_t, lambda_prime));
    }
    return out;
}

double design_objective(const RegressorMatrix& phi, const Eigen::MatrixXd& h, const SymMatrix& n_c,
                        const GramTarget& gram_target, const DesignConfig& config,
                        double varsigma) {
    if (!(varsigma > 0.0))
        throw std::invalid_argument("design_objective: varsigma must be positive");
    const Eigen::Index n_theta = phi.cols();
    if (h.rows() != n_theta || h.cols() != n_theta || n_c.dim() != n_theta ||
        gram_target.matrix.rows() != n_theta)
        throw std::invalid_argument("design_objective: dimension mismatch");
    const Eigen::MatrixXd gram = phi.matrix().transpose() * phi.matrix();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n_theta, n_theta);
    const double noise_term = (h * lu.solve(h.transpose()) - identity).squaredNorm();
    const double gram_term = (gram - gram_target.matrix).squaredNorm();
    const double coherence_term = n_c.mat().cwiseAbs().maxCoeff();
    const double coupling =
        (n_c.mat() + identity - h.transpose() * h).squaredNorm() / (2.0 * varsigma);
    return noise_term + config.lambda_prime * gram_term + config.lambda * coherence_term +
           coupling;
}

DesignResult run_lcid(const DesignConfig& config, const GramTarget& gram_target,
                      const RegressorMatrix& phi_init, const Eigen::MatrixXd& h_init) {
    config.validate();
    const Eigen::Index n_theta = phi_init.cols();
    const Eigen::Index n_rows = phi_init.rows();
    if (gram_target.matrix.rows() != n_theta)
        throw std::invalid_argument("run_lcid: gram target is " +
                                    std::to_string(gram_target.matrix.rows()) +
                                    "-dimensional but phi has " + std::to_string(n_theta) +
                                    " columns");
    if (h_init.rows() != n_theta || h_init.cols() != n_theta)
        throw std::invalid_argument("run_lcid: h_init must be n_theta x n_theta");
    if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(phi_init.matrix()).rank() < n_theta)
        throw std::invalid_argument("run_lcid: phi_init is column rank deficient");

    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n_theta, n_theta);
    const Eigen::MatrixXd sqrt_t = psd_sqrt(SymMatrix(gram_target.matrix));
    const double scale = std::sqrt(static_cast<double>(n_rows * n_theta));

    Eigen::MatrixXd h = h_init;
    normalize_columns(h);
    RegressorMatrix phi = phi_init;

    // Warm starts: orthogonal factors of the products at the initial point,
    // with N at its constraint-consistent value H^T H - I (floored on N + I).
    SymMatrix n_c(nearest_psd(SymMatrix(h.transpose() * h), config.psd_floor).mat() - identity);
    Eigen::MatrixXd u_opt = orthogonal_factor(h * phi.matrix().transpose(),
                                              FactorOrientation::transpose_of_input);
    Eigen::MatrixXd q_opt = orthogonal_factor(
        h.transpose() * psd_sqrt(SymMatrix(n_c.mat() + identity)),
        FactorOrientation::same_as_input);
    Eigen::MatrixXd z_opt = orthogonal_factor(sqrt_t * phi.matrix().transpose(),
                                              FactorOrientation::transpose_of_input);

    DesignDiagnostics diag;
    double varsigma = config.sigma0;
    for (int iter = 1; iter <= config.max_outer_iters; ++iter) {
        varsigma *= config.decay;
        const Eigen::MatrixXd h_before = h;
        const Eigen::MatrixXd phi_before = phi.matrix();

        n_c = step_update_n(h, config.lambda, varsigma, config.psd_floor);

        HUpdate hu = step_update_h(phi, n_c, varsigma, config.inner_iters, u_opt, q_opt);
        h = hu.h;
        u_opt = hu.u_opt;
        q_opt = hu.q_opt;

        PhiUpdate pu =
            step_update_phi(h, gram_target, config.lambda_prime, config.inner_iters, z_opt, u_opt);
        phi = pu.phi;
        z_opt = pu.z_opt;
        u_opt = pu.u_opt;

        DesignTraceRow row;
        row.iter = iter;
        row.varsigma = varsigma;
        row.objective = design_objective(phi, h, n_c, gram_target, config, varsigma);
        row.mu_h = coherence_or_nan(h);
        row.mu_phi = coherence_or_nan(phi.matrix());
        row.fim_fit_error =
            (phi.matrix().transpose() * phi.matrix() - gram_target.matrix).norm() / scale;
        row.constraint_residual = (n_c.mat() + identity - h.transpose() * h).norm();
        row.step2_increase = max_consecutive_increase(hu.objectives);
        row.step3_increase = max_consecutive_increase(pu.objectives);
        if (row.step2_increase > 0.0) ++diag.step2_violations;
        if (row.step3_increase > 0.0) ++diag.step3_violations;
        diag.trace.push_back(row);
        diag.iterations = iter;

        const double delta =
            std::max((phi.matrix() - phi_before).norm(), (h - h_before).norm()) / scale;
        if (delta < config.stop_tol) {
            diag.converged = true;
            break;
        }
    }

    diag.h_condition = condition_number(h);
    if (!(diag.h_condition < kDegenerateCondition))
        throw DegenerateDesignError("run_lcid: transformation condition number " +
                                        std::to_string(diag.h_condition) + " exceeds 1e12",
                                    diag);

    return DesignResult{phi, h, std::move(diag), gram_target.matrix};
}

RegressorMatrix default_phi_init(const GramTarget& gram_target, Eigen::Index n_rows) {
    const Eigen::Index n_theta = gram_target.matrix.rows();
    if (n_rows < n_theta)
        throw std::invalid_argument("default_phi_init: need at least n_theta rows");
    const Eigen::MatrixXd sqrt_t = psd_sqrt(SymMatrix(gram_target.matrix));
    Eigen::MatrixXd z0 = Eigen::MatrixXd::Zero(n_rows, n_theta);
    z0.topRows(n_theta) = orthogonal_factor(sqrt_t, FactorOrientation::transpose_of_input);
    return toeplitz_ls_fit({{z0 * sqrt_t, 1.0}}).matrix;
}

DesignResult run_lcid(const DesignConfig& config, const GramTarget& gram_target,
                      Eigen::Index n_rows) {
    const Eigen::Index n_theta = gram_target.matrix.rows();
    return run_lcid(config, gram_target, default_phi_init(gram_target, n_rows),
                    Eigen::MatrixXd::Identity(n_theta, n_theta));
}

TransformedLs transformed_ls(const RegressorMatrix& phi, const Eigen::MatrixXd& h,
                             const Eigen::VectorXd& y) {
    const Eigen::Index n_theta = phi.cols();
    if (h.rows() != n_theta || h.cols() != n_theta)
        throw std::invalid_argument("transformed_ls: h must be n_theta x n_theta");
    if (y.size() != phi.rows())
        throw std::invalid_argument("transformed_ls: y has wrong length");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi.matrix());
    if (qr.rank() < n_theta)
        throw RankDeficiencyError("transformed_ls: Phi^T Phi is singular (rank " +
                                  std::to_string(qr.rank()) + " of " + std::to_string(n_theta) +
                                  ")");
    Eigen::FullPivLU<Eigen::MatrixXd> h_lu(h);
    if (!h_lu.isInvertible())
        throw RankDeficiencyError("transformed_ls: h is singular");

    // x = H theta, so the LS solution of min ||y - Phi H^-1 x|| is H times
    // the ordinary LS estimate.
    const Eigen::VectorXd theta_ls = qr.solve(y);
    const Eigen::MatrixXd gram = phi.matrix().transpose() * phi.matrix();
    TransformedLs out;
    out.x_hat = h * theta_ls;
    out.noise_cov = h * Eigen::LDLT<Eigen::MatrixXd>(gram).solve(h.transpose());
    return out;
}

}  // namespace lcid
