#include "lcid/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "lcid/errors.hpp"

namespace lcid {

namespace {

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& a, const std::vector<int>& idx) {
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = a.col(idx[j]);
    return sub;
}

SparseEstimate scatter_estimate(const Eigen::VectorXd& coeffs, const std::vector<int>& support,
                                Eigen::Index n) {
    SparseEstimate est;
    est.theta = Eigen::VectorXd::Zero(n);
    for (size_t j = 0; j < support.size(); ++j)
        est.theta[support[j]] = coeffs[static_cast<Eigen::Index>(j)];
    est.support = support;
    std::sort(est.support.begin(), est.support.end());
    est.sparsity = static_cast<int>(support.size());
    return est;
}

// Gaussian-likelihood information criteria; rss is floored at machine
// precision relative to ||y||^2 so that exactly-interpolating fits compare
// by penalty alone instead of by log of rounding noise.
double criterion_value(OrderCriterion criterion, double rss, double y_norm2, int n, int k) {
    const double floor = std::numeric_limits<double>::epsilon() * std::max(y_norm2, 1e-300);
    const double rss_eff = std::max(rss, floor);
    const double fit = n * std::log(rss_eff / n);
    if (criterion == OrderCriterion::aicc)
        return fit + 2.0 * k + 2.0 * k * (k + 1.0) / (n - k - 1.0);
    return fit + k * std::log(static_cast<double>(n));
}

}  // namespace

std::vector<int> omp_selection_path(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int s,
                                    bool* truncated) {
    if (s < 0 || s > std::min(a.rows(), a.cols()))
        throw std::invalid_argument("omp: s must satisfy 0 <= s <= min(rows, cols)");
    if (b.size() != a.rows()) throw std::invalid_argument("omp: b has wrong length");
    Eigen::VectorXd norms(a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        norms[j] = a.col(j).norm();
        if (norms[j] == 0.0)
            throw std::invalid_argument("omp: column " + std::to_string(j) + " is zero");
    }
    if (truncated) *truncated = false;

    std::vector<int> selected;
    std::vector<bool> in_support(static_cast<size_t>(a.cols()), false);
    Eigen::VectorXd residual = b;
    for (int round = 0; round < s; ++round) {
        int best = -1;
        double best_corr = -1.0;
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (in_support[static_cast<size_t>(j)]) continue;
            const double corr = std::abs(a.col(j).dot(residual)) / norms[j];
            if (corr > best_corr) {
                best_corr = corr;
                best = static_cast<int>(j);
            }
        }
        std::vector<int> candidate = selected;
        candidate.push_back(best);
        const Eigen::MatrixXd sub = select_columns(a, candidate);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
        if (qr.rank() < static_cast<Eigen::Index>(candidate.size())) {
            if (truncated) *truncated = true;
            break;
        }
        selected = std::move(candidate);
        residual = b - sub * qr.solve(b);
    }
    return selected;
}

SparseEstimate omp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int s) {
    bool truncated = false;
    const std::vector<int> support = omp_selection_path(a, b, s, &truncated);
    SparseEstimate est;
    if (support.empty()) {
        est.theta = Eigen::VectorXd::Zero(a.cols());
        est.rank_warning = truncated;
        return est;
    }
    const Eigen::MatrixXd sub = select_columns(a, support);
    const Eigen::VectorXd coeffs = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(sub).solve(b);
    est = scatter_estimate(coeffs, support, a.cols());
    est.rank_warning = truncated;
    return est;
}

Eigen::VectorXd ladmm_lasso(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double lambda,
                            double rho, int max_iters, double tol) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("ladmm_lasso: lambda must be >= 0");
    if (!(rho > 0.0)) throw std::invalid_argument("ladmm_lasso: rho must be positive");
    if (b.size() != a.rows()) throw std::invalid_argument("ladmm_lasso: b has wrong length");
    const Eigen::Index p = a.cols();

    const Eigen::MatrixXd gram = a.transpose() * a;
    const Eigen::VectorXd atb = a.transpose() * b;
    Eigen::LLT<Eigen::MatrixXd> llt(gram + rho * Eigen::MatrixXd::Identity(p, p));

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(p);
    const double thresh = lambda / rho;
    const double scale = std::sqrt(static_cast<double>(p));

    for (int it = 0; it < max_iters; ++it) {
        theta = llt.solve(atb + rho * (z - u));
        const Eigen::VectorXd z_old = z;
        const Eigen::VectorXd w = theta + u;
        for (Eigen::Index i = 0; i < p; ++i) {
            const double mag = std::abs(w[i]) - thresh;
            z[i] = mag > 0.0 ? (w[i] > 0.0 ? mag : -mag) : 0.0;
        }
        u += theta - z;
        const double primal = (theta - z).norm() / scale;
        const double dual = rho * (z - z_old).norm() / scale;
        if (primal <= tol && dual <= tol) break;
    }
    return z;
}

SparseEstimate ls_refit(const RegressorMatrix& phi, const Eigen::VectorXd& y,
                        const std::vector<int>& support) {
    if (support.empty()) throw std::invalid_argument("ls_refit: support is empty");
    if (y.size() != phi.rows()) throw std::invalid_argument("ls_refit: y has wrong length");
    for (int idx : support)
        if (idx < 0 || idx >= phi.cols())
            throw std::invalid_argument("ls_refit: support index " + std::to_string(idx) +
                                        " out of range");
    const Eigen::MatrixXd sub = select_columns(phi.matrix(), support);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sub);
    if (cod.rank() < static_cast<Eigen::Index>(support.size())) {
        std::string msg = "ls_refit: support columns are rank deficient:";
        for (int idx : support) msg += " " + std::to_string(idx);
        throw RankDeficiencyError(msg);
    }
    return scatter_estimate(cod.solve(y), support, phi.cols());
}

SparseEstimate order_select_ls(const RegressorMatrix& phi, const Eigen::VectorXd& y,
                               OrderCriterion criterion, int k_max) {
    const int n = static_cast<int>(phi.rows());
    if (k_max < 1 || k_max > phi.cols())
        throw std::invalid_argument("order_select_ls: need 1 <= k_max <= n_theta");
    if (y.size() != n) throw std::invalid_argument("order_select_ls: y has wrong length");

    const double y_norm2 = y.squaredNorm();
    int best_k = 0;
    double best_value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_coeffs;
    for (int k = 1; k <= k_max; ++k) {
        if (criterion == OrderCriterion::aicc && n - k - 1 <= 0) continue;
        const Eigen::MatrixXd lead = phi.matrix().leftCols(k);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(lead);
        const Eigen::VectorXd coeffs = qr.solve(y);
        const double rss = (y - lead * coeffs).squaredNorm();
        const double value = criterion_value(criterion, rss, y_norm2, n, k);
        if (value < best_value) {
            best_value = value;
            best_k = k;
            best_coeffs = coeffs;
        }
    }
    if (best_k == 0)
        throw std::invalid_argument("order_select_ls: no admissible order (check N - k - 1 > 0)");
    std::vector<int> support(static_cast<size_t>(best_k));
    for (int i = 0; i < best_k; ++i) support[static_cast<size_t>(i)] = i;
    return scatter_estimate(best_coeffs, support, phi.cols());
}

SparseEstimate lcid_estimate(const Eigen::VectorXd& x_hat, const Eigen::MatrixXd& h,
                             const RegressorMatrix& phi, const Eigen::VectorXd& y,
                             const LcidEstimateMode& mode) {
    const int n_theta = static_cast<int>(phi.cols());
    if (h.rows() != n_theta || h.cols() != n_theta || x_hat.size() != n_theta)
        throw std::invalid_argument("lcid_estimate: dimension mismatch");

    if (mode.kind == LcidEstimateMode::Kind::fixed_s) {
        if (mode.s < 1 || mode.s > n_theta)
            throw std::invalid_argument("lcid_estimate: need 1 <= s <= n_theta");
        const SparseEstimate support_est = omp(h, x_hat, mode.s);
        SparseEstimate est = ls_refit(phi, y, support_est.support);
        est.rank_warning = support_est.rank_warning;
        return est;
    }

    const OrderCriterion criterion = mode.kind == LcidEstimateMode::Kind::order_bic
                                         ? OrderCriterion::bic
                                         : OrderCriterion::aicc;
    const int k_max = mode.k_max > 0 ? mode.k_max : n_theta;
    if (k_max > n_theta)
        throw std::invalid_argument("lcid_estimate: k_max exceeds n_theta");
    bool truncated = false;
    const std::vector<int> path = omp_selection_path(h, x_hat, k_max, &truncated);
    if (path.empty())
        throw RankDeficiencyError("lcid_estimate: omp selected no columns");

    const int n = static_cast<int>(phi.rows());
    const double y_norm2 = y.squaredNorm();
    double best_value = std::numeric_limits<double>::infinity();
    SparseEstimate best;
    bool found = false;
    for (int k = 1; k <= static_cast<int>(path.size()); ++k) {
        if (criterion == OrderCriterion::aicc && n - k - 1 <= 0) continue;
        const std::vector<int> support(path.begin(), path.begin() + k);
        const SparseEstimate est = ls_refit(phi, y, support);
        const double rss = (y - phi.matrix() * est.theta).squaredNorm();
        const double value = criterion_value(criterion, rss, y_norm2, n, k);
        if (value < best_value) {
            best_value = value;
            best = est;
            found = true;
        }
    }
    if (!found)
        throw std::invalid_argument("lcid_estimate: no admissible order (check N - k - 1 > 0)");
    best.rank_warning = truncated;
    return best;
}

double recovery_bound(int n_theta, int s, double nu) {
    if (s < 1 || s >= n_theta)
        throw std::invalid_argument("recovery_bound: need 1 <= s < n_theta");
    if (!(nu > 0.0))
        throw std::invalid_argument("recovery_bound: nu must be positive");
    const double first = 1.0 - (n_theta - s) / std::pow(static_cast<double>(n_theta), 1.0 + nu);
    const double second = 1.0 - std::exp(-s / 7.0);
    return first * second;
}

double cross_validate(const CvFit& fit, const Eigen::MatrixXd& phi, const Eigen::VectorXd& y,
                      const CvProtocol& protocol) {
    if (!(protocol.train_fraction > 0.0 && protocol.train_fraction < 1.0))
        throw std::invalid_argument("cross_validate: train_fraction must lie in (0, 1)");
    if (protocol.grid_size < 1 || !(protocol.grid_min > 0.0) ||
        !(protocol.grid_max >= protocol.grid_min))
        throw std::invalid_argument("cross_validate: invalid hyperparameter grid");
    const Eigen::Index n = phi.rows();
    if (y.size() != n) throw std::invalid_argument("cross_validate: y has wrong length");
    const Eigen::Index n_train =
        static_cast<Eigen::Index>(std::llround(protocol.train_fraction * static_cast<double>(n)));
    if (n_train < 1 || n_train >= n)
        throw std::invalid_argument("cross_validate: split leaves an empty train or validation set");

    const Eigen::MatrixXd a_train = phi.topRows(n_train);
    const Eigen::VectorXd y_train = y.head(n_train);
    const Eigen::MatrixXd a_val = phi.bottomRows(n - n_train);
    const Eigen::VectorXd y_val = y.tail(n - n_train);

    const double log_min = std::log(protocol.grid_min);
    const double log_max = std::log(protocol.grid_max);
    double best_hyper = protocol.grid_min;
    double best_error = std::numeric_limits<double>::infinity();
    for (int i = 0; i < protocol.grid_size; ++i) {
        const double frac = protocol.grid_size == 1
                                ? 0.0
                                : static_cast<double>(i) / (protocol.grid_size - 1);
        // Endpoints are inclusive and exact.
        const double hyper = i == 0 ? protocol.grid_min
                             : i == protocol.grid_size - 1
                                 ? protocol.grid_max
                                 : std::exp(log_min + frac * (log_max - log_min));
        const Eigen::VectorXd theta = fit(a_train, y_train, hyper);
        const double error = (y_val - a_val * theta).norm();
        if (error < best_error) {
            best_error = error;
            best_hyper = hyper;
        }
    }
    return best_hyper;
}

}  // namespace lcid
