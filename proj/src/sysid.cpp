#include "lcid/sysid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcid/errors.hpp"
#include "lcid/rng.hpp"

namespace lcid {

FixedDenominatorFilter::FixedDenominatorFilter(const Eigen::VectorXd& denominator, double gain)
    : a_(denominator), gain_(gain) {
    if (!a_.allFinite() || !std::isfinite(gain_))
        throw std::invalid_argument("FixedDenominatorFilter: non-finite coefficients");
    if (gain_ == 0.0)
        throw std::invalid_argument("FixedDenominatorFilter: gain must be nonzero");
    const Eigen::Index p = a_.size();
    if (p == 0) return;
    // Roots of z^P + a_1 z^{P-1} + ... + a_P via the companion matrix.
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) companion(0, i) = -a_[i];
    for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> eig(companion, /*computeEigenvectors=*/false);
    for (Eigen::Index i = 0; i < p; ++i) {
        if (std::abs(eig.eigenvalues()[i]) >= 1.0)
            throw std::invalid_argument(
                "FixedDenominatorFilter: denominator root with modulus " +
                std::to_string(std::abs(eig.eigenvalues()[i])) + " is not inside the unit circle");
    }
}

GramTarget::GramTarget(const Eigen::MatrixXd& t, double sigma2_in) : matrix(t), sigma2(sigma2_in) {
    if (t.rows() != t.cols())
        throw std::invalid_argument("GramTarget: matrix must be square");
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("GramTarget: sigma2 must be positive");
    const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
    if ((t - t.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("GramTarget: matrix is not symmetric");
    matrix = 0.5 * (t + t.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues()[0] < -1e-10 * scale)
        throw NotPsdError("GramTarget: matrix has eigenvalue " +
                          std::to_string(eig.eigenvalues()[0]));
}

SpectrumCoefficients::SpectrumCoefficients(const Eigen::VectorXd& r) : r_(r) {
    if (r_.size() < 1)
        throw std::invalid_argument("SpectrumCoefficients: need at least r_0");
    if (!r_.allFinite())
        throw std::invalid_argument("SpectrumCoefficients: non-finite coefficients");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(toeplitz(r_.size()), Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, std::abs(r_[0]));
    if (eig.eigenvalues()[0] < -1e-8 * scale)
        throw NotPsdError("SpectrumCoefficients: Toeplitz(r) has eigenvalue " +
                          std::to_string(eig.eigenvalues()[0]) + ", spectrum is not nonnegative");
}

Eigen::MatrixXd SpectrumCoefficients::toeplitz(Eigen::Index n) const {
    Eigen::MatrixXd t(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Index k = std::abs(i - j);
            t(i, j) = k < r_.size() ? r_[k] : 0.0;
        }
    return t;
}

double mutual_coherence(const Eigen::MatrixXd& a) {
    if (a.cols() < 2)
        throw std::invalid_argument("mutual_coherence: need at least two columns");
    Eigen::VectorXd norms(a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        norms[j] = a.col(j).norm();
        if (norms[j] == 0.0)
            throw std::invalid_argument("mutual_coherence: column " + std::to_string(j) +
                                        " is zero");
    }
    double mu = 0.0;
    for (Eigen::Index i = 0; i < a.cols(); ++i)
        for (Eigen::Index j = i + 1; j < a.cols(); ++j)
            mu = std::max(mu, std::abs(a.col(i).dot(a.col(j))) / (norms[i] * norms[j]));
    return std::min(mu, 1.0);
}

bool coherence_condition(const Eigen::MatrixXd& a, int s) {
    if (s < 1) throw std::invalid_argument("coherence_condition: s must be >= 1");
    return mutual_coherence(a) < 1.0 / (3.0 * s);
}

Eigen::VectorXd filter_fixed_denominator(const Eigen::VectorXd& u, const FixedDenominatorFilter& f) {
    const Eigen::Index p = f.order();
    Eigen::VectorXd out(u.size());
    for (Eigen::Index t = 0; t < u.size(); ++t) {
        double acc = f.gain() * u[t];
        for (Eigen::Index k = 1; k <= p && k <= t; ++k) acc -= f.denominator()[k - 1] * out[t - k];
        out[t] = acc;
    }
    return out;
}

Eigen::VectorXd recover_input(const Eigen::VectorXd& u_prime, const FixedDenominatorFilter& f) {
    const Eigen::Index p = f.order();
    Eigen::VectorXd out(u_prime.size());
    for (Eigen::Index t = 0; t < u_prime.size(); ++t) {
        double acc = u_prime[t];
        for (Eigen::Index k = 1; k <= p && k <= t; ++k) acc += f.denominator()[k - 1] * u_prime[t - k];
        out[t] = acc / f.gain();
    }
    return out;
}

RegressorMatrix build_regressor(const Eigen::VectorXd& u_prime, int n_theta, int n) {
    if (n_theta < 1 || n < 1)
        throw std::invalid_argument("build_regressor: dimensions must be positive");
    const Eigen::Index required = n + n_theta - 1;
    if (u_prime.size() != required)
        throw std::invalid_argument("build_regressor: need exactly " + std::to_string(required) +
                                    " samples covering t = " + std::to_string(1 - n_theta) +
                                    " ... " + std::to_string(n - 1) + ", got " +
                                    std::to_string(u_prime.size()));
    return RegressorMatrix::from_generator(u_prime, n, n_theta);
}

Eigen::MatrixXd fim(const RegressorMatrix& phi, double sigma2) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("fim: sigma2 must be positive");
    return phi.matrix().transpose() * phi.matrix() / sigma2;
}

SpectrumCoefficients bandpass_autocorrelation(double w1, double w2, double power, int j) {
    if (!(0.0 <= w1 && w1 < w2 && w2 <= M_PI))
        throw std::invalid_argument("bandpass_autocorrelation: need 0 <= w1 < w2 <= pi");
    if (!(power > 0.0))
        throw std::invalid_argument("bandpass_autocorrelation: power must be positive");
    if (j < 1) throw std::invalid_argument("bandpass_autocorrelation: order must be >= 1");
    Eigen::VectorXd r(j);
    r[0] = power * (w2 - w1) / M_PI;
    for (int k = 1; k < j; ++k)
        r[k] = power * (std::sin(w2 * k) - std::sin(w1 * k)) / (M_PI * k);
    return SpectrumCoefficients(r);
}

SpectrumCoefficients add_white_floor(const SpectrumCoefficients& r, double power) {
    if (!(power >= 0.0))
        throw std::invalid_argument("add_white_floor: power must be >= 0");
    Eigen::VectorXd mixed = r.autocorrelation();
    mixed[0] += power;
    return SpectrumCoefficients(mixed);
}

GramTarget gram_target_from_spectrum(const SpectrumCoefficients& r, int n_theta, int n,
                                     double sigma2) {
    if (r.order() < n_theta)
        throw std::invalid_argument("gram_target_from_spectrum: spectrum order J = " +
                                    std::to_string(r.order()) + " is below n_theta = " +
                                    std::to_string(n_theta));
    Eigen::MatrixXd t = static_cast<double>(n) * r.toeplitz(n_theta);
    // Truncation can leave eigenvalues a hair below zero; clip them.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
    if (eig.eigenvalues()[0] < 0.0) {
        Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
        t = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
        t = 0.5 * (t + t.transpose()).eval();
    }
    return GramTarget(t, sigma2);
}

Eigen::VectorXd realize_input_fdm(const SpectrumCoefficients& r, int n, int n_theta,
                                  std::uint64_t seed) {
    if (n < 1 || n_theta < 1)
        throw std::invalid_argument("realize_input_fdm: dimensions must be positive");
    const Eigen::Index m = static_cast<Eigen::Index>(n) + n_theta - 1;
    const Eigen::VectorXd& rho = r.autocorrelation();
    if (!(rho[0] > 0.0))
        throw NumericError("realize_input_fdm: spectrum has no power (r_0 <= 0)");

    // Levinson-Durbin recursion for the minimum-phase all-pole factor of the
    // maximum-entropy spectrum matching r. Narrowband sequences are nearly
    // singular, so the recursion stops once the prediction-error variance
    // hits the floor or a reflection coefficient leaves the unit disc; the
    // remaining lags are then matched by the autoregressive extension.
    const double floor = 1e-12 * rho[0];
    std::vector<double> poly{1.0};
    double variance = rho[0];
    const Eigen::Index max_order = std::min<Eigen::Index>(rho.size() - 1, m - 1);
    for (Eigen::Index order = 1; order <= max_order; ++order) {
        if (variance <= floor) break;
        double acc = rho[order];
        for (Eigen::Index i = 1; i < order; ++i) acc += poly[static_cast<size_t>(i)] * rho[order - i];
        const double reflection = -acc / variance;
        if (!std::isfinite(reflection) || std::abs(reflection) >= 1.0) break;
        std::vector<double> next(static_cast<size_t>(order) + 1, 0.0);
        for (Eigen::Index i = 0; i <= order; ++i) {
            const double direct = i < order ? poly[static_cast<size_t>(i)] : 0.0;
            const double flipped = order - i < order ? poly[static_cast<size_t>(order - i)] : 0.0;
            next[static_cast<size_t>(i)] = direct + reflection * flipped;
        }
        poly = std::move(next);
        variance *= 1.0 - reflection * reflection;
    }
    if (!(variance > 0.0))
        throw NumericError("realize_input_fdm: factorization failed, spectrum is indefinite");
    const Eigen::Index p = static_cast<Eigen::Index>(poly.size()) - 1;

    Rng rng(seed);
    Eigen::VectorXd out(m);

    // Exact stationary start: the first p samples are drawn with the exact
    // Toeplitz covariance (eigenvalue-clipped), then the recursion keeps the
    // process stationary without any burn-in.
    if (p > 0) {
        Eigen::MatrixXd head_cov = r.toeplitz(p);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(head_cov);
        const Eigen::MatrixXd shaper = eig.eigenvectors() *
                                       eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        out.head(p) = shaper * rng.normal_vector(p);
    }
    const double noise_std = std::sqrt(variance);
    for (Eigen::Index t = p; t < m; ++t) {
        double acc = noise_std * rng.normal();
        for (Eigen::Index i = 1; i <= p; ++i) acc -= poly[static_cast<size_t>(i)] * out[t - i];
        out[t] = acc;
    }
    return out;
}

}  // namespace lcid
