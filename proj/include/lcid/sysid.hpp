#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "lcid/proxops.hpp"
#include "lcid/regressor.hpp"

namespace lcid {

/// All-pole filter F(q) = gain / (1 + a_1 q^-1 + ... + a_P q^-P).
/// Stability (all denominator roots strictly inside the unit circle) is
/// checked on construction.
class FixedDenominatorFilter {
public:
    explicit FixedDenominatorFilter(const Eigen::VectorXd& denominator = Eigen::VectorXd(),
                                    double gain = 1.0);
    const Eigen::VectorXd& denominator() const { return a_; }
    double gain() const { return gain_; }
    Eigen::Index order() const { return a_.size(); }

private:
    Eigen::VectorXd a_;  // a_1 ... a_P
    double gain_;
};

/// Desired Gram matrix T for Phi^T Phi; equals sigma2 times the desired
/// Fisher information matrix.
struct GramTarget {
    GramTarget(const Eigen::MatrixXd& t, double sigma2);
    Eigen::MatrixXd matrix;
    double sigma2;
    Eigen::MatrixXd desired_fim() const { return matrix / sigma2; }
};

/// Autocorrelation coefficients r_0 ... r_{J-1} of a scalar input spectrum
/// (r_{-k} = r_k). The Toeplitz matrix they generate must be PSD within 1e-8.
class SpectrumCoefficients {
public:
    explicit SpectrumCoefficients(const Eigen::VectorXd& r);
    const Eigen::VectorXd& autocorrelation() const { return r_; }
    Eigen::Index order() const { return r_.size(); }
    /// Symmetric Toeplitz matrix of the first n coefficients (zero beyond J-1).
    Eigen::MatrixXd toeplitz(Eigen::Index n) const;

private:
    Eigen::VectorXd r_;
};

/// Largest absolute normalized inner product between distinct columns.
double mutual_coherence(const Eigen::MatrixXd& a);

/// Checks the sparse-recovery condition mu(a) < 1 / (3s).
bool coherence_condition(const Eigen::MatrixXd& a, int s);

/// u' = F(q) u with zero initial conditions.
Eigen::VectorXd filter_fixed_denominator(const Eigen::VectorXd& u, const FixedDenominatorFilter& f);

/// u = F^{-1}(q) u'; exact polynomial inverse of the all-pole filter, so
/// recover_input(filter_fixed_denominator(u)) == u up to rounding.
Eigen::VectorXd recover_input(const Eigen::VectorXd& u_prime, const FixedDenominatorFilter& f);

/// Builds the N x n_theta regressor from u'(t), t = 1-n_theta ... N-1
/// (pre-window samples included; pass zeros for zero initial conditions).
RegressorMatrix build_regressor(const Eigen::VectorXd& u_prime, int n_theta, int n);

/// Fisher information of the linear regression: Phi^T Phi / sigma2.
Eigen::MatrixXd fim(const RegressorMatrix& phi, double sigma2);

/// Autocorrelation of an ideal bandpass spectrum on [w1, w2] (rad/sample)
/// with the given total power, truncated at J coefficients.
SpectrumCoefficients bandpass_autocorrelation(double w1, double w2, double power, int j);

/// Adds a flat spectral floor (white power) to an autocorrelation. Keeps
/// otherwise-singular narrowband targets positive definite, the way an
/// information-matrix lower-bound constraint would.
SpectrumCoefficients add_white_floor(const SpectrumCoefficients& r, double power);

/// Gram target N * Toeplitz(r_0 ... r_{n_theta-1}), i.e. the expected
/// Phi^T Phi for an input with autocorrelation r; clipped to PSD.
GramTarget gram_target_from_spectrum(const SpectrumCoefficients& r, int n_theta, int n,
                                     double sigma2 = 1.0);

/// Realization of a process with autocorrelation r: Cholesky factor of the
/// (banded) Toeplitz covariance applied to seeded white noise. Returns
/// n + n_theta - 1 samples, ready for build_regressor.
Eigen::VectorXd realize_input_fdm(const SpectrumCoefficients& r, int n, int n_theta,
                                  std::uint64_t seed);

}  // namespace lcid
