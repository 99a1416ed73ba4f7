#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "lcid/regressor.hpp"

namespace lcid {

/// Square matrix kept exactly symmetric: construction stores (M + M^T) / 2.
class SymMatrix {
public:
    explicit SymMatrix(const Eigen::MatrixXd& m);
    const Eigen::MatrixXd& mat() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }

private:
    Eigen::MatrixXd m_;
};

/// Eigenvalue floor for positive-definiteness corrections.
struct PsdFloor {
    double epsilon;
    explicit PsdFloor(double eps = 1e-10);
};

/// Euclidean projection onto the l1 ball of the given radius.
/// Exact sort-based thresholding, O(n log n). Points already inside the
/// ball are returned unchanged.
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius);

/// Proximal mapping of eta * ||.||_inf, computed through the Moreau
/// decomposition: v - project_l1_ball(v, eta).
Eigen::VectorXd prox_inf_norm(const Eigen::VectorXd& v, double eta);

/// Nearest (Frobenius) matrix with all eigenvalues >= floor.epsilon:
/// eigendecompose and clip the spectrum from below.
SymMatrix nearest_psd(const SymMatrix& m, const PsdFloor& floor);

/// Symmetric square root of a PSD matrix. Eigenvalues in
/// [-1e-8 * ||m||_2, 0) are clipped to zero; anything lower throws NotPsdError.
Eigen::MatrixXd psd_sqrt(const SymMatrix& m);

/// Which combination of the thin-SVD factors of p = U S V^T to return.
enum class FactorOrientation {
    transpose_of_input,  // V U^T, shaped like p^T; maximizes tr(p X)
    same_as_input,       // U V^T, shaped like p;   maximizes tr(X^T p)
};

/// Semi-unitary Procrustes factor of a product matrix p (a x b, a <= b).
/// Both orientations satisfy X^T X = I on the thin side and attain the
/// optimal alignment trace (the sum of singular values of p).
Eigen::MatrixXd orthogonal_factor(const Eigen::MatrixXd& p, FactorOrientation orientation);

struct ToeplitzTarget {
    Eigen::MatrixXd matrix;
    double weight = 1.0;
};

struct ToeplitzFit {
    /// Diagonal coefficients c_l for l = -N+1, ..., n_theta-1 (c[l + N - 1]),
    /// where l indexes the diagonal j = i + l.
    Eigen::VectorXd coeffs;
    RegressorMatrix matrix;
};

/// Weighted least-squares fit of a Toeplitz matrix to a set of dense targets:
/// argmin_c sum_t w_t || T(c) - target_t ||_F^2. The Gram matrix of the
/// diagonal-indicator basis is diagonal (entry l = length of diagonal l), so
/// the solution is the weighted per-diagonal average; the basis is never
/// materialized.
ToeplitzFit toeplitz_ls_fit(const std::vector<ToeplitzTarget>& targets);

}  // namespace lcid
