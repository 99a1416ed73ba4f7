#include "lcid/proxops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lcid/errors.hpp"

namespace lcid {

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("SymMatrix: matrix must be square, got " +
                                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    m_ = 0.5 * (m + m.transpose());
}

PsdFloor::PsdFloor(double eps) : epsilon(eps) {
    if (!(eps > 0.0))
        throw std::invalid_argument("PsdFloor: epsilon must be positive");
}

Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius) {
    if (!v.allFinite())
        throw std::invalid_argument("project_l1_ball: input has non-finite entries");
    if (!(radius >= 0.0) || !std::isfinite(radius))
        throw std::invalid_argument("project_l1_ball: radius must be finite and >= 0");

    if (radius == 0.0) return Eigen::VectorXd::Zero(v.size());

    const double l1 = v.lpNorm<1>();
    // Points feasible up to a 1e-12 relative slack are returned verbatim, so
    // projecting twice is a bit-for-bit no-op despite threshold rounding.
    const double slack = 1e-12 * std::max(radius, l1);
    if (l1 <= radius + slack) return v;

    // Sort-based threshold: tau such that sum_i max(|v_i| - tau, 0) = radius.
    std::vector<double> mags(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) mags[static_cast<size_t>(i)] = std::abs(v[i]);
    std::sort(mags.begin(), mags.end(), std::greater<double>());

    double cumulative = 0.0;
    double tau = 0.0;
    for (size_t j = 0; j < mags.size(); ++j) {
        cumulative += mags[j];
        const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
        if (j + 1 == mags.size() || mags[j + 1] <= candidate) {
            tau = candidate;
            break;
        }
    }

    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double mag = std::abs(v[i]) - tau;
        out[i] = mag > 0.0 ? (v[i] > 0.0 ? mag : -mag) : 0.0;
    }
    return out;
}

Eigen::VectorXd prox_inf_norm(const Eigen::VectorXd& v, double eta) {
    return v - project_l1_ball(v, eta);
}

SymMatrix nearest_psd(const SymMatrix& m, const PsdFloor& floor) {
    if (!m.mat().allFinite())
        throw NumericError("nearest_psd: matrix has non-finite entries");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.mat());
    if (eig.info() != Eigen::Success)
        throw NumericError("nearest_psd: eigendecomposition failed");
    Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(floor.epsilon);
    return SymMatrix(eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose());
}

Eigen::MatrixXd psd_sqrt(const SymMatrix& m) {
    if (!m.mat().allFinite())
        throw NumericError("psd_sqrt: matrix has non-finite entries");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.mat());
    if (eig.info() != Eigen::Success)
        throw NumericError("psd_sqrt: eigendecomposition failed");
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double spectral_norm = std::max(std::abs(lambda[0]), std::abs(lambda[lambda.size() - 1]));
    const double tolerance = 1e-8 * spectral_norm;
    Eigen::VectorXd root(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda[i] < -tolerance)
            throw NotPsdError("psd_sqrt: eigenvalue " + std::to_string(lambda[i]) +
                              " below -1e-8 * ||m||_2");
        root[i] = std::sqrt(std::max(lambda[i], 0.0));
    }
    Eigen::MatrixXd s = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
    return 0.5 * (s + s.transpose());
}

Eigen::MatrixXd orthogonal_factor(const Eigen::MatrixXd& p, FactorOrientation orientation) {
    if (!p.allFinite())
        throw std::invalid_argument("orthogonal_factor: input has non-finite entries");
    if (p.rows() > p.cols())
        throw std::invalid_argument("orthogonal_factor: expected a wide or square matrix");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(p, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (orientation == FactorOrientation::transpose_of_input)
        return svd.matrixV() * svd.matrixU().transpose();
    return svd.matrixU() * svd.matrixV().transpose();
}

ToeplitzFit toeplitz_ls_fit(const std::vector<ToeplitzTarget>& targets) {
    if (targets.empty())
        throw std::invalid_argument("toeplitz_ls_fit: no targets");
    const Eigen::Index n_rows = targets.front().matrix.rows();
    const Eigen::Index n_cols = targets.front().matrix.cols();
    double weight_sum = 0.0;
    for (const auto& t : targets) {
        if (t.matrix.rows() != n_rows || t.matrix.cols() != n_cols)
            throw std::invalid_argument("toeplitz_ls_fit: targets have mismatched dimensions");
        if (!(t.weight >= 0.0))
            throw std::invalid_argument("toeplitz_ls_fit: negative weight");
        weight_sum += t.weight;
    }
    if (!(weight_sum > 0.0))
        throw std::invalid_argument("toeplitz_ls_fit: all weights are zero");

    // c[l + N - 1] = weighted mean of the target entries on diagonal
    // j = i + l, for l = -N+1, ..., n_cols-1.
    const Eigen::Index n_diag = n_rows + n_cols - 1;
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(n_diag);
    for (const auto& t : targets) {
        if (t.weight == 0.0) continue;
        for (Eigen::Index i = 0; i < n_rows; ++i)
            for (Eigen::Index j = 0; j < n_cols; ++j)
                sums[j - i + n_rows - 1] += t.weight * t.matrix(i, j);
    }

    Eigen::VectorXd coeffs(n_diag);
    for (Eigen::Index idx = 0; idx < n_diag; ++idx) {
        const Eigen::Index l = idx - (n_rows - 1);
        const Eigen::Index lo = std::max<Eigen::Index>(0, -l);
        const Eigen::Index hi = std::min(n_rows - 1, n_cols - 1 - l);
        const double diag_len = static_cast<double>(hi - lo + 1);
        coeffs[idx] = sums[idx] / (diag_len * weight_sum);
    }

    // Generator index t = i - j = -l runs opposite to the diagonal index.
    Eigen::VectorXd generator = coeffs.reverse();
    ToeplitzFit fit{std::move(coeffs), RegressorMatrix::from_generator(generator, n_rows, n_cols)};
    return fit;
}

}  // namespace lcid
