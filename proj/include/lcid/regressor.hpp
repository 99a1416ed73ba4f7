#pragma once

#include <Eigen/Dense>

namespace lcid {

/// N x n_theta Toeplitz regressor generated by a scalar input sequence:
/// entry (i, j) = u'(i - j) with 1-based i, j; the generator stores
/// u'(t) for t = 1 - n_theta, ..., N - 1 in increasing t.
class RegressorMatrix {
public:
    static RegressorMatrix from_generator(const Eigen::VectorXd& generator,
                                          Eigen::Index n_rows, Eigen::Index n_cols);

    /// Extracts the generator from a dense matrix; the matrix must be
    /// exactly Toeplitz (entries on a diagonal bitwise equal).
    static RegressorMatrix from_matrix(const Eigen::MatrixXd& m);

    const Eigen::MatrixXd& matrix() const { return matrix_; }
    const Eigen::VectorXd& generator() const { return generator_; }
    Eigen::Index rows() const { return matrix_.rows(); }
    Eigen::Index cols() const { return matrix_.cols(); }

    /// First m rows as a regressor over the same (truncated) generator.
    RegressorMatrix top_rows(Eigen::Index m) const;

private:
    RegressorMatrix() = default;
    Eigen::VectorXd generator_;  // size rows + cols - 1
    Eigen::MatrixXd matrix_;
};

}  // namespace lcid
