#include "lcid/regressor.hpp"

#include <stdexcept>
#include <string>

namespace lcid {

RegressorMatrix RegressorMatrix::from_generator(const Eigen::VectorXd& generator,
                                                Eigen::Index n_rows, Eigen::Index n_cols) {
    if (n_rows < 1 || n_cols < 1)
        throw std::invalid_argument("RegressorMatrix: dimensions must be positive");
    const Eigen::Index required = n_rows + n_cols - 1;
    if (generator.size() != required)
        throw std::invalid_argument("RegressorMatrix: generator must have " +
                                    std::to_string(required) + " samples (t = 1-n_theta ... N-1), got " +
                                    std::to_string(generator.size()));
    RegressorMatrix r;
    r.generator_ = generator;
    r.matrix_.resize(n_rows, n_cols);
    for (Eigen::Index i = 0; i < n_rows; ++i)
        for (Eigen::Index j = 0; j < n_cols; ++j)
            r.matrix_(i, j) = generator[i - j + n_cols - 1];
    return r;
}

RegressorMatrix RegressorMatrix::from_matrix(const Eigen::MatrixXd& m) {
    const Eigen::Index n_rows = m.rows();
    const Eigen::Index n_cols = m.cols();
    if (n_rows < 1 || n_cols < 1)
        throw std::invalid_argument("RegressorMatrix: dimensions must be positive");
    Eigen::VectorXd generator(n_rows + n_cols - 1);
    for (Eigen::Index j = n_cols - 1; j >= 0; --j) generator[n_cols - 1 - j] = m(0, j);
    for (Eigen::Index i = 1; i < n_rows; ++i) generator[i + n_cols - 1] = m(i, 0);
    RegressorMatrix r = from_generator(generator, n_rows, n_cols);
    for (Eigen::Index i = 0; i < n_rows; ++i)
        for (Eigen::Index j = 0; j < n_cols; ++j)
            if (r.matrix_(i, j) != m(i, j))
                throw std::invalid_argument("RegressorMatrix: matrix is not exactly Toeplitz at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
    return r;
}

RegressorMatrix RegressorMatrix::top_rows(Eigen::Index m) const {
    if (m < 1 || m > rows())
        throw std::invalid_argument("RegressorMatrix::top_rows: invalid row count");
    return from_generator(generator_.head(m + cols() - 1), m, cols());
}

}  // namespace lcid
