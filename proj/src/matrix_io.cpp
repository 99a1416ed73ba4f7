#include "lcid/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace lcid {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << m.rows() << "," << m.cols() << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ",";
            out << format_double(m(i, j));
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ": empty file, expected a rows,cols header");
    long rows = 0, cols = 0;
    char comma = 0;
    std::istringstream header(line);
    if (!(header >> rows >> comma >> cols) || comma != ',' || rows < 1 || cols < 1)
        throw std::runtime_error(path + ":1: malformed header, expected rows,cols");

    Eigen::MatrixXd m(rows, cols);
    for (long i = 0; i < rows; ++i) {
        if (!std::getline(in, line))
            throw std::runtime_error(path + ": expected " + std::to_string(rows) +
                                     " data rows, got " + std::to_string(i));
        std::istringstream row(line);
        std::string cell;
        for (long j = 0; j < cols; ++j) {
            if (!std::getline(row, cell, ','))
                throw std::runtime_error(path + ":" + std::to_string(i + 2) +
                                         ": expected " + std::to_string(cols) + " columns");
            try {
                size_t used = 0;
                m(i, j) = std::stod(cell, &used);
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
                    ++used;
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw std::runtime_error(path + ":" + std::to_string(i + 2) +
                                         ": cannot parse '" + cell + "' as a number");
            }
        }
        if (std::getline(row, cell, ','))
            throw std::runtime_error(path + ":" + std::to_string(i + 2) + ": too many columns");
    }
    return m;
}

void write_vector_csv(const std::string& path, const Eigen::VectorXd& v) {
    write_matrix_csv(path, v);
}

Eigen::VectorXd read_vector_csv(const std::string& path) {
    const Eigen::MatrixXd m = read_matrix_csv(path);
    if (m.cols() != 1)
        throw std::runtime_error(path + ": expected a single-column vector, got " +
                                 std::to_string(m.cols()) + " columns");
    return m.col(0);
}

}  // namespace lcid
