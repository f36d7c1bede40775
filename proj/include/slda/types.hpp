#ifndef SLDA_TYPES_HPP
#define SLDA_TYPES_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace slda {

// Row-major so phi.row(k) is contiguous; inner loops run over words within a row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Thrown when a computation produces NaN/Inf or an otherwise unusable value.
// The CLI maps this to exit code 3.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on file I/O failures (unreadable/unwritable paths, parse errors).
// The CLI maps this to exit code 1.
struct io_error : std::runtime_error {
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace slda

#endif
