#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace wqed {

using Complex = std::complex<double>;
using SparseOperator = Eigen::SparseMatrix<Complex>;
using DenseMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr Complex kI{0.0, 1.0};

/// Enumerated space would exceed the configured dimension cap.
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid physical configuration or argument.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical breakdown: singular solve, degenerate denominator, stiffness.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Named series over a grid (time, detuning or position) with a provenance
/// record sufficient to reproduce the run.
struct ObservableSeries {
    std::string name;
    std::vector<double> grid;
    std::vector<Complex> values;
    std::string provenance;

    double real_at(std::size_t i) const { return values[i].real(); }
};

}  // namespace wqed
