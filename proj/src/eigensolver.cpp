#include "wqed/eigensolver.hpp"

#include <cmath>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace wqed {

Vector Eigensystem::propagate(const Vector& psi, double t) const {
    Vector c = left_inv * psi;
    for (Eigen::Index l = 0; l < c.size(); ++l)
        c[l] *= std::exp(-kI * eigenvalues[l] * t);
    return right * c;
}

Eigensystem eigendecompose(const DenseMatrix& h) {
    if (h.rows() != h.cols()) throw ModelError("matrix must be square");
    const auto n = static_cast<lapack_int>(h.rows());

    Eigensystem es;
    es.eigenvalues.resize(n);
    es.right.resize(n, n);
    DenseMatrix a = h;  // zgeev overwrites its input

    const lapack_int info = LAPACKE_zgeev(
        LAPACK_COL_MAJOR, 'N', 'V', n, a.data(), n, es.eigenvalues.data(), nullptr,
        1, es.right.data(), n);
    if (info != 0)
        throw NumericalError("zgeev failed with info = " + std::to_string(info));

    Eigen::PartialPivLU<DenseMatrix> lu(es.right);
    es.left_inv = lu.inverse();

    const double residual =
        (es.right * es.left_inv - DenseMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!std::isfinite(residual) || residual > 1e-8)
        throw NumericalError(
            "eigenvector matrix is numerically singular (residual " +
            std::to_string(residual) + "); matrix may be defective");
    return es;
}

}  // namespace wqed
