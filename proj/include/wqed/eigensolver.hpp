#pragma once

#include "wqed/types.hpp"

namespace wqed {

/// Bi-orthogonal eigendecomposition of a complex non-Hermitian matrix,
/// H = V diag(eps) V^{-1}. Rows of V^{-1} are the left eigenvectors,
/// normalized so <chi~_l | chi_m> = delta_lm.
struct Eigensystem {
    Vector eigenvalues;
    DenseMatrix right;     // columns chi_l
    DenseMatrix left_inv;  // V^{-1}

    Eigen::Index dim() const { return eigenvalues.size(); }

    /// exp(-i H t) psi via the eigenbasis.
    Vector propagate(const Vector& psi, double t) const;

    /// Coefficients of psi in the right-eigenvector basis.
    Vector expand(const Vector& psi) const { return left_inv * psi; }
    Vector reconstruct(const Vector& coeffs) const { return right * coeffs; }
};

/// Dense zgeev-based decomposition. Throws NumericalError when the
/// eigenvector matrix is numerically singular (defective matrix).
Eigensystem eigendecompose(const DenseMatrix& h);

}  // namespace wqed
