#pragma once

#include <optional>

#include "wqed/eigensolver.hpp"
#include "wqed/spin_model.hpp"

namespace wqed {

/// Two-excitation sector in the unsymmetrized product space C^{S*S},
/// S = site_count * modes_per_site. The waveguide sums are evaluated with
/// prefix/suffix sums, so one Hamiltonian application costs O(S^2) instead of
/// O(S^2 N). Hardcore exclusion is realized by projecting out same-site
/// entries. Used for the weak-drive hierarchy when the packed sector is too
/// large for a dense solve.
class TwoExcitationEngine {
  public:
    explicit TwoExcitationEngine(const SpinModel& model);

    Eigen::Index product_dim() const { return static_cast<Eigen::Index>(S_) * S_; }
    int n_slots() const { return S_; }

    /// y = P (-H2) P x; x is assumed already projected.
    void apply_neg_h2(const Vector& x, Vector& y) const;
    void project(Vector& x) const;

    /// Solves (-H2) phi = rhs by BiCGSTAB, preconditioned with the free
    /// two-excitation resolvent evaluated in the single-particle eigenbasis.
    Vector solve(const Vector& rhs, double tol = 1e-11, int max_iter = 20000) const;

    /// Symmetrized product-space vector (d (x) v + v (x) d)/sqrt(2), projected.
    Vector symmetrized_product(const Vector& d, const Vector& v) const;
    /// u(y) = sqrt(2) sum_j c_j phi(a_j, y): annihilation contracted with
    /// per-site coefficients c.
    Vector lower(const Vector& phi, const Vector& site_coefficients) const;

    /// Conversions between the product representation and packed sector-2
    /// amplitudes of the enumerated basis.
    Vector pack(const Vector& phi, const FewExcitationBasis& basis) const;
    Vector unpack(const Vector& packed, const FewExcitationBasis& basis) const;

  private:
    void apply_h1(const Complex* x, Complex* y) const;
    DenseMatrix h1_dense() const;
    void precondition(const Vector& x, Vector& y) const;

    int S_ = 0, n_ = 0, m_ = 1;
    double k_ = 0.0;
    double rabi_ = 0.0;
    Complex wg_{0.0, 0.0};
    std::vector<double> z_;
    std::vector<Complex> phase_pos_, phase_neg_;
    Vector h_diag_;
    Vector v_diag_;
    Vector neg_diag_;
    std::vector<Eigen::Index> same_site_;
    mutable std::optional<Eigensystem> es_;
};

}  // namespace wqed
