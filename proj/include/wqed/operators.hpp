#pragma once

#include <vector>

#include "wqed/spin_model.hpp"

namespace wqed {

/// Non-Hermitian effective Hamiltonian in the frame co-rotating with the
/// drive: -(delta_L + Delta + i Gamma'/2) on sum a^+a, -Delta on sum s^+s,
/// -Omega sum (a^+s + s^+a), the waveguide-mediated term
/// -i (Gamma_1D/2) sum_jl exp(i k_in |z_j - z_l|) a_j^+ a_l, and the s-s
/// interaction (1/2) sum u_ss(i,j) s_i^+ s_j^+ s_j s_i. Without a drive,
/// Delta = 0. Commutes with total excitation number.
SparseOperator effective_hamiltonian(const SpinModel& model,
                                     const FewExcitationBasis& basis);

/// Hermitian drive term E sum_j (a_j^+ e^{i k_in z_j} + h.c.); time
/// independent because the co-rotating frame absorbed exp(-i Delta t).
SparseOperator drive_hamiltonian(const SpinModel& model,
                                 const FewExcitationBasis& basis);

/// Collective decay channels into the right/left-going guided modes plus the
/// independent per-site loss channels at rate Gamma'.
struct JumpOperators {
    SparseOperator right;  // O_+ = sqrt(Gamma_1D/4) sum_j a_j e^{-i k_in z_j}
    SparseOperator left;   // O_- = sqrt(Gamma_1D/4) sum_j a_j e^{+i k_in z_j}
    std::vector<SparseOperator> local;  // sqrt(Gamma'/2) a_j, one per site
};
JumpOperators jump_operators(const SpinModel& model, const FewExcitationBasis& basis);

enum class Direction { Right, Left };

/// Output field just past the chain, as scalar offset plus spin operator:
/// b_out = offset + op. Right-going: E e^{i k z_R} - i(Gamma_1D/2) sum_j
/// a_j e^{i k (z_R - z_j)}; left-going uses z_L, conjugated phases, no offset.
struct OutputFieldOperator {
    Complex offset{0.0, 0.0};
    SparseOperator op;

    Vector apply(const Vector& state) const { return offset * state + op * state; }
};
OutputFieldOperator output_field_operator(const SpinModel& model,
                                          const FewExcitationBasis& basis,
                                          Direction direction);

/// Lowering operator sum_j c_j a_j with one coefficient per site.
SparseOperator weighted_lowering(const FewExcitationBasis& basis,
                                 const Vector& site_coefficients);

/// Lindblad generator acting on a density matrix:
/// L[rho] = -i (H rho - rho H^+) + sum_v 2 O_v rho O_v^+ (+ Gamma' channels),
/// with H the effective Hamiltonian plus drive. Cache this when applying
/// repeatedly; liouvillian_apply builds it per call.
struct MasterEquation {
    DenseMatrix h;                    // H_eff + H_drive, dense
    std::vector<DenseMatrix> jumps;   // O_+, O_-, sqrt(Gamma'/2) a_j

    DenseMatrix apply(const DenseMatrix& rho) const;
    static MasterEquation build(const SpinModel& model, const FewExcitationBasis& basis);
};

DenseMatrix liouvillian_apply(const SpinModel& model, const FewExcitationBasis& basis,
                              const DenseMatrix& rho);

}  // namespace wqed
