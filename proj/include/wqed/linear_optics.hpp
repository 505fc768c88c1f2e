#pragma once

#include <span>

#include "wqed/spin_model.hpp"

namespace wqed {

/// Linear susceptibility in arbitrary units (proportionality constant 1).
/// Two-level: 1/(delta + i Gamma/2); three-level:
/// (delta - delta_L)/((delta + i Gamma/2)(delta - delta_L) - Omega^2).
Complex susceptibility(const LevelScheme& levels, double delta);

/// Effective detuning seen by the g-e transition: delta for a two-level atom,
/// delta - Omega^2/(delta - delta_L) under EIT.
double effective_detuning(const LevelScheme& levels, double delta);

/// Single-atom reflection beta(delta) = -i(Gamma_1D/2)/(delta_eff + i Gamma/2)
/// with Gamma the total linewidth.
Complex atom_reflection(const LevelScheme& levels, double delta);

/// 2x2 transfer matrix of one atom; free segments are diagonal phases.
struct TransferMatrix {
    Eigen::Matrix2cd m;
};
TransferMatrix atom_transfer_matrix(const LevelScheme& levels, double delta);
TransferMatrix free_propagation(double phase);

struct ReflectionTransmission {
    Complex r, t;
};

/// Chain reflection/transmission per detuning by transfer-matrix composition.
/// Independent of the Green's-function machinery; the two must agree.
std::vector<ReflectionTransmission> chain_spectrum(const SpinModel& model,
                                                   std::span<const double> delta_grid);

struct EITParameters {
    double optical_depth = 0.0;     // D = N 2 Gamma_1D / Gamma
    double group_velocity = 0.0;    // v_g = 2 Omega^2 d / Gamma_1D
    double bandwidth = 0.0;         // Delta_EIT = 2 Omega^2/(Gamma sqrt(D))
    double min_pulse_length = 0.0;  // sigma_EIT = v_g / Delta_EIT
};
EITParameters eit_parameters(const SpinModel& model);
/// Same formulas with an explicit total linewidth, for parameter sets that
/// quote Gamma independently of Gamma_1D + Gamma'.
EITParameters eit_parameters(double gamma_1d, double gamma_total, double rabi,
                             int n_sites, double d);

/// Complex Bloch frequency Delta(q) of the dark polariton branch: solves
/// cos(q d) = tr M(delta)/2 for the root nearest the two-photon resonance.
Complex bloch_frequency(const SpinModel& model, double q);

/// Evolves a single-excitation spin-wave profile (s amplitudes per site)
/// through the Bloch dispersion for time t: the transfer-matrix prediction
/// for polariton transport.
Vector bloch_propagate_profile(const SpinModel& model, const Vector& profile,
                               double t);

/// sqrt(T1) estimate of the two-photon transmission, valid for detunings
/// inside the transparency window.
double t2_estimate_small_detuning(double t1);

/// Large-detuning estimate: twice the asymptotic transmitted probability of a
/// single excitation initialized from the driven steady-state profile at
/// detuning delta and propagated through the transparent medium.
double t2_estimate_large_detuning(const SpinModel& model, double delta);

struct T2Estimates {
    double small_detuning = 0.0;
    double large_detuning = 0.0;
    bool delta_below_bandwidth = false;  // which regime the detuning is in
};
/// Both estimates, tagged with the regime; callers outside the matching
/// regime get a stderr warning.
T2Estimates t2_estimates(const SpinModel& model, double delta, double t1);

/// Driven single-excitation steady-state profile (a and s amplitudes), used
/// as the localized-photon initial condition of the large-detuning estimate.
Vector localized_photon_profile(const SpinModel& model, double delta);

}  // namespace wqed
