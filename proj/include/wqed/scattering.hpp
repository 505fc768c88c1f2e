#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>

#include "wqed/eigensolver.hpp"
#include "wqed/spin_model.hpp"

namespace wqed {

/// Single-excitation Hamiltonian over the slots {|a_i>, |s_i>} with energies
/// measured as two-photon detuning (omega = 0 at the EIT dark resonance).
/// Uses the -Omega sign convention of the effective Hamiltonian throughout;
/// all derived observables are invariant under the s -> -s gauge.
DenseMatrix single_particle_hamiltonian(const SpinModel& model);

/// G0(omega) = (omega - H1)^{-1} by direct dense solve.
DenseMatrix green_function(const DenseMatrix& h1, double omega);

/// Frequency- or position-resolved scattering data with axes and provenance.
struct ScatteringResult {
    std::string kind;
    std::vector<std::string> axis_names;
    std::vector<std::vector<double>> axes;
    std::map<std::string, std::vector<Complex>> series;
    std::string provenance;
    double e_total = 0.0;
    double k_rel = 0.0;
};

/// Interacting pair states: the four same-site channels per site plus every
/// ordered pair |s_i s_j>, i != j, with nonzero interaction.
struct PairSupport {
    std::vector<std::pair<int, int>> states;  // product-space slot pairs
    std::vector<double> u;                    // pair energy; +inf marks hardcore
    std::size_t size() const { return states.size(); }
};
PairSupport pair_support(const SpinModel& model);

/// Caches the single-particle matrix, its bi-orthogonal eigensystem and the
/// interaction support for repeated frequency-domain evaluations.
class ScatteringEngine {
  public:
    explicit ScatteringEngine(const SpinModel& model);

    const SpinModel& model() const { return model_; }
    const DenseMatrix& h1() const { return h1_; }
    const Eigensystem& eigensystem() const;
    const PairSupport& support() const { return support_; }

    Complex transmission(double omega) const;
    Complex reflection(double omega) const;

    /// Vacuum bubble (E - H2)^{-1} restricted to the support.
    DenseMatrix pair_propagator(double e_total) const;
    /// T(E) = (U^{-1} - Pi0(E))^{-1} on the support; hardcore rows carry
    /// U^{-1} = 0 exactly.
    DenseMatrix t_matrix(double e_total) const;

    /// [w(k1,k2)]_P = sum_{j1 j2} e^{i k(z_j1 + z_j2)} G0(k1)_{P1,a_j1} G0(k2)_{P2,a_j2}.
    Vector w_vector(double k1, double k2) const;

    /// Connected part of the transmitted two-photon S-matrix (without the
    /// Kronecker-delta linear term).
    Complex connected(double k1, double k2, double p1, double p2) const;

    /// psi_tilde(x) = 2 pi e^{-i E x_c} psi(x_c, x).
    std::vector<Complex> wavefunction(double e_total, double k_rel,
                                      std::span<const double> x_grid) const;

  private:
    Vector a_phase_vector(double sign) const;
    Vector leg_vector(double k1, double k2, double phase_sign) const;

    SpinModel model_;
    DenseMatrix h1_;
    PairSupport support_;
    mutable std::optional<Eigensystem> es_;
};

/// Complex transmission and reflection amplitudes over a frequency grid.
ScatteringResult transmission_spectrum(const SpinModel& model,
                                       std::span<const double> omega_grid);

DenseMatrix pair_propagator(const Eigensystem& es, double e_total,
                            const PairSupport& support);
DenseMatrix t_matrix_from_propagator(const DenseMatrix& pi0, const PairSupport& support);

/// Full transmitted two-photon S-matrix element, with Kronecker deltas
/// interpreted on the caller's frequency grid (grid_tol equality).
Complex two_photon_smatrix(const SpinModel& model, double k1, double k2, double p1,
                           double p2, double grid_tol = 1e-9);

/// Relative-coordinate two-photon wavefunction at total energy E and relative
/// momentum k_rel; stores psi_tilde = 2 pi e^{-i E x_c} psi(x_c, x).
ScatteringResult two_photon_wavefunction(const SpinModel& model, double e_total,
                                         double k_rel, std::span<const double> x_grid);

/// g2(x) = |pi psi(x_c,x) / T_{E/2}^2|^2 for equal input momenta.
ObservableSeries g2_from_wavefunction(const ScatteringResult& psi, Complex t_half);

/// Closed-form connected n-photon kernel for a single two-level atom coupled
/// to a monodirectional line (n <= 3): the coefficient of the overall energy
/// delta function, summed over the (n!)^2 pairings.
Complex single_atom_connected_kernel(int n, std::span<const double> k,
                                     std::span<const double> p, double gamma,
                                     double omega_eg);

}  // namespace wqed
