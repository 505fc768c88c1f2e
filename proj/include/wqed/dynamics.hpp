#pragma once

#include <functional>
#include <span>
#include <string>

#include "wqed/eigensolver.hpp"
#include "wqed/operators.hpp"
#include "wqed/pair_solver.hpp"

namespace wqed {

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<double> norms;
    std::string method;  // "eigenbasis" or "rk45"
    double rel_tol = 0.0;
    std::size_t steps = 0;
    std::size_t rejected = 0;
};

struct EvolveOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-13;
    std::size_t max_steps = 20000000;
    Eigen::Index dense_limit = 2100;  // eigenpropagate at or below this size
    bool force_rk = false;
};

/// Solves i dpsi/dt = H psi on the given time grid. Time-independent H: uses
/// the eigenbasis propagator for moderate dimensions, otherwise an adaptive
/// Dormand-Prince step with the stated relative tolerance.
Trajectory evolve(const SparseOperator& h_total, const Vector& psi0,
                  std::span<const double> t_grid, double rel_tol = 1e-8);
Trajectory evolve(const SparseOperator& h_total, const Vector& psi0,
                  std::span<const double> t_grid, const EvolveOptions& opts);

using OdeRhs = std::function<void(double, const Vector&, Vector&)>;

/// Adaptive Dormand-Prince 5(4) integration of a generic complex ODE,
/// recording the state at each grid time.
Trajectory integrate_ode(const OdeRhs& rhs, const Vector& y0,
                         std::span<const double> t_grid, const EvolveOptions& opts);

struct SteadyStateOptions {
    int max_order = 2;
    Eigen::Index dense_limit = 3000;  // packed sector size for direct solves
    double iter_tol = 1e-12;
    int max_iter = 40000;
};

/// Weak-drive steady state from the sector-by-sector hierarchy
/// (-H_eff^(n)) psi^(n) = (H_drive psi^(n-1))|_n, truncated at max_order <= 2.
/// Large two-excitation sectors are solved matrix-free in the product space.
Vector steady_state(const SpinModel& model, const FewExcitationBasis& basis,
                    const SteadyStateOptions& opts = {});

struct TransmissionMoments {
    double t1 = 0.0;  // <b+ b>/E^2
    double t2 = 0.0;  // <b+ b+ b b>/E^4
};
TransmissionMoments transmission_moments(const Vector& state, const SpinModel& model,
                                         const FewExcitationBasis& basis);

/// Photon coincidence g2(tau) for the driven chain: evolve to stationarity,
/// detect (apply the output operator), evolve for tau, detect again.
ObservableSeries g2_time(const SpinModel& model, const FewExcitationBasis& basis,
                         std::span<const double> tau_grid, double t_settle);

/// Normalized single-excitation spin wave f_j ~ e^{i k z_j} exp(-(z_j-mu)^2/(4 sigma_p^2)).
Vector gaussian_spin_wave(const Geometry& geometry, double sigma_p, double mu,
                          const FewExcitationBasis& basis);

struct SitePopulations {
    RealVector ss;  // <sigma_ss^j>
    RealVector ee;  // <sigma_ee^j>
};
SitePopulations polariton_populations(const Vector& state,
                                      const FewExcitationBasis& basis);

struct FockOptions {
    std::vector<double> radii;   // default {1, 2, 4} * 1e-4 * Gamma
    int phase_count = 0;         // default 4 (n_photons + 1)
    double residual_tol = 1e-5;
    double rel_tol = 1e-10;
    std::size_t dim_squared_cap = 4000000;
};

/// Response of the chain to an n-photon Fock input in a single monochromatic
/// drive mode: evolves the generating density matrix on a polar grid of drive
/// amplitudes and isolates the J^n (J*)^n coefficient by a phase DFT plus
/// Richardson extrapolation in the radius.
DenseMatrix fock_input_response(const SpinModel& model, int n_photons,
                                double drive_momentum, double t_final,
                                const FockOptions& opts = {});

}  // namespace wqed
