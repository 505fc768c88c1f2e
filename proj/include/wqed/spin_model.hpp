#pragma once

#include <limits>
#include <optional>

#include "wqed/basis.hpp"
#include "wqed/level_scheme.hpp"

namespace wqed {

/// Dispersive s-s interaction plus on-site exclusion. u_ss(i,j) is the energy
/// of the pair state |s_i s_j>, entering the Hamiltonian as
/// (1/2) sum_ij u_ss(i,j) s_i^+ s_j^+ s_j s_i. With hardcore = true double
/// occupation of a site is excluded exactly; a finite u0 keeps it as an
/// on-site energy penalty instead.
struct InteractionSpec {
    RealMatrix u_ss;  // N x N, symmetric, zero diagonal
    bool hardcore = true;
    double u0 = std::numeric_limits<double>::infinity();

    static InteractionSpec none(int n_sites);
    /// Constant infinite-range interaction: every pair |s_i s_j>, i != j,
    /// costs energy c.
    static InteractionSpec constant(int n_sites, double c);

    bool any_nonzero() const;
    void validate(int n_sites) const;
};

/// Constant coherent drive entering the right-going channel. The drive frame
/// co-rotates with the field, so the generator stays time independent.
struct DriveSpec {
    double amplitude = 1e-6;  // E, in reference-rate units
    double detuning = 0.0;    // Delta = delta - delta_L, two-photon detuning
};

/// Full physical configuration: geometry, level scheme, interactions, drive.
struct SpinModel {
    Geometry geometry;
    LevelScheme levels;
    InteractionSpec interaction;
    std::optional<DriveSpec> drive;

    int n_sites() const { return geometry.n_sites(); }
    double detuning() const { return drive ? drive->detuning : 0.0; }
    void validate() const;

    SpinModel with_detuning(double delta) const;
    SpinModel with_constant_interaction(double c) const;

    /// Short digest of all parameters, for provenance records.
    std::string digest() const;
};

}  // namespace wqed
