#pragma once

#include <numbers>
#include <vector>

#include "wqed/types.hpp"

namespace wqed {

enum class LevelKind { TwoLevel, ThreeLevelEIT };

/// Atomic level structure and rates, all in units of one reference rate.
/// The total linewidth is always derived as gamma_prime + gamma_1d.
struct LevelScheme {
    LevelKind kind = LevelKind::TwoLevel;
    double gamma_1d = 1.0;     // emission rate into the guided modes
    double gamma_prime = 0.0;  // emission rate into all other channels
    double rabi = 0.0;         // control-field Rabi frequency (EIT only)
    double delta_l = 0.0;      // control-field detuning (EIT only)

    double gamma_total() const { return gamma_1d + gamma_prime; }
    int modes_per_site() const { return kind == LevelKind::TwoLevel ? 1 : 2; }
    void validate() const;

    static LevelScheme two_level(double gamma_1d, double gamma_prime = 0.0);
    static LevelScheme eit(double gamma_1d, double gamma_prime, double rabi,
                           double delta_l = 0.0);
};

/// Atom positions along the waveguide, c = 1 units.
struct Geometry {
    std::vector<double> positions;           // strictly increasing
    double k_in = std::numbers::pi / 2.0;    // input wavenumber (rad/length)

    int n_sites() const { return static_cast<int>(positions.size()); }
    double z_left() const { return positions.empty() ? 0.0 : positions.front(); }
    double z_right() const { return positions.empty() ? 0.0 : positions.back(); }
    /// Lattice spacing; requires a uniform lattice.
    double spacing() const;
    bool is_uniform_lattice(double tol = 1e-12) const;
    void validate() const;

    /// z_j = j*d with k_in*d = phase. Default phase pi/2 suppresses
    /// reflection from the chain by destructive interference.
    static Geometry lattice(int n_sites, double phase = std::numbers::pi / 2.0,
                            double d = 1.0);
};

}  // namespace wqed
