#include "wqed/level_scheme.hpp"

#include <cmath>

namespace wqed {

void LevelScheme::validate() const {
    if (!(gamma_1d > 0.0)) throw ModelError("gamma_1d must be positive");
    if (gamma_prime < 0.0) throw ModelError("gamma_prime must be non-negative");
    if (rabi < 0.0) throw ModelError("rabi must be non-negative");
    if (kind == LevelKind::TwoLevel && (rabi != 0.0 || delta_l != 0.0))
        throw ModelError("two-level scheme has no control field (rabi, delta_l)");
}

LevelScheme LevelScheme::two_level(double gamma_1d, double gamma_prime) {
    LevelScheme s;
    s.kind = LevelKind::TwoLevel;
    s.gamma_1d = gamma_1d;
    s.gamma_prime = gamma_prime;
    s.validate();
    return s;
}

LevelScheme LevelScheme::eit(double gamma_1d, double gamma_prime, double rabi,
                             double delta_l) {
    LevelScheme s;
    s.kind = LevelKind::ThreeLevelEIT;
    s.gamma_1d = gamma_1d;
    s.gamma_prime = gamma_prime;
    s.rabi = rabi;
    s.delta_l = delta_l;
    s.validate();
    return s;
}

double Geometry::spacing() const {
    if (n_sites() < 2) return 1.0;
    if (!is_uniform_lattice())
        throw ModelError("geometry is not a uniform lattice");
    return positions[1] - positions[0];
}

bool Geometry::is_uniform_lattice(double tol) const {
    if (n_sites() < 3) return true;
    const double d = positions[1] - positions[0];
    for (int j = 2; j < n_sites(); ++j)
        if (std::abs(positions[j] - positions[j - 1] - d) > tol * std::max(1.0, d))
            return false;
    return true;
}

void Geometry::validate() const {
    for (std::size_t j = 1; j < positions.size(); ++j)
        if (!(positions[j] > positions[j - 1]))
            throw ModelError("positions must be strictly increasing");
    if (!(k_in > 0.0)) throw ModelError("k_in must be positive");
}

Geometry Geometry::lattice(int n_sites, double phase, double d) {
    if (n_sites < 0) throw ModelError("n_sites must be non-negative");
    Geometry g;
    g.k_in = phase / d;
    g.positions.resize(n_sites);
    for (int j = 0; j < n_sites; ++j) g.positions[j] = j * d;
    g.validate();
    return g;
}

}  // namespace wqed
