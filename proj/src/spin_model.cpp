#include "wqed/spin_model.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

namespace wqed {

InteractionSpec InteractionSpec::none(int n_sites) {
    InteractionSpec s;
    s.u_ss = RealMatrix::Zero(n_sites, n_sites);
    return s;
}

InteractionSpec InteractionSpec::constant(int n_sites, double c) {
    InteractionSpec s;
    s.u_ss = RealMatrix::Constant(n_sites, n_sites, c);
    s.u_ss.diagonal().setZero();
    return s;
}

bool InteractionSpec::any_nonzero() const {
    return u_ss.size() > 0 && u_ss.cwiseAbs().maxCoeff() != 0.0;
}

void InteractionSpec::validate(int n_sites) const {
    if (u_ss.rows() != n_sites || u_ss.cols() != n_sites)
        throw ModelError("interaction matrix must be N x N");
    if (u_ss.size() > 0) {
        if (!u_ss.isApprox(u_ss.transpose(), 1e-12))
            throw ModelError("interaction matrix must be symmetric");
        if (u_ss.diagonal().cwiseAbs().maxCoeff() > 0.0)
            throw ModelError("interaction matrix must have zero diagonal");
        if (!u_ss.allFinite()) throw ModelError("interaction entries must be finite");
    }
    if (!hardcore && !(u0 > 0.0))
        throw ModelError("finite-u0 mode requires u0 > 0");
}

void SpinModel::validate() const {
    geometry.validate();
    levels.validate();
    interaction.validate(n_sites());
    if (drive) {
        if (drive->amplitude < 0.0) throw ModelError("drive amplitude must be >= 0");
        if (drive->amplitude > 1e-2 * levels.gamma_total())
            std::fprintf(stderr,
                         "wqed: warning: drive amplitude %.3g exceeds 1e-2 Gamma; "
                         "weak-drive truncation may be inaccurate\n",
                         drive->amplitude);
    }
}

SpinModel SpinModel::with_detuning(double delta) const {
    SpinModel m = *this;
    if (!m.drive) m.drive = DriveSpec{};
    m.drive->detuning = delta;
    return m;
}

SpinModel SpinModel::with_constant_interaction(double c) const {
    SpinModel m = *this;
    m.interaction.u_ss = RealMatrix::Constant(n_sites(), n_sites(), c);
    m.interaction.u_ss.diagonal().setZero();
    return m;
}

std::string SpinModel::digest() const {
    std::size_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](double v) {
        std::size_t x = std::hash<double>{}(v);
        h = (h ^ x) * 0x100000001b3ull;
    };
    for (double z : geometry.positions) mix(z);
    mix(geometry.k_in);
    mix(static_cast<double>(levels.kind == LevelKind::TwoLevel ? 2 : 3));
    mix(levels.gamma_1d);
    mix(levels.gamma_prime);
    mix(levels.rabi);
    mix(levels.delta_l);
    for (int i = 0; i < interaction.u_ss.rows(); ++i)
        for (int j = 0; j < interaction.u_ss.cols(); ++j) mix(interaction.u_ss(i, j));
    mix(interaction.hardcore ? 1.0 : 0.0);
    mix(interaction.u0);
    mix(drive ? drive->amplitude : -1.0);
    mix(drive ? drive->detuning : 0.0);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016zx", h);
    return buf;
}

}  // namespace wqed
