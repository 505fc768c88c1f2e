#include "wqed/linear_optics.hpp"

#include <cmath>
#include <cstdio>

#include "wqed/eigensolver.hpp"
#include "wqed/scattering.hpp"

namespace wqed {

Complex susceptibility(const LevelScheme& levels, double delta) {
    const Complex pole(delta, levels.gamma_total() / 2.0);
    if (levels.kind == LevelKind::TwoLevel) return 1.0 / pole;
    const double d2 = delta - levels.delta_l;
    return d2 / (pole * d2 - levels.rabi * levels.rabi);
}

double effective_detuning(const LevelScheme& levels, double delta) {
    if (levels.kind == LevelKind::TwoLevel) return delta;
    const double d2 = delta - levels.delta_l;
    if (d2 == 0.0) return std::numeric_limits<double>::infinity();
    return delta - levels.rabi * levels.rabi / d2;
}

Complex atom_reflection(const LevelScheme& levels, double delta) {
    const double de = effective_detuning(levels, delta);
    if (std::isinf(de)) return Complex(0.0, 0.0);  // exact transparency
    return -kI * (levels.gamma_1d / 2.0) /
           Complex(de, levels.gamma_total() / 2.0);
}

TransferMatrix atom_transfer_matrix(const LevelScheme& levels, double delta) {
    const Complex r = atom_reflection(levels, delta);
    const Complex t = 1.0 + r;
    if (std::abs(t) < 1e-300)
        throw NumericalError("transfer matrix undefined at zero transmission");
    TransferMatrix m;
    m.m << (t * t - r * r) / t, r / t, -r / t, 1.0 / t;
    return m;
}

TransferMatrix free_propagation(double phase) {
    TransferMatrix m;
    m.m << std::exp(kI * phase), 0.0, 0.0, std::exp(-kI * phase);
    return m;
}

namespace {

// scattering-matrix (Redheffer) composition; stays finite through opaque
// elements where the raw transfer matrix is singular
struct ScatterElement {
    Complex r_left, t_right, t_left, r_right;  // S11, S21, S12, S22
};

ScatterElement combine(const ScatterElement& a, const ScatterElement& b) {
    const Complex denom = 1.0 - a.r_right * b.r_left;
    if (std::abs(denom) < 1e-300)
        throw NumericalError("chain sits exactly on a mirror-cavity resonance");
    ScatterElement s;
    s.r_left = a.r_left + a.t_left * b.r_left * a.t_right / denom;
    s.t_right = b.t_right * a.t_right / denom;
    s.t_left = a.t_left * b.t_left / denom;
    s.r_right = b.r_right + b.t_right * a.r_right * b.t_left / denom;
    return s;
}

}  // namespace

std::vector<ReflectionTransmission> chain_spectrum(const SpinModel& model,
                                                   std::span<const double> delta_grid) {
    model.validate();
    const auto& z = model.geometry.positions;
    const double k = model.geometry.k_in;
    const int n = model.n_sites();

    std::vector<ReflectionTransmission> out;
    out.reserve(delta_grid.size());
    for (double delta : delta_grid) {
        ScatterElement chain{0.0, 1.0, 1.0, 0.0};
        if (n > 0) {
            const Complex beta = atom_reflection(model.levels, delta);
            const ScatterElement atom{beta, 1.0 + beta, 1.0 + beta, beta};
            chain = atom;
            for (int j = 1; j < n; ++j) {
                const Complex phase = std::exp(kI * k * (z[j] - z[j - 1]));
                chain = combine(chain, ScatterElement{0.0, phase, phase, 0.0});
                chain = combine(chain, atom);
            }
        }
        out.push_back({chain.r_left, chain.t_right});
    }
    return out;
}

EITParameters eit_parameters(double gamma_1d, double gamma_total, double rabi,
                             int n_sites, double d) {
    if (!(gamma_1d > 0.0) || !(gamma_total > 0.0) || !(rabi > 0.0) || n_sites < 1)
        throw ModelError("EIT parameters need positive rates and at least one atom");
    EITParameters p;
    p.optical_depth = n_sites * 2.0 * gamma_1d / gamma_total;
    p.group_velocity = 2.0 * rabi * rabi * d / gamma_1d;
    p.bandwidth = 2.0 * rabi * rabi / (gamma_total * std::sqrt(p.optical_depth));
    p.min_pulse_length = p.group_velocity / p.bandwidth;
    return p;
}

EITParameters eit_parameters(const SpinModel& model) {
    if (model.levels.kind != LevelKind::ThreeLevelEIT)
        throw ModelError("EIT parameters need the three-level scheme");
    return eit_parameters(model.levels.gamma_1d, model.levels.gamma_total(),
                          model.levels.rabi, model.n_sites(),
                          model.geometry.spacing());
}

Complex bloch_frequency(const SpinModel& model, double q) {
    // cell trace/2 with free phase phi: [e^{i phi}(1 + 2 beta) + e^{-i phi}]/(2(1+beta))
    // solved for beta, then for delta through the effective detuning.
    const double d = model.geometry.spacing();
    const double phi = model.geometry.k_in * d;
    const Complex cq = std::cos(q * d);
    const Complex ephi = std::exp(kI * phi);
    // cq = [ephi (1+2b) + conj(ephi)] / (2 (1+b))  =>  b = (2 cq - ephi - conj(ephi)) / (2 ephi - 2 cq)
    const Complex beta =
        (2.0 * cq - ephi - std::conj(ephi)) / (2.0 * (ephi - cq));
    const auto& lv = model.levels;
    if (lv.kind == LevelKind::TwoLevel) {
        if (std::abs(beta) < 1e-14)
            throw NumericalError("two-level Bloch branch diverges at transparency");
        return -kI * lv.gamma_1d / (2.0 * beta) - kI * lv.gamma_total() / 2.0;
    }
    // beta (delta_eff + i Gamma/2) = -i Gamma_1D/2 with
    // delta_eff = delta - Omega^2/(delta - delta_L) gives a quadratic in delta
    // that stays regular at beta -> 0 (exact transparency, delta -> delta_L):
    // beta delta^2 + (i(Gamma_1D + beta Gamma)/2 - beta delta_L) delta
    //   - beta Omega^2 - i(Gamma_1D + beta Gamma) delta_L / 2 = 0
    const Complex a = beta;
    const Complex gsum = kI * (lv.gamma_1d + beta * lv.gamma_total()) / 2.0;
    const Complex b = gsum - beta * lv.delta_l;
    const Complex c = -beta * lv.rabi * lv.rabi - gsum * lv.delta_l;
    Complex delta;
    if (std::abs(a) < 1e-14 * std::abs(b)) {
        delta = -c / b;
    } else {
        const Complex disc = std::sqrt(b * b - 4.0 * a * c);
        const Complex r1 = (-b + disc) / (2.0 * a), r2 = (-b - disc) / (2.0 * a);
        delta = std::abs(r1 - Complex(lv.delta_l, 0.0)) <
                        std::abs(r2 - Complex(lv.delta_l, 0.0))
                    ? r1
                    : r2;
    }
    return delta - lv.delta_l;  // two-photon detuning of the dark branch
}

Vector bloch_propagate_profile(const SpinModel& model, const Vector& profile,
                               double t) {
    const int n = model.n_sites();
    if (profile.size() != n) throw ModelError("profile needs one amplitude per site");
    const double d = model.geometry.spacing();

    // plain DFT over the chain; q_m = 2 pi m / (N d), folded to the first zone
    Vector fq = Vector::Zero(n);
    for (int m = 0; m < n; ++m) {
        Complex acc{0.0, 0.0};
        for (int j = 0; j < n; ++j)
            acc += profile[j] *
                   std::exp(-kI * (2.0 * std::numbers::pi * m * j / n));
        fq[m] = acc / static_cast<double>(n);
    }
    Vector out = Vector::Zero(n);
    for (int m = 0; m < n; ++m) {
        if (std::abs(fq[m]) < 1e-14) continue;
        double q = 2.0 * std::numbers::pi * m / (n * d);
        if (q * d > std::numbers::pi) q -= 2.0 * std::numbers::pi / d;
        const Complex freq = bloch_frequency(model, q);
        const Complex amp = fq[m] * std::exp(-kI * freq * t);
        for (int j = 0; j < n; ++j)
            out[j] += amp * std::exp(kI * (2.0 * std::numbers::pi * m * j / n));
    }
    return out;
}

double t2_estimate_small_detuning(double t1) {
    if (t1 < 0.0) throw ModelError("T1 must be non-negative");
    return std::sqrt(t1);
}

Vector localized_photon_profile(const SpinModel& model, double delta) {
    DenseMatrix h1 = single_particle_hamiltonian(model);
    h1.diagonal().array() -= (delta - model.levels.delta_l);
    const int m = model.levels.modes_per_site();
    Vector drive = Vector::Zero(h1.rows());
    for (int j = 0; j < model.n_sites(); ++j)
        drive[j * m] =
            std::exp(kI * model.geometry.k_in * model.geometry.positions[j]);
    const Vector psi = (-h1).partialPivLu().solve(drive);
    return psi / psi.norm();
}

double t2_estimate_large_detuning(const SpinModel& model, double delta) {
    if (model.levels.kind != LevelKind::ThreeLevelEIT)
        throw ModelError("the localized-photon estimate needs the EIT scheme");
    const Vector psi0 = localized_photon_profile(model, delta);

    // propagate through the transparent medium (two-photon resonance)
    const DenseMatrix h_res = single_particle_hamiltonian(model);
    const Eigensystem es = eigendecompose(h_res);

    // right-going emission amplitude O|psi> = (sum_j o_j psi_aj) |vac>
    const int m = model.levels.modes_per_site();
    Vector o = Vector::Zero(h_res.rows());
    for (int j = 0; j < model.n_sites(); ++j)
        o[j * m] = std::sqrt(model.levels.gamma_1d / 4.0) *
                   std::exp(-kI * model.geometry.k_in * model.geometry.positions[j]);

    // The symmetrized two-photon wavefunction feeds the both-inside region
    // through two exchange-equivalent edges, each carrying half of the
    // localized profile's weight; the estimate is twice the transmitted
    // probability of that half-weighted boundary excitation.
    const Vector boundary = psi0 / std::sqrt(2.0);

    // cumulative right flux 2 int_0^inf |o^T psi(t)|^2 dt in the eigenbasis
    const Vector u = (es.right.transpose() * o).cwiseProduct(es.expand(boundary));
    double flux = 0.0;
    const auto s = es.dim();
    for (Eigen::Index l = 0; l < s; ++l)
        for (Eigen::Index j = 0; j < s; ++j) {
            const Complex z =
                kI * (std::conj(es.eigenvalues[l]) - es.eigenvalues[j]);
            if (z.real() >= -1e-14)
                throw NumericalError("non-decaying mode in the flux integral");
            flux += (-std::conj(u[l]) * u[j] / z).real();
        }
    return 2.0 * 2.0 * flux;  // master-equation flux 2<O^+O>, then the factor 2
}

T2Estimates t2_estimates(const SpinModel& model, double delta, double t1) {
    const EITParameters p = eit_parameters(model);
    T2Estimates est;
    est.delta_below_bandwidth = std::abs(delta) < p.bandwidth;
    est.small_detuning = t2_estimate_small_detuning(t1);
    est.large_detuning = t2_estimate_large_detuning(model, delta);
    return est;
}

}  // namespace wqed
