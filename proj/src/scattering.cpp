#include "wqed/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wqed {

namespace {

constexpr double kDegeneracyTol = 1e-10;

bool is_hardcore_energy(double u) { return std::isinf(u); }

}  // namespace

DenseMatrix single_particle_hamiltonian(const SpinModel& model) {
    model.validate();
    const auto& lv = model.levels;
    const auto& z = model.geometry.positions;
    const int n = model.n_sites();
    const int m = lv.modes_per_site();
    const int s = n * m;
    const Complex wg = -kI * (lv.gamma_1d / 2.0);

    DenseMatrix h = DenseMatrix::Zero(s, s);
    for (int j = 0; j < n; ++j) {
        h(j * m, j * m) = Complex(-lv.delta_l, -lv.gamma_prime / 2.0);
        if (m == 2) {
            h(j * m + 1, j * m + 1) = 0.0;
            h(j * m, j * m + 1) = -lv.rabi;
            h(j * m + 1, j * m) = -lv.rabi;
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            h(i * m, j * m) += wg * std::exp(kI * model.geometry.k_in *
                                             std::abs(z[i] - z[j]));
    return h;
}

DenseMatrix green_function(const DenseMatrix& h1, double omega) {
    const auto s = h1.rows();
    DenseMatrix a = -h1;
    a.diagonal().array() += omega;
    Eigen::PartialPivLU<DenseMatrix> lu(a);
    DenseMatrix g = lu.inverse();
    const double residual =
        (a * g - DenseMatrix::Identity(s, s)).cwiseAbs().maxCoeff();
    if (!std::isfinite(residual) || residual > 1e-9)
        throw NumericalError(
            "Green's function solve is near singular at omega = " +
            std::to_string(omega) + " (residual " + std::to_string(residual) + ")");
    return g;
}

PairSupport pair_support(const SpinModel& model) {
    const int n = model.n_sites();
    const int m = model.levels.modes_per_site();
    PairSupport sup;
    const double u0 = model.interaction.hardcore
                          ? std::numeric_limits<double>::infinity()
                          : model.interaction.u0;
    if (model.interaction.hardcore || std::isfinite(u0)) {
        for (int site = 0; site < n; ++site)
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) {
                    sup.states.emplace_back(site * m + a, site * m + b);
                    sup.u.push_back(u0);
                }
    }
    if (m == 2 && model.interaction.u_ss.size() > 0) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j || model.interaction.u_ss(i, j) == 0.0) continue;
                sup.states.emplace_back(i * m + 1, j * m + 1);
                sup.u.push_back(model.interaction.u_ss(i, j));
            }
    }
    return sup;
}

ScatteringEngine::ScatteringEngine(const SpinModel& model)
    : model_(model), h1_(single_particle_hamiltonian(model)),
      support_(pair_support(model)) {}

const Eigensystem& ScatteringEngine::eigensystem() const {
    if (!es_) es_ = eigendecompose(h1_);
    return *es_;
}

Vector ScatteringEngine::a_phase_vector(double sign) const {
    const int m = model_.levels.modes_per_site();
    Vector p = Vector::Zero(h1_.rows());
    for (int j = 0; j < model_.n_sites(); ++j)
        p[j * m] = std::exp(kI * sign * model_.geometry.k_in *
                            model_.geometry.positions[j]);
    return p;
}

Complex ScatteringEngine::transmission(double omega) const {
    if (model_.n_sites() == 0) return Complex(1.0, 0.0);
    DenseMatrix a = -h1_;
    a.diagonal().array() += omega;
    const Vector p = a_phase_vector(+1.0);
    const Vector x = a.partialPivLu().solve(p);
    return 1.0 - kI * (model_.levels.gamma_1d / 2.0) * p.dot(x);
}

Complex ScatteringEngine::reflection(double omega) const {
    if (model_.n_sites() == 0) return Complex(0.0, 0.0);
    DenseMatrix a = -h1_;
    a.diagonal().array() += omega;
    const Vector p = a_phase_vector(+1.0);
    const Vector x = a.partialPivLu().solve(p);
    return -kI * (model_.levels.gamma_1d / 2.0) * p.transpose() * x;
}

DenseMatrix ScatteringEngine::pair_propagator(double e_total) const {
    return wqed::pair_propagator(eigensystem(), e_total, support_);
}

DenseMatrix pair_propagator(const Eigensystem& es, double e_total,
                            const PairSupport& support) {
    const auto s = es.dim();
    const auto ns = static_cast<Eigen::Index>(support.size());
    // denominator check first: report the offending eigenvalue pair
    for (Eigen::Index l = 0; l < s; ++l)
        for (Eigen::Index lp = 0; lp < s; ++lp)
            if (std::abs(e_total - es.eigenvalues[l] - es.eigenvalues[lp]) <
                kDegeneracyTol)
                throw NumericalError(
                    "pair propagator denominator vanishes for eigenvalue pair (" +
                    std::to_string(l) + ", " + std::to_string(lp) +
                    "): perturb the total energy E");

    DenseMatrix denom_inv(s, s);
    for (Eigen::Index l = 0; l < s; ++l)
        for (Eigen::Index lp = 0; lp < s; ++lp)
            denom_inv(l, lp) =
                1.0 / (e_total - es.eigenvalues[l] - es.eigenvalues[lp]);

    const DenseMatrix& v = es.right;
    const DenseMatrix& w = es.left_inv;
    DenseMatrix pi0(ns, ns);
    DenseMatrix tmp(s, s), mp(s, s);
    for (Eigen::Index row = 0; row < ns; ++row) {
        const auto [x1, x2] = support.states[row];
        // tmp_{l l'} = chi_l(x1) chi_l'(x2) / (E - eps_l - eps_l')
        tmp = (v.row(x1).transpose() * v.row(x2)).cwiseProduct(denom_inv);
        mp.noalias() = w.transpose() * tmp * w;
        for (Eigen::Index col = 0; col < ns; ++col) {
            const auto [y1, y2] = support.states[col];
            pi0(row, col) = mp(y1, y2);
        }
    }
    return pi0;
}

DenseMatrix t_matrix_from_propagator(const DenseMatrix& pi0,
                                     const PairSupport& support) {
    const auto ns = static_cast<Eigen::Index>(support.size());
    DenseMatrix m = -pi0;
    for (Eigen::Index i = 0; i < ns; ++i)
        if (!is_hardcore_energy(support.u[i])) m(i, i) += 1.0 / support.u[i];
    Eigen::PartialPivLU<DenseMatrix> lu(m);
    DenseMatrix t = lu.inverse();
    const double residual =
        (m * t - DenseMatrix::Identity(ns, ns)).cwiseAbs().maxCoeff();
    if (!std::isfinite(residual) || residual > 1e-7)
        throw NumericalError(
            "(U^{-1} - Pi0) is numerically singular; E sits on a "
            "two-excitation bound resonance");
    return t;
}

DenseMatrix ScatteringEngine::t_matrix(double e_total) const {
    if (support_.size() == 0) return DenseMatrix::Zero(0, 0);
    return t_matrix_from_propagator(pair_propagator(e_total), support_);
}

Vector ScatteringEngine::w_vector(double k1, double k2) const {
    return leg_vector(k1, k2, +1.0);
}

// Incoming legs carry e^{+i k z} phases, outgoing legs e^{-i k z}; the
// Green's functions stay retarded either way (the time-ordered correlator
// has no anti-time-ordered legs), so only the phase sign flips.
Vector ScatteringEngine::leg_vector(double k1, double k2, double phase_sign) const {
    const Vector p = a_phase_vector(phase_sign);
    const Vector g1 = green_function(h1_, k1) * p;
    const Vector g2 = green_function(h1_, k2) * p;
    Vector w(static_cast<Eigen::Index>(support_.size()));
    for (std::size_t i = 0; i < support_.size(); ++i) {
        const auto [x1, x2] = support_.states[i];
        w[static_cast<Eigen::Index>(i)] = g1[x1] * g2[x2];
    }
    return w;
}

Complex ScatteringEngine::connected(double k1, double k2, double p1, double p2) const {
    if (support_.size() == 0) return Complex(0.0, 0.0);
    const double g1d = model_.levels.gamma_1d;
    const DenseMatrix t = t_matrix(k1 + k2);
    const Vector tw = t * leg_vector(k1, k2, +1.0);
    const Vector wp12 = leg_vector(p1, p2, -1.0);
    const Vector wp21 = leg_vector(p2, p1, -1.0);
    const Complex bracket = ((wp12 + wp21).array() * tw.array()).sum();
    return -kI * (g1d * g1d / (8.0 * std::numbers::pi)) * bracket;
}

ScatteringResult transmission_spectrum(const SpinModel& model,
                                       std::span<const double> omega_grid) {
    ScatteringEngine engine(model);
    ScatteringResult out;
    out.kind = "transmission";
    out.axis_names = {"omega"};
    out.axes.emplace_back(omega_grid.begin(), omega_grid.end());
    out.provenance = "model=" + model.digest();
    auto& t = out.series["t"];
    auto& r = out.series["r"];
    for (double w : omega_grid) {
        t.push_back(engine.transmission(w));
        r.push_back(engine.reflection(w));
    }
    return out;
}

Complex two_photon_smatrix(const SpinModel& model, double k1, double k2, double p1,
                           double p2, double grid_tol) {
    if (std::abs(p1 + p2 - k1 - k2) > 1e-9 * std::max(1.0, std::abs(k1 + k2)))
        throw ModelError("two_photon_smatrix requires p1 + p2 = k1 + k2");
    ScatteringEngine engine(model);
    auto delta = [grid_tol](double a, double b) {
        return std::abs(a - b) <= grid_tol ? 1.0 : 0.0;
    };
    Complex linear{0.0, 0.0};
    const double d11 = delta(p1, k1) * delta(p2, k2);
    const double d12 = delta(p1, k2) * delta(p2, k1);
    if (d11 + d12 > 0.0)
        linear = engine.transmission(k1) * engine.transmission(k2) * (d11 + d12);
    return linear + engine.connected(k1, k2, p1, p2);
}

std::vector<Complex> ScatteringEngine::wavefunction(double e_total, double k_rel,
                                                    std::span<const double> x_grid) const {
    const Complex t_plus = transmission(e_total / 2.0 + k_rel);
    const Complex t_minus = transmission(e_total / 2.0 - k_rel);

    std::vector<Complex> psi(x_grid.size());
    for (std::size_t i = 0; i < x_grid.size(); ++i)
        psi[i] = 2.0 * t_plus * t_minus * std::cos(k_rel * x_grid[i]);
    if (support_.size() == 0) return psi;

    const auto& es = eigensystem();
    const auto s = es.dim();
    const DenseMatrix t = t_matrix(e_total);
    const Vector y = t * w_vector(e_total / 2.0 + k_rel, e_total / 2.0 - k_rel);

    // H(l,l') = sum_P W(l, P1) W(l', P2) y_P
    DenseMatrix hm = DenseMatrix::Zero(s, s);
    const DenseMatrix& w = es.left_inv;
    for (std::size_t p = 0; p < support_.size(); ++p) {
        const auto [y1, y2] = support_.states[p];
        hm.noalias() += y[static_cast<Eigen::Index>(p)] * (w.col(y1) * w.col(y2).transpose());
    }
    // a_l = sum_i e^{-i k z_i} chi_l(a_i)
    const Vector a = es.right.transpose() * a_phase_vector(-1.0);
    DenseMatrix g(s, s);
    for (Eigen::Index l = 0; l < s; ++l)
        for (Eigen::Index lp = 0; lp < s; ++lp) {
            const Complex denom = e_total - es.eigenvalues[l] - es.eigenvalues[lp];
            if (std::abs(denom) < kDegeneracyTol)
                throw NumericalError(
                    "wavefunction denominator vanishes for eigenvalue pair (" +
                    std::to_string(l) + ", " + std::to_string(lp) + ")");
            g(l, lp) = a[l] * a[lp] * hm(l, lp) / denom;
        }
    const Vector weights = g.rowwise().sum() + g.colwise().sum().transpose();

    const double g1d = model_.levels.gamma_1d;
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        const double ax = std::abs(x_grid[i]);
        Complex conn{0.0, 0.0};
        for (Eigen::Index l = 0; l < s; ++l)
            conn += weights[l] *
                    std::exp(kI * (e_total / 2.0 - es.eigenvalues[l]) * ax);
        conn *= -kI;  // the prefactor of F(x)
        psi[i] += -kI * (g1d * g1d / 4.0) * conn;
    }
    return psi;
}

ScatteringResult two_photon_wavefunction(const SpinModel& model, double e_total,
                                         double k_rel, std::span<const double> x_grid) {
    ScatteringEngine engine(model);
    ScatteringResult out;
    out.kind = "two_photon_wavefunction";
    out.axis_names = {"x"};
    out.axes.emplace_back(x_grid.begin(), x_grid.end());
    out.series["psi"] = engine.wavefunction(e_total, k_rel, x_grid);
    out.provenance = "model=" + model.digest() + " E=" + std::to_string(e_total) +
                     " k=" + std::to_string(k_rel);
    out.e_total = e_total;
    out.k_rel = k_rel;
    return out;
}

ObservableSeries g2_from_wavefunction(const ScatteringResult& psi, Complex t_half) {
    if (psi.kind != "two_photon_wavefunction" || psi.series.count("psi") == 0)
        throw ModelError("g2_from_wavefunction needs a two-photon wavefunction");
    if (std::abs(psi.k_rel) > 1e-12)
        throw ModelError("g2 from the wavefunction requires equal input momenta");
    const double t4 = std::pow(std::abs(t_half), 4);
    if (std::abs(t_half) < 1e-12)
        throw NumericalError("medium is opaque at E/2; g2 is undefined");

    ObservableSeries out;
    out.name = "g2_x";
    out.grid = psi.axes.at(0);
    out.provenance = psi.provenance;
    for (const Complex v : psi.series.at("psi"))
        out.values.push_back(Complex(std::norm(v) / (4.0 * t4), 0.0));
    return out;
}

Complex single_atom_connected_kernel(int n, std::span<const double> k,
                                     std::span<const double> p, double gamma,
                                     double omega_eg) {
    if (n < 1 || n > 3) throw ModelError("kernel implemented for 1 <= n <= 3");
    if (static_cast<int>(k.size()) != n || static_cast<int>(p.size()) != n)
        throw ModelError("need n incoming and n outgoing frequencies");
    const double esum = std::accumulate(k.begin(), k.end(), 0.0) -
                        std::accumulate(p.begin(), p.end(), 0.0);
    if (std::abs(esum) > 1e-9)
        throw ModelError("kernel requires sum k_i = sum p_i");

    const Complex alpha(omega_eg, -gamma / 2.0);
    std::vector<int> kp(n), pp(n);
    std::iota(kp.begin(), kp.end(), 0);

    Complex total{0.0, 0.0};
    do {
        std::iota(pp.begin(), pp.end(), 0);
        do {
            Complex term{1.0, 0.0};
            double partial = 0.0;
            bool ok = true;
            for (int m = 0; m < n && ok; ++m) {
                const Complex pole = k[kp[m]] - alpha + partial;
                term /= pole;
                partial += k[kp[m]] - p[pp[m]];
                if (m < n - 1) {
                    if (std::abs(partial) < 1e-12)
                        throw NumericalError(
                            "vanishing partial momentum sum; perturb the momenta "
                            "away from the degenerate point");
                    term /= partial;
                }
            }
            if (ok) total += term;
        } while (std::next_permutation(pp.begin(), pp.end()));
    } while (std::next_permutation(kp.begin(), kp.end()));

    const Complex pref = -2.0 * std::numbers::pi * kI *
                         std::pow(gamma / (2.0 * std::numbers::pi), n);
    return pref * total;
}

}  // namespace wqed
