#include "wqed/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "wqed/scattering.hpp"

namespace wqed {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// embedded 4th-order weights
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                 e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

struct Stepper {
    const OdeRhs& rhs;
    double rel_tol, abs_tol;
    std::size_t steps = 0, rejected = 0;
    Vector k1, k2, k3, k4, k5, k6, k7, ytmp, yerr;

    Stepper(const OdeRhs& f, double rtol, double atol) : rhs(f), rel_tol(rtol), abs_tol(atol) {}

    // advances y from t to t_end, adapting the step size
    void advance(Vector& y, double t, double t_end, double& h, std::size_t max_steps) {
        const double span = t_end - t;
        if (span <= 0.0) return;
        if (h <= 0.0 || !std::isfinite(h)) h = span / 100.0;
        bool first = true;
        if (k1.size() != y.size()) {
            k1.resize(y.size());
            rhs(t, y, k1);
        } else if (first) {
            rhs(t, y, k1);
        }
        while (t < t_end) {
            if (steps + rejected > max_steps)
                throw NumericalError("integrator exceeded the step budget");
            h = std::min(h, t_end - t);
            if (h < 1e-14 * std::max(1.0, std::abs(t_end)))
                throw NumericalError(
                    "step-size underflow at t = " + std::to_string(t) +
                    "; the system is too stiff for the explicit integrator");

            ytmp = y + h * (a21 * k1);
            rhs(t + c2 * h, ytmp, k2);
            ytmp = y + h * (a31 * k1 + a32 * k2);
            rhs(t + c3 * h, ytmp, k3);
            ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
            rhs(t + c4 * h, ytmp, k4);
            ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            rhs(t + c5 * h, ytmp, k5);
            ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            rhs(t + h, ytmp, k6);
            ytmp = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            rhs(t + h, ytmp, k7);

            yerr = h * ((b1 - e1) * k1 + (b3 - e3) * k3 + (b4 - e4) * k4 +
                        (b5 - e5) * k5 + (b6 - e6) * k6 - e7 * k7);
            double err = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                const double scale =
                    abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(ytmp[i]));
                err = std::max(err, std::abs(yerr[i]) / scale);
            }
            if (err <= 1.0) {
                t += h;
                y.swap(ytmp);
                k1.swap(k7);  // FSAL
                ++steps;
            } else {
                ++rejected;
            }
            const double factor =
                err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::clamp(factor, 0.2, 5.0);
            first = false;
        }
    }
};

}  // namespace

Trajectory integrate_ode(const OdeRhs& rhs, const Vector& y0,
                         std::span<const double> t_grid, const EvolveOptions& opts) {
    if (opts.rel_tol < 1e-12 || opts.rel_tol > 1e-4)
        throw ModelError("rel_tol must lie in [1e-12, 1e-4]");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw ModelError("time grid must be strictly increasing");

    Trajectory traj;
    traj.method = "rk45";
    traj.rel_tol = opts.rel_tol;
    Stepper stepper(rhs, opts.rel_tol, opts.abs_tol);
    Vector y = y0;
    double t = t_grid.empty() ? 0.0 : t_grid.front();
    double h = 0.0;

    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (i > 0) stepper.advance(y, t, t_grid[i], h, opts.max_steps);
        t = t_grid[i];
        traj.times.push_back(t);
        traj.states.push_back(y);
        traj.norms.push_back(y.norm());
    }
    traj.steps = stepper.steps;
    traj.rejected = stepper.rejected;
    return traj;
}

Trajectory evolve(const SparseOperator& h_total, const Vector& psi0,
                  std::span<const double> t_grid, double rel_tol) {
    EvolveOptions opts;
    opts.rel_tol = rel_tol;
    return evolve(h_total, psi0, t_grid, opts);
}

Trajectory evolve(const SparseOperator& h_total, const Vector& psi0,
                  std::span<const double> t_grid, const EvolveOptions& opts) {
    if (h_total.rows() != psi0.size())
        throw ModelError("Hamiltonian and state dimensions do not match");

    if (!opts.force_rk && h_total.rows() <= opts.dense_limit) {
        Eigensystem es = eigendecompose(DenseMatrix(h_total));
        Trajectory traj;
        traj.method = "eigenbasis";
        traj.rel_tol = opts.rel_tol;
        const double t0 = t_grid.empty() ? 0.0 : t_grid.front();
        for (double t : t_grid) {
            traj.times.push_back(t);
            traj.states.push_back(es.propagate(psi0, t - t0));
            traj.norms.push_back(traj.states.back().norm());
        }
        return traj;
    }

    auto rhs = [&h_total](double, const Vector& y, Vector& dy) {
        dy = -kI * (h_total * y);
    };
    return integrate_ode(rhs, psi0, t_grid, opts);
}

namespace {

// dense single-excitation block in the drive frame: H1 = curly_H1 - Delta*I
DenseMatrix single_excitation_block(const SpinModel& model) {
    DenseMatrix h1 = single_particle_hamiltonian(model);
    h1.diagonal().array() -= model.detuning();
    return h1;
}

Vector drive_vector(const SpinModel& model) {
    const int m = model.levels.modes_per_site();
    const int s = model.n_sites() * m;
    Vector d = Vector::Zero(s);
    for (int j = 0; j < model.n_sites(); ++j)
        d[j * m] = model.drive->amplitude *
                   std::exp(kI * model.geometry.k_in * model.geometry.positions[j]);
    return d;
}

void check_sector_solve(const DenseMatrix& a, const Vector& x, const Vector& rhs,
                        const char* which) {
    const double res = (a * x - rhs).norm();
    const double scale = std::max(rhs.norm(), 1e-300);
    if (!(res / scale < 1e-8)) {
        Eigen::ComplexEigenSolver<DenseMatrix> es(a, false);
        Complex worst = es.eigenvalues()[0];
        for (auto v : es.eigenvalues())
            if (std::abs(v) < std::abs(worst)) worst = v;
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "%s sector solve is singular; smallest eigenvalue "
                      "%.3e%+.3ei signals an undamped resonance",
                      which, worst.real(), worst.imag());
        throw NumericalError(buf);
    }
}

}  // namespace

Vector steady_state(const SpinModel& model, const FewExcitationBasis& basis,
                    const SteadyStateOptions& opts) {
    model.validate();
    if (!model.drive || model.drive->amplitude == 0.0)
        throw ModelError("steady_state requires a drive");
    if (opts.max_order < 1 || opts.max_order > 2)
        throw ModelError("steady_state supports max_order 1 or 2");

    Vector psi = Vector::Zero(basis.dim());
    psi[0] = 1.0;
    if (basis.max_excitations < 1 || model.n_sites() == 0) return psi;

    // order 1: (-H1) psi1 = d
    const DenseMatrix h1 = single_excitation_block(model);
    const Vector d = drive_vector(model);
    const DenseMatrix a1 = -h1;
    Eigen::PartialPivLU<DenseMatrix> lu1(a1);
    const Vector psi1 = lu1.solve(d);
    check_sector_solve(a1, psi1, d, "one-excitation");
    psi.segment(basis.sector_begin[1], basis.sector_dim(1)) = psi1;

    if (opts.max_order < 2 || basis.max_excitations < 2) return psi;
    const auto dim2 = static_cast<Eigen::Index>(basis.sector_dim(2));
    if (dim2 == 0) return psi;

    if (dim2 <= opts.dense_limit) {
        const SparseOperator h = effective_hamiltonian(model, basis);
        const SparseOperator hd = drive_hamiltonian(model, basis);
        const auto base2 = static_cast<Eigen::Index>(basis.sector_begin[2]);
        const auto base1 = static_cast<Eigen::Index>(basis.sector_begin[1]);
        const auto dim1 = static_cast<Eigen::Index>(basis.sector_dim(1));
        const DenseMatrix a2 = -DenseMatrix(h).block(base2, base2, dim2, dim2);
        const Vector rhs2 =
            DenseMatrix(hd).block(base2, base1, dim2, dim1) * psi1;
        Eigen::PartialPivLU<DenseMatrix> lu2(a2);
        const Vector psi2 = lu2.solve(rhs2);
        check_sector_solve(a2, psi2, rhs2, "two-excitation");
        psi.segment(base2, dim2) = psi2;
    } else {
        TwoExcitationEngine engine(model);
        const Vector rhs = engine.symmetrized_product(d, psi1);
        const Vector phi = engine.solve(rhs, opts.iter_tol, opts.max_iter);
        psi.segment(basis.sector_begin[2], dim2) = engine.pack(phi, basis);
    }
    return psi;
}

TransmissionMoments transmission_moments(const Vector& state, const SpinModel& model,
                                         const FewExcitationBasis& basis) {
    if (!model.drive || model.drive->amplitude == 0.0)
        throw ModelError("transmission moments require a nonzero drive");
    const double e0 = model.drive->amplitude;
    const auto bop = output_field_operator(model, basis, Direction::Right);
    const Vector b1 = bop.apply(state);
    const Vector b2 = bop.apply(b1);
    TransmissionMoments out;
    out.t1 = b1.squaredNorm() / (e0 * e0);
    out.t2 = b2.squaredNorm() / (e0 * e0 * e0 * e0);
    return out;
}

ObservableSeries g2_time(const SpinModel& model, const FewExcitationBasis& basis,
                         std::span<const double> tau_grid, double t_settle) {
    model.validate();
    if (!model.drive || model.drive->amplitude == 0.0)
        throw ModelError("g2 requires a drive");

    // g2 is drive-independent to O(E^2); evolve at a working amplitude large
    // enough that two-excitation amplitudes (~E^2) stay above the absolute
    // noise floor of the dense eigenbasis propagator.
    SpinModel work = model;
    const double floor_amp = 3e-5 * model.levels.gamma_total();
    if (work.drive->amplitude < floor_amp) work.drive->amplitude = floor_amp;

    DenseMatrix h = DenseMatrix(effective_hamiltonian(work, basis)) +
                    DenseMatrix(drive_hamiltonian(work, basis));
    const Eigensystem es = eigendecompose(h);
    const auto bop = output_field_operator(work, basis, Direction::Right);

    Vector vac = Vector::Zero(basis.dim());
    vac[0] = 1.0;
    const Vector psi = es.propagate(vac, t_settle);
    const double intensity = bop.apply(psi).squaredNorm();
    const double intensity_later =
        bop.apply(es.propagate(vac, 1.25 * t_settle)).squaredNorm();
    if (std::abs(intensity_later - intensity) > 1e-6 * std::abs(intensity))
        throw NumericalError(
            "output intensity is not stationary at t_settle; relative drift " +
            std::to_string(std::abs(intensity_later - intensity) / intensity));

    const Vector phi0 = bop.apply(psi);
    ObservableSeries out;
    out.name = "g2";
    out.provenance = "model=" + model.digest() +
                     " t_settle=" + std::to_string(t_settle) +
                     " working_amplitude=" + std::to_string(work.drive->amplitude);
    for (double tau : tau_grid) {
        const Vector phi = es.propagate(phi0, tau);
        const double f = bop.apply(phi).squaredNorm();
        out.grid.push_back(tau);
        out.values.push_back(Complex(f / (intensity * intensity), 0.0));
    }
    return out;
}

Vector gaussian_spin_wave(const Geometry& geometry, double sigma_p, double mu,
                          const FewExcitationBasis& basis) {
    if (!(sigma_p > 0.0)) throw ModelError("sigma_p must be positive");
    if (basis.modes_per_site != 2)
        throw ModelError("a spin wave needs the three-level scheme");
    if (mu < geometry.z_left() || mu > geometry.z_right())
        throw ModelError("spin-wave center must lie inside the chain");

    const int n = geometry.n_sites();
    Vector f(n);
    for (int j = 0; j < n; ++j) {
        const double z = geometry.positions[j];
        f[j] = std::exp(kI * geometry.k_in * z) *
               std::exp(-(z - mu) * (z - mu) / (4.0 * sigma_p * sigma_p)) /
               std::pow(2.0 * std::numbers::pi * sigma_p * sigma_p, 0.25);
    }
    const double d = n > 1 ? geometry.positions[1] - geometry.positions[0] : 1.0;
    const double lattice_norm = f.squaredNorm() * d;
    if (std::abs(lattice_norm - 1.0) > 0.05)
        std::fprintf(stderr,
                     "wqed: warning: spin wave of width %.3g deviates %.1f%% from "
                     "continuum normalization on this lattice\n",
                     sigma_p, 100.0 * std::abs(lattice_norm - 1.0));

    Vector psi = Vector::Zero(basis.dim());
    for (int j = 0; j < n; ++j) {
        std::uint32_t slot = static_cast<std::uint32_t>(basis.slot(j, Mode::S));
        psi[basis.index_of({&slot, 1})] = f[j];
    }
    psi.normalize();
    return psi;
}

SitePopulations polariton_populations(const Vector& state,
                                      const FewExcitationBasis& basis) {
    SitePopulations pop;
    pop.ss = RealVector::Zero(basis.site_count);
    pop.ee = RealVector::Zero(basis.site_count);
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        const double w = std::norm(state[i]);
        if (w == 0.0) continue;
        for (auto s : basis.slots(i)) {
            if (basis.mode_of_slot(s) == Mode::A)
                pop.ee[basis.site_of_slot(s)] += w;
            else
                pop.ss[basis.site_of_slot(s)] += w;
        }
    }
    return pop;
}

DenseMatrix fock_input_response(const SpinModel& model, int n_photons,
                                double drive_momentum, double t_final,
                                const FockOptions& opts) {
    model.validate();
    if (n_photons < 0 || n_photons > 2)
        throw ModelError("fock_input_response supports n_photons <= 2");

    SpinModel undriven = model;
    undriven.drive.reset();

    const auto basis = enumerate_basis(model.n_sites(), model.levels,
                                       std::max(n_photons, 0), model.interaction.hardcore);
    const auto dim = static_cast<Eigen::Index>(basis.dim());
    if (static_cast<std::size_t>(dim) * dim > opts.dim_squared_cap)
        throw DimensionError("density-matrix evolution exceeds the configured cap");

    DenseMatrix rho0 = DenseMatrix::Zero(dim, dim);
    rho0(0, 0) = 1.0;
    if (n_photons == 0) {
        if (dim == 1) return rho0;
    }

    DenseMatrix h_eff = DenseMatrix(effective_hamiltonian(
        model.drive ? model : undriven, basis));  // keeps the drive-frame detuning
    Vector lower_coeff(model.n_sites());
    for (int j = 0; j < model.n_sites(); ++j)
        lower_coeff[j] = std::exp(-kI * drive_momentum * model.geometry.positions[j]);
    const DenseMatrix d_lower =
        DenseMatrix(weighted_lowering(basis, lower_coeff));
    const DenseMatrix d_raise = d_lower.adjoint();

    std::vector<DenseMatrix> jumps;
    {
        auto j = jump_operators(undriven, basis);
        jumps.push_back(DenseMatrix(j.right));
        jumps.push_back(DenseMatrix(j.left));
        for (auto& l : j.local) jumps.push_back(DenseMatrix(l));
    }

    std::vector<double> radii = opts.radii;
    if (radii.empty()) {
        const double g = model.levels.gamma_total();
        radii = {1e-4 * g, 2e-4 * g, 4e-4 * g};
    }
    const int n_radii = static_cast<int>(radii.size());
    if (n_radii < n_photons + 1)
        throw ModelError("need at least n_photons + 1 extraction radii");
    const int q_count = opts.phase_count > 0 ? opts.phase_count : 4 * (n_photons + 1);

    EvolveOptions eopts;
    eopts.rel_tol = opts.rel_tol;
    eopts.abs_tol = 1e-18;

    auto evolve_rho = [&](Complex j_amp) {
        const DenseMatrix h = h_eff + j_amp * d_raise + std::conj(j_amp) * d_lower;
        OdeRhs rhs = [&](double, const Vector& y, Vector& dy) {
            Eigen::Map<const DenseMatrix> rho(y.data(), dim, dim);
            dy.resize(y.size());
            Eigen::Map<DenseMatrix> out(dy.data(), dim, dim);
            out = -kI * (h * rho - rho * h.adjoint());
            for (const auto& l : jumps) out += 2.0 * (l * rho * l.adjoint());
        };
        const std::array<double, 2> grid{0.0, t_final};
        Vector y0 = Eigen::Map<const Vector>(rho0.data(), dim * dim);
        auto traj = integrate_ode(rhs, y0, grid, eopts);
        return DenseMatrix(Eigen::Map<const DenseMatrix>(traj.states.back().data(), dim, dim));
    };

    // phase average isolates equal powers of J and J*
    std::vector<DenseMatrix> c0(n_radii, DenseMatrix::Zero(dim, dim));
    for (int ir = 0; ir < n_radii; ++ir) {
        for (int q = 0; q < q_count; ++q) {
            const double theta = 2.0 * std::numbers::pi * q / q_count;
            const Complex j_amp = radii[ir] * std::exp(kI * theta);
            c0[ir] += evolve_rho(j_amp) / static_cast<double>(q_count);
        }
    }

    // Richardson in r^2: c0(r) = sum_m r^(2m) rho^(mm)
    auto extract = [&](std::span<const int> which) {
        const int k = static_cast<int>(which.size());
        RealMatrix vand(k, k);
        for (int i = 0; i < k; ++i)
            for (int m = 0; m < k; ++m)
                vand(i, m) = std::pow(radii[which[i]] * radii[which[i]], m);
        const RealMatrix vinv = vand.inverse();
        std::vector<DenseMatrix> rho_mm(k, DenseMatrix::Zero(dim, dim));
        for (int m = 0; m < k; ++m)
            for (int i = 0; i < k; ++i) rho_mm[m] += vinv(m, i) * c0[which[i]];
        // rho_s = n! sum_{m<=n} rho^{(n-m, n-m)} / m!
        DenseMatrix rho_s = DenseMatrix::Zero(dim, dim);
        double nfac = 1.0;
        for (int i = 2; i <= n_photons; ++i) nfac *= i;
        double mfac = 1.0;
        for (int m = 0; m <= n_photons; ++m) {
            if (m > 0) mfac *= m;
            rho_s += (nfac / mfac) * rho_mm[n_photons - m];
        }
        return rho_s;
    };

    std::vector<int> all(n_radii);
    for (int i = 0; i < n_radii; ++i) all[i] = i;
    const DenseMatrix rho_s = extract(std::span<const int>(all.data(), n_radii));

    if (n_radii > n_photons + 1) {
        std::vector<int> head(all.begin(), all.begin() + n_photons + 1);
        const DenseMatrix alt = extract(std::span<const int>(head.data(), head.size()));
        const double residual = (rho_s - alt).cwiseAbs().maxCoeff();
        if (residual > opts.residual_tol)
            throw NumericalError(
                "fock extraction residual " + std::to_string(residual) +
                " exceeds tolerance; reduce the radii or raise the tolerance");
    }
    return rho_s;
}

}  // namespace wqed
