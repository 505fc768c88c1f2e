#include "doctest.h"

#include <array>

#include "wqed/dynamics.hpp"
#include "wqed/linear_optics.hpp"
#include "wqed/scattering.hpp"

using namespace wqed;

namespace {

SpinModel two_level(int n, double gamma_1d, double gamma_prime, double amp = 0.0,
                    double detuning = 0.0) {
    SpinModel m;
    m.geometry = Geometry::lattice(n);
    m.levels = LevelScheme::two_level(gamma_1d, gamma_prime);
    m.interaction = InteractionSpec::none(n);
    if (amp > 0.0) m.drive = DriveSpec{amp, detuning};
    return m;
}

SpinModel eit(int n, double gamma_1d, double gamma_prime, double rabi, double c,
              double amp = 0.0, double detuning = 0.0) {
    SpinModel m;
    m.geometry = Geometry::lattice(n);
    m.levels = LevelScheme::eit(gamma_1d, gamma_prime, rabi);
    m.interaction = InteractionSpec::constant(n, c);
    if (amp > 0.0) m.drive = DriveSpec{amp, detuning};
    return m;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

}  // namespace

TEST_CASE("zero Hamiltonian leaves the state unchanged") {
    SparseOperator h(4, 4);
    Vector psi0(4);
    psi0 << 0.5, 0.5, 0.5, 0.5;
    for (bool force_rk : {false, true}) {
        EvolveOptions opts;
        opts.force_rk = force_rk;
        const auto traj = evolve(h, psi0, std::array{0.0, 1.0, 5.0}, opts);
        for (const auto& s : traj.states) CHECK((s - psi0).norm() < 1e-12);
    }
}

TEST_CASE("excited atom decays exponentially at the total linewidth") {
    const double g1d = 0.9, gp = 0.4;
    auto m = two_level(1, g1d, gp);
    const auto b = enumerate_basis(1, m.levels, 1, true);
    const auto h = effective_hamiltonian(m, b);
    Vector psi0 = Vector::Zero(2);
    psi0[1] = 1.0;
    const auto grid = linspace(0.0, 3.0, 7);
    for (bool force_rk : {false, true}) {
        EvolveOptions opts;
        opts.force_rk = force_rk;
        opts.rel_tol = 1e-10;
        const auto traj = evolve(h, psi0, grid, opts);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double expect = std::exp(-(g1d + gp) * grid[i]);
            CHECK(std::norm(traj.states[i][1]) ==
                  doctest::Approx(expect).epsilon(1e-8));
        }
    }
}

TEST_CASE("norm never grows under the undriven effective Hamiltonian") {
    auto m = eit(5, 1.0, 0.3, 0.8, 0.5);
    const auto b = enumerate_basis(5, m.levels, 2, true);
    const auto h = effective_hamiltonian(m, b);
    Vector psi0 = Vector::Random(static_cast<Eigen::Index>(b.dim()));
    psi0.normalize();
    const auto traj = evolve(h, psi0, linspace(0.0, 8.0, 33), 1e-9);
    for (std::size_t i = 1; i < traj.norms.size(); ++i)
        CHECK(traj.norms[i] <= traj.norms[i - 1] + 1e-9);
}

TEST_CASE("rel_tol outside the documented range is rejected") {
    SparseOperator h(2, 2);
    Vector psi0(2);
    psi0 << 1.0, 0.0;
    EvolveOptions opts;
    opts.rel_tol = 1e-3;
    opts.force_rk = true;
    CHECK_THROWS_AS(evolve(h, psi0, std::array{0.0, 1.0}, opts), ModelError);
}

TEST_CASE("steady state of one atom matches the closed form") {
    const double g1d = 1.2, gp = 0.3, delta = 0.4, amp = 1e-6;
    auto m = two_level(1, g1d, gp, amp, delta);
    const auto b = enumerate_basis(1, m.levels, 1, true);
    const Vector psi = steady_state(m, b);
    const Complex expect = amp / Complex(delta, (g1d + gp) / 2.0);
    CHECK(std::abs(psi[1] - expect) < 1e-18);
    CHECK(psi[0] == Complex(1.0, 0.0));
}

TEST_CASE("EIT steady state is dark on two-photon resonance") {
    auto m = eit(4, 1.0, 0.5, 0.9, 0.0, 1e-6, 0.0);
    const auto b = enumerate_basis(4, m.levels, 1, true);
    const Vector psi = steady_state(m, b);
    const auto pops = polariton_populations(psi, b);
    CHECK(pops.ee.maxCoeff() < 1e-24);  // <a_j> -> 0
    CHECK(pops.ss.maxCoeff() > 1e-14);  // <s_j> finite
}

TEST_CASE("dense and product-space hierarchies agree") {
    auto m = eit(4, 1.0, 0.4, 0.8, 0.7, 1e-6, 0.35);
    const auto b = enumerate_basis(4, m.levels, 2, true);
    SteadyStateOptions dense;
    dense.dense_limit = 100000;
    SteadyStateOptions engine;
    engine.dense_limit = 1;  // force the matrix-free path
    const Vector a = steady_state(m, b, dense);
    const Vector c = steady_state(m, b, engine);
    CHECK((a - c).norm() < 1e-10 * a.norm());
}

TEST_CASE("transmission moments: empty medium and flux conservation") {
    auto empty = two_level(0, 1.0, 0.0, 1e-6);
    const auto b0 = enumerate_basis(0, empty.levels, 0, true);
    Vector vac(1);
    vac << 1.0;
    const auto tm = transmission_moments(vac, empty, b0);
    CHECK(tm.t1 == doctest::Approx(1.0));
    CHECK(tm.t2 == doctest::Approx(1.0));

    // lossless linear regime: |r|^2 + |t|^2 = 1 across a 100-point sweep
    auto m = eit(5, 1.0, 0.0, 0.8, 0.0, 1e-7);
    const auto b = enumerate_basis(5, m.levels, 1, true);
    const double e0 = m.drive->amplitude;
    for (double delta : linspace(-2.0, 2.0, 100)) {
        const SpinModel md = m.with_detuning(delta);
        const Vector psi = steady_state(md, b);
        const auto right = output_field_operator(md, b, Direction::Right);
        const auto left = output_field_operator(md, b, Direction::Left);
        const double t2 = right.apply(psi).squaredNorm() / (e0 * e0);
        const double r2 = left.apply(psi).squaredNorm() / (e0 * e0);
        CHECK(std::abs(t2 + r2 - 1.0) < 1e-10);
    }
}

TEST_CASE("steady-state transmission equals the Green's-function spectrum") {
    auto m = eit(5, 1.0, 0.6, 0.8, 0.0, 1e-6);
    const auto b = enumerate_basis(5, m.levels, 2, true);
    ScatteringEngine engine(m);
    for (double delta : linspace(-1.5, 1.5, 21)) {
        const SpinModel md = m.with_detuning(delta);
        const Vector psi = steady_state(md, b);
        const auto tm = transmission_moments(psi, md, b);
        CHECK(std::abs(tm.t1 - std::norm(engine.transmission(delta))) < 1e-9);
    }
}

TEST_CASE("steady state agrees with long-time evolution") {
    auto m = eit(4, 2.0, 2.0, 1.0, 1.0, 1e-6, 0.0);
    const auto b = enumerate_basis(4, m.levels, 2, true);
    const Vector psi_ss = steady_state(m, b);
    const auto t1_ss = transmission_moments(psi_ss, m, b).t1;

    const SparseOperator h = effective_hamiltonian(m, b);
    const SparseOperator hd = drive_hamiltonian(m, b);
    SparseOperator h_total = h + hd;
    Vector vac = Vector::Zero(b.dim());
    vac[0] = 1.0;
    const auto traj = evolve(h_total, vac, std::array{0.0, 400.0}, 1e-10);
    const auto t1_evolved = transmission_moments(traj.states.back(), m, b).t1;
    CHECK(std::abs(t1_evolved - t1_ss) < 1e-6 * t1_ss);
}

TEST_CASE("rotating frame agrees with the time-dependent drive frame") {
    const double delta = 0.37, amp = 1e-4, g1d = 1.1, gp = 0.2;
    auto m = two_level(2, g1d, gp, amp, delta);
    const auto b = enumerate_basis(2, m.levels, 2, true);

    // co-rotating frame: time-independent generator
    const SparseOperator h_rot =
        SparseOperator(effective_hamiltonian(m, b)) + drive_hamiltonian(m, b);
    Vector vac = Vector::Zero(b.dim());
    vac[0] = 1.0;
    const auto grid = linspace(0.0, 30.0, 4);
    const auto traj_rot = evolve(h_rot, vac, grid, 1e-10);

    // drive frame: H_eff carries no detuning shift, the drive oscillates
    auto m0 = m;
    m0.drive->detuning = 0.0;
    const DenseMatrix h_eff0 = DenseMatrix(effective_hamiltonian(m0, b));
    const DenseMatrix hd = DenseMatrix(drive_hamiltonian(m0, b));
    DenseMatrix raise = DenseMatrix::Zero(hd.rows(), hd.cols());
    for (Eigen::Index i = 0; i < hd.rows(); ++i)
        for (Eigen::Index j = 0; j < hd.cols(); ++j)
            if (b.sector_of(i) > b.sector_of(j)) raise(i, j) = hd(i, j);
    const DenseMatrix lower = hd - raise;
    OdeRhs rhs = [&](double t, const Vector& y, Vector& dy) {
        const Complex rot = std::exp(-kI * delta * t);
        dy = -kI * (h_eff0 * y + rot * (raise * y) + std::conj(rot) * (lower * y));
    };
    EvolveOptions opts;
    opts.rel_tol = 1e-10;
    const auto traj_lab = integrate_ode(rhs, vac, grid, opts);

    const auto bop = output_field_operator(m, b, Direction::Right);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double i_rot = bop.apply(traj_rot.states[i]).squaredNorm();
        const double i_lab = bop.apply(traj_lab.states[i]).squaredNorm();
        CHECK(i_rot == doctest::Approx(i_lab).epsilon(1e-6));
    }
}

TEST_CASE("g2 of a weakly driven interacting chain decorrelates at long delay") {
    auto m = eit(4, 2.0, 2.0, 1.0, 1.0, 1e-6, 0.0);
    const auto b = enumerate_basis(4, m.levels, 2, true);
    const auto series = g2_time(m, b, std::array{0.0, 1.0, 400.0}, 250.0);
    CHECK(std::abs(series.real_at(2) - 1.0) < 1e-3);

    // g2(0) = T2 / T1^2
    const Vector psi = steady_state(m, b);
    const auto tm = transmission_moments(psi, m, b);
    CHECK(series.real_at(0) ==
          doctest::Approx(tm.t2 / (tm.t1 * tm.t1)).epsilon(1e-5));
}

TEST_CASE("gaussian spin wave: norm, center, momentum phase") {
    const auto geometry = Geometry::lattice(101);
    const auto lv = LevelScheme::eit(1.0, 0.0, 1.0);
    const auto b = enumerate_basis(101, lv, 1, true);
    const double mu = 50.0, sigma = 8.0;
    const Vector psi = gaussian_spin_wave(geometry, sigma, mu, b);
    CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));

    const auto pops = polariton_populations(psi, b);
    double center = 0.0;
    for (int j = 0; j < 101; ++j) center += j * pops.ss[j];
    CHECK(std::abs(center - mu) < 0.5);
    CHECK(pops.ee.maxCoeff() == 0.0);
    CHECK(pops.ss.sum() + pops.ee.sum() == doctest::Approx(1.0));

    // relative phase between adjacent sites is e^{i k d}
    std::uint32_t s50 = static_cast<std::uint32_t>(b.slot(50, Mode::S));
    std::uint32_t s51 = static_cast<std::uint32_t>(b.slot(51, Mode::S));
    const Complex ratio = psi[b.index_of({&s51, 1})] / psi[b.index_of({&s50, 1})];
    const Complex phase = ratio / std::abs(ratio);
    CHECK(std::abs(phase - std::exp(kI * geometry.k_in)) < 1e-12);

    CHECK_THROWS_AS(gaussian_spin_wave(geometry, 8.0, 500.0, b), ModelError);
}

TEST_CASE("fock response: vacuum input and extraction linearity") {
    auto m = two_level(2, 1.0, 0.3, 0.0, 0.15);
    m.drive = DriveSpec{0.0, 0.15};

    const DenseMatrix rho0 = fock_input_response(m, 0, m.geometry.k_in, 5.0);
    CHECK(rho0.rows() == 1);
    CHECK(rho0(0, 0) == Complex(1.0, 0.0));

    FockOptions opts;
    const double g = m.levels.gamma_total();
    opts.radii = {1e-4 * g, 2e-4 * g, 4e-4 * g};
    const DenseMatrix rho1 =
        fock_input_response(m, 1, m.geometry.k_in, 8.0, opts);
    FockOptions doubled = opts;
    for (auto& r : doubled.radii) r *= 2.0;
    const DenseMatrix rho1b =
        fock_input_response(m, 1, m.geometry.k_in, 8.0, doubled);
    CHECK((rho1 - rho1b).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::abs(rho1.trace().imag()) < 1e-10);
}

TEST_CASE("one-photon response matches the weak-coherent linear response") {
    const double detuning = 0.2;
    auto m = two_level(2, 1.0, 0.4, 0.0, detuning);
    m.drive = DriveSpec{0.0, detuning};
    const double t_final = 10.0;
    const DenseMatrix rho1 = fock_input_response(m, 1, m.geometry.k_in, t_final);

    const auto b = enumerate_basis(2, m.levels, 1, true);
    const double e0 = 1e-4;
    SpinModel driven = m;
    driven.drive = DriveSpec{e0, detuning};
    const auto eq = MasterEquation::build(driven, b);
    const auto dim = static_cast<Eigen::Index>(b.dim());
    DenseMatrix rho = DenseMatrix::Zero(dim, dim);
    rho(0, 0) = 1.0;
    OdeRhs rhs = [&](double, const Vector& y, Vector& dy) {
        Eigen::Map<const DenseMatrix> r(y.data(), dim, dim);
        dy.resize(y.size());
        Eigen::Map<DenseMatrix> out(dy.data(), dim, dim);
        out = eq.apply(r);
    };
    EvolveOptions opts;
    opts.rel_tol = 1e-11;
    Vector y0 = Eigen::Map<const Vector>(rho.data(), dim * dim);
    const auto traj = integrate_ode(rhs, y0, std::array{0.0, t_final}, opts);
    const DenseMatrix rho_coh =
        Eigen::Map<const DenseMatrix>(traj.states.back().data(), dim, dim);

    double p_fock = 0.0, p_coh = 0.0;
    for (int j = 0; j < 2; ++j) {
        const DenseMatrix n = DenseMatrix(number_operator(b, j, Mode::A));
        p_fock += (n * rho1).trace().real();
        p_coh += (n * rho_coh).trace().real();
    }
    CHECK(std::abs(p_fock - p_coh / (e0 * e0)) < 1e-4 * std::max(1.0, p_fock));
}

TEST_CASE("vacuum-projected correlators: Liouvillian equals H_eff evolution") {
    auto m = two_level(2, 1.0, 0.35);
    const auto b = enumerate_basis(2, m.levels, 1, true);
    const auto dim = static_cast<Eigen::Index>(b.dim());
    const DenseMatrix h = DenseMatrix(effective_hamiltonian(m, b));
    const auto eq = MasterEquation::build(m, b);

    const DenseMatrix a0 = DenseMatrix(transition_operator(b, 0, Mode::A, Mode::G));
    const DenseMatrix a1_raise =
        DenseMatrix(transition_operator(b, 1, Mode::G, Mode::A));

    DenseMatrix rho = DenseMatrix::Zero(dim, dim);
    rho(0, 0) = 1.0;
    DenseMatrix x = a1_raise * rho;  // a_1^+ |vac><vac|
    const double tau = 1.7;
    OdeRhs rhs = [&](double, const Vector& y, Vector& dy) {
        Eigen::Map<const DenseMatrix> r(y.data(), dim, dim);
        dy.resize(y.size());
        Eigen::Map<DenseMatrix> out(dy.data(), dim, dim);
        out = eq.apply(r);
    };
    EvolveOptions opts;
    opts.rel_tol = 1e-12;
    Vector y0 = Eigen::Map<const Vector>(x.data(), dim * dim);
    const auto traj = integrate_ode(rhs, y0, std::array{0.0, tau}, opts);
    const DenseMatrix xt =
        Eigen::Map<const DenseMatrix>(traj.states.back().data(), dim, dim);
    const Complex via_liouville = (a0 * xt).trace();

    const Eigensystem es = eigendecompose(h);
    Vector vac = Vector::Zero(dim);
    vac[0] = 1.0;
    const Vector evolved = es.propagate(a1_raise * vac, tau);
    const Complex via_heff = (a0 * evolved)[0];

    CHECK(std::abs(via_liouville - via_heff) < 1e-8);
}
