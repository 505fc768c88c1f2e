#include "wqed/operators.hpp"

#include <algorithm>
#include <cmath>

namespace wqed {

namespace {

using Triplets = std::vector<Eigen::Triplet<Complex>>;

void add_triplet(Triplets& t, std::size_t row, std::size_t col, Complex v) {
    if (v != Complex(0.0, 0.0))
        t.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
}

// Distinct slots of a sorted tuple together with their occupancies.
std::vector<std::pair<std::uint32_t, int>> occupancies(
    std::span<const std::uint32_t> slots) {
    std::vector<std::pair<std::uint32_t, int>> occ;
    for (auto s : slots) {
        if (!occ.empty() && occ.back().first == s)
            ++occ.back().second;
        else
            occ.emplace_back(s, 1);
    }
    return occ;
}

int count_slot(std::span<const std::uint32_t> slots, std::uint32_t s) {
    return static_cast<int>(std::count(slots.begin(), slots.end(), s));
}

}  // namespace

SparseOperator effective_hamiltonian(const SpinModel& model,
                                     const FewExcitationBasis& basis) {
    model.validate();
    if (basis.site_count != model.n_sites() ||
        basis.modes_per_site != model.levels.modes_per_site())
        throw ModelError("basis does not match the model's sites/level scheme");

    const auto& lv = model.levels;
    const auto& z = model.geometry.positions;
    const double k = model.geometry.k_in;
    const double delta = model.detuning();
    const std::size_t dim = basis.dim();
    const Complex wg = -kI * (lv.gamma_1d / 2.0);

    Triplets trips;
    std::vector<std::uint32_t> work;

    for (std::size_t col = 0; col < dim; ++col) {
        const auto slots = basis.slots(col);
        const auto occ = occupancies(slots);

        // diagonal: level energies, loss, interaction
        Complex diag{0.0, 0.0};
        for (const auto& [s, n] : occ) {
            if (basis.mode_of_slot(s) == Mode::A)
                diag += static_cast<double>(n) *
                        Complex(-(lv.delta_l + delta), -lv.gamma_prime / 2.0);
            else
                diag += static_cast<double>(n) * Complex(-delta, 0.0);
        }
        if (model.interaction.u_ss.size() > 0) {
            for (std::size_t a = 0; a < occ.size(); ++a)
                for (std::size_t b = a + 1; b < occ.size(); ++b) {
                    if (basis.mode_of_slot(occ[a].first) != Mode::S ||
                        basis.mode_of_slot(occ[b].first) != Mode::S)
                        continue;
                    const int i = basis.site_of_slot(occ[a].first);
                    const int j = basis.site_of_slot(occ[b].first);
                    diag += model.interaction.u_ss(i, j) *
                            static_cast<double>(occ[a].second * occ[b].second);
                }
        }
        if (!basis.hardcore && std::isfinite(model.interaction.u0)) {
            // on-site penalty (u0/2) n_tot (n_tot - 1), n_tot = n_a + n_s
            std::vector<int> per_site(basis.site_count, 0);
            for (auto s : slots) per_site[basis.site_of_slot(s)]++;
            for (int n : per_site)
                if (n > 1) diag += 0.5 * model.interaction.u0 * n * (n - 1);
        }
        add_triplet(trips, col, col, diag);

        // control field: -Omega (a^+ s + s^+ a) per site
        if (lv.kind == LevelKind::ThreeLevelEIT && lv.rabi != 0.0) {
            for (const auto& [s, n] : occ) {
                const int site = basis.site_of_slot(s);
                const Mode other =
                    basis.mode_of_slot(s) == Mode::A ? Mode::S : Mode::A;
                const auto dst = static_cast<std::uint32_t>(basis.slot(site, other));
                work.assign(slots.begin(), slots.end());
                work.erase(std::find(work.begin(), work.end(), s));
                const double amp =
                    std::sqrt(static_cast<double>(n)) *
                    std::sqrt(count_slot({work.data(), work.size()}, dst) + 1.0);
                work.insert(std::upper_bound(work.begin(), work.end(), dst), dst);
                const auto row = basis.find({work.data(), work.size()});
                if (row != FewExcitationBasis::npos)
                    add_triplet(trips, row, col, Complex(-lv.rabi * amp, 0.0));
            }
        }

        // waveguide-mediated hopping: -i(Gamma_1D/2) e^{i k |z_l - z_m|} a_l^+ a_m
        for (const auto& [s, n] : occ) {
            if (basis.mode_of_slot(s) != Mode::A) continue;
            const int m = basis.site_of_slot(s);
            for (int l = 0; l < basis.site_count; ++l) {
                const auto dst = static_cast<std::uint32_t>(basis.slot(l, Mode::A));
                work.assign(slots.begin(), slots.end());
                work.erase(std::find(work.begin(), work.end(), s));
                const double amp =
                    std::sqrt(static_cast<double>(n)) *
                    std::sqrt(count_slot({work.data(), work.size()}, dst) + 1.0);
                work.insert(std::upper_bound(work.begin(), work.end(), dst), dst);
                const auto row = basis.find({work.data(), work.size()});
                if (row == FewExcitationBasis::npos) continue;
                const Complex phase = std::exp(kI * k * std::abs(z[l] - z[m]));
                add_triplet(trips, row, col, wg * phase * amp);
            }
        }
    }

    SparseOperator h(static_cast<int>(dim), static_cast<int>(dim));
    h.setFromTriplets(trips.begin(), trips.end());
    h.prune(Complex(0.0, 0.0), 0.0);
    return h;
}

SparseOperator drive_hamiltonian(const SpinModel& model,
                                 const FewExcitationBasis& basis) {
    if (!model.drive) throw ModelError("model has no drive");
    const auto& z = model.geometry.positions;
    const double k = model.geometry.k_in;
    const double e0 = model.drive->amplitude;
    const std::size_t dim = basis.dim();

    Triplets trips;
    std::vector<std::uint32_t> work;
    for (std::size_t col = 0; col < dim; ++col) {
        const auto slots = basis.slots(col);
        // raising part E e^{i k z_j} a_j^+; the lowering part is its adjoint
        for (int j = 0; j < basis.site_count; ++j) {
            const auto dst = static_cast<std::uint32_t>(basis.slot(j, Mode::A));
            const double amp = std::sqrt(count_slot(slots, dst) + 1.0);
            work.assign(slots.begin(), slots.end());
            work.insert(std::upper_bound(work.begin(), work.end(), dst), dst);
            const auto row = basis.find({work.data(), work.size()});
            if (row == FewExcitationBasis::npos) continue;
            const Complex v = e0 * std::exp(kI * k * z[j]) * amp;
            add_triplet(trips, row, col, v);
            add_triplet(trips, col, row, std::conj(v));
        }
    }
    SparseOperator h(static_cast<int>(dim), static_cast<int>(dim));
    h.setFromTriplets(trips.begin(), trips.end());
    h.prune(Complex(0.0, 0.0), 0.0);
    return h;
}

SparseOperator weighted_lowering(const FewExcitationBasis& basis,
                                 const Vector& site_coefficients) {
    if (site_coefficients.size() != basis.site_count)
        throw ModelError("need one coefficient per site");
    const std::size_t dim = basis.dim();
    Triplets trips;
    std::vector<std::uint32_t> work;
    for (std::size_t col = 0; col < dim; ++col) {
        const auto slots = basis.slots(col);
        for (const auto& [s, n] : occupancies(slots)) {
            if (basis.mode_of_slot(s) != Mode::A) continue;
            work.assign(slots.begin(), slots.end());
            work.erase(std::find(work.begin(), work.end(), s));
            const auto row = basis.index_of({work.data(), work.size()});
            const Complex v = site_coefficients[basis.site_of_slot(s)] *
                              std::sqrt(static_cast<double>(n));
            add_triplet(trips, row, col, v);
        }
    }
    SparseOperator op(static_cast<int>(dim), static_cast<int>(dim));
    op.setFromTriplets(trips.begin(), trips.end());
    op.prune(Complex(0.0, 0.0), 0.0);
    return op;
}

JumpOperators jump_operators(const SpinModel& model, const FewExcitationBasis& basis) {
    const auto& z = model.geometry.positions;
    const double k = model.geometry.k_in;
    const int n = model.n_sites();
    const double g1 = std::sqrt(model.levels.gamma_1d / 4.0);

    Vector right(n), left(n);
    for (int j = 0; j < n; ++j) {
        right[j] = g1 * std::exp(-kI * k * z[j]);
        left[j] = g1 * std::exp(kI * k * z[j]);
    }
    JumpOperators ops;
    ops.right = weighted_lowering(basis, right);
    ops.left = weighted_lowering(basis, left);
    if (model.levels.gamma_prime > 0.0) {
        const double gp = std::sqrt(model.levels.gamma_prime / 2.0);
        for (int j = 0; j < n; ++j) {
            Vector c = Vector::Zero(n);
            c[j] = gp;
            ops.local.push_back(weighted_lowering(basis, c));
        }
    }
    return ops;
}

OutputFieldOperator output_field_operator(const SpinModel& model,
                                          const FewExcitationBasis& basis,
                                          Direction direction) {
    const auto& z = model.geometry.positions;
    const double k = model.geometry.k_in;
    const int n = model.n_sites();
    const Complex c0 = -kI * (model.levels.gamma_1d / 2.0);

    OutputFieldOperator out;
    Vector coeff(n);
    if (direction == Direction::Right) {
        const double zr = model.geometry.z_right();
        for (int j = 0; j < n; ++j) coeff[j] = c0 * std::exp(kI * k * (zr - z[j]));
        if (model.drive)
            out.offset = model.drive->amplitude * std::exp(kI * k * zr);
    } else {
        const double zl = model.geometry.z_left();
        for (int j = 0; j < n; ++j) coeff[j] = c0 * std::exp(kI * k * (z[j] - zl));
    }
    out.op = weighted_lowering(basis, coeff);
    return out;
}

DenseMatrix MasterEquation::apply(const DenseMatrix& rho) const {
    DenseMatrix out = -kI * (h * rho - rho * h.adjoint());
    for (const auto& l : jumps) out += 2.0 * (l * rho * l.adjoint());
    return out;
}

MasterEquation MasterEquation::build(const SpinModel& model,
                                     const FewExcitationBasis& basis) {
    MasterEquation eq;
    DenseMatrix h = DenseMatrix(effective_hamiltonian(model, basis));
    if (model.drive && model.drive->amplitude != 0.0)
        h += DenseMatrix(drive_hamiltonian(model, basis));
    eq.h = std::move(h);
    auto jumps = jump_operators(model, basis);
    eq.jumps.push_back(DenseMatrix(jumps.right));
    eq.jumps.push_back(DenseMatrix(jumps.left));
    for (auto& l : jumps.local) eq.jumps.push_back(DenseMatrix(l));
    return eq;
}

DenseMatrix liouvillian_apply(const SpinModel& model, const FewExcitationBasis& basis,
                              const DenseMatrix& rho) {
    if (rho.rows() != rho.cols()) throw ModelError("density matrix must be square");
    if (static_cast<std::size_t>(rho.rows()) != basis.dim())
        throw ModelError("density matrix does not match basis dimension");
    return MasterEquation::build(model, basis).apply(rho);
}

}  // namespace wqed
