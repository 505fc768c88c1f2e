#include "wqed/basis.hpp"

#include <algorithm>
#include <cmath>

namespace wqed {

namespace {

// Counts occurrences of each slot in a sorted tuple and returns per-site totals.
int site_total(const FewExcitationBasis& b, std::span<const std::uint32_t> slots,
               int site) {
    int n = 0;
    for (auto s : slots)
        if (b.site_of_slot(s) == site) ++n;
    return n;
}

void enumerate_sector(int n_slots, int modes_per_site, int k, bool hardcore,
                      std::vector<std::uint32_t>& current,
                      std::vector<std::vector<std::uint32_t>>& out) {
    if (static_cast<int>(current.size()) == k) {
        out.push_back(current);
        return;
    }
    const std::uint32_t start = current.empty() ? 0 : current.back();
    for (std::uint32_t s = start; s < static_cast<std::uint32_t>(n_slots); ++s) {
        if (hardcore) {
            // per-site total occupation <= 1
            const int site = static_cast<int>(s) / modes_per_site;
            bool blocked = false;
            for (auto c : current)
                if (static_cast<int>(c) / modes_per_site == site) blocked = true;
            if (blocked) continue;
        }
        current.push_back(s);
        enumerate_sector(n_slots, modes_per_site, k, hardcore, current, out);
        current.pop_back();
    }
}

}  // namespace

int FewExcitationBasis::sector_of(std::size_t index) const {
    for (int k = 0; k <= max_excitations; ++k)
        if (index < sector_begin[k + 1]) return k;
    throw ModelError("state index out of range");
}

std::span<const std::uint32_t> FewExcitationBasis::slots(std::size_t index) const {
    const int k = sector_of(index);
    if (k == 0) return {};
    const std::size_t pos = data_begin_[k] + (index - sector_begin[k]) * k;
    return {slot_data.data() + pos, static_cast<std::size_t>(k)};
}

std::size_t FewExcitationBasis::index_of(
    std::span<const std::uint32_t> sorted_slots) const {
    const std::size_t i = find(sorted_slots);
    if (i == npos) throw ModelError("configuration is not part of the basis");
    return i;
}

std::size_t FewExcitationBasis::find(
    std::span<const std::uint32_t> sorted_slots) const {
    std::vector<std::uint32_t> key(sorted_slots.begin(), sorted_slots.end());
    auto it = index_map.find(key);
    return it == index_map.end() ? npos : it->second;
}

int FewExcitationBasis::slot(int site, Mode mode) const {
    if (mode == Mode::G) throw ModelError("ground state has no slot");
    if (mode == Mode::S && modes_per_site == 1)
        throw ModelError("mode S is invalid for a two-level scheme");
    return site * modes_per_site + static_cast<int>(mode);
}

FewExcitationBasis enumerate_basis(int n_sites, const LevelScheme& levels,
                                   int max_excitations, bool hardcore,
                                   std::size_t dim_cap) {
    if (n_sites < 0) throw ModelError("n_sites must be non-negative");
    if (max_excitations < 0) throw ModelError("max_excitations must be non-negative");

    FewExcitationBasis b;
    b.site_count = n_sites;
    b.modes_per_site = levels.modes_per_site();
    b.max_excitations = max_excitations;
    b.hardcore = hardcore;

    b.sector_begin.assign(1, 0);
    std::size_t index = 0;
    for (int k = 0; k <= max_excitations; ++k) {
        b.data_begin_.push_back(b.slot_data.size());
        std::vector<std::vector<std::uint32_t>> configs;
        std::vector<std::uint32_t> current;
        enumerate_sector(b.n_slots(), b.modes_per_site, k, hardcore, current, configs);
        std::sort(configs.begin(), configs.end());
        for (auto& c : configs) {
            if (index >= dim_cap)
                throw DimensionError(
                    "basis dimension exceeds cap of " + std::to_string(dim_cap) +
                    "; raise dim_cap if this configuration is intentional");
            b.index_map.emplace(c, index++);
            b.slot_data.insert(b.slot_data.end(), c.begin(), c.end());
        }
        b.sector_begin.push_back(index);
    }
    return b;
}

SparseOperator transition_operator(const FewExcitationBasis& basis, int site,
                                   Mode from, Mode to) {
    if (site < 0 || site >= basis.site_count) throw ModelError("site out of range");
    if (from == Mode::G && to == Mode::G)
        throw ModelError("transition needs at least one non-ground mode");
    for (Mode m : {from, to})
        if (m == Mode::S && basis.modes_per_site == 1)
            throw ModelError("mode S is invalid for a two-level scheme");

    const std::size_t dim = basis.dim();
    std::vector<Eigen::Triplet<Complex>> trips;

    auto occupancy = [&](std::span<const std::uint32_t> slots, std::uint32_t s) {
        return static_cast<int>(std::count(slots.begin(), slots.end(), s));
    };

    for (std::size_t col = 0; col < dim; ++col) {
        const auto slots = basis.slots(col);
        std::vector<std::uint32_t> work(slots.begin(), slots.end());
        double amp = 1.0;

        if (from != Mode::G) {  // annihilate one quantum in `from`
            const auto s = static_cast<std::uint32_t>(basis.slot(site, from));
            const int n = occupancy(slots, s);
            if (n == 0) continue;  // annihilates to zero
            amp *= std::sqrt(static_cast<double>(n));
            work.erase(std::find(work.begin(), work.end(), s));
        }
        if (to != Mode::G) {  // create one quantum in `to`
            const auto s = static_cast<std::uint32_t>(basis.slot(site, to));
            const int n = occupancy({work.data(), work.size()}, s);
            amp *= std::sqrt(static_cast<double>(n) + 1.0);
            work.insert(std::upper_bound(work.begin(), work.end(), s), s);
        }

        const std::size_t row = basis.find({work.data(), work.size()});
        if (row == FewExcitationBasis::npos) continue;  // projected out
        trips.emplace_back(static_cast<int>(row), static_cast<int>(col), Complex(amp, 0.0));
    }

    SparseOperator op(static_cast<int>(dim), static_cast<int>(dim));
    op.setFromTriplets(trips.begin(), trips.end());
    op.prune(Complex(0.0, 0.0), 0.0);
    return op;
}

SparseOperator number_operator(const FewExcitationBasis& basis, int site, Mode mode) {
    const std::size_t dim = basis.dim();
    const auto s = static_cast<std::uint32_t>(basis.slot(site, mode));
    std::vector<Eigen::Triplet<Complex>> trips;
    for (std::size_t i = 0; i < dim; ++i) {
        const auto slots = basis.slots(i);
        const auto n = std::count(slots.begin(), slots.end(), s);
        if (n > 0)
            trips.emplace_back(static_cast<int>(i), static_cast<int>(i),
                               Complex(static_cast<double>(n), 0.0));
    }
    SparseOperator op(static_cast<int>(dim), static_cast<int>(dim));
    op.setFromTriplets(trips.begin(), trips.end());
    return op;
}

Complex expectation_value(const SparseOperator& op, const Vector& state) {
    if (op.rows() != state.size())
        throw ModelError("operator and state dimensions do not match");
    return state.dot(op * state);  // Eigen dot conjugates the left argument
}

}  // namespace wqed
