#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "wqed/level_scheme.hpp"
#include "wqed/types.hpp"

namespace wqed {

/// Internal mode of a site. G is the shared ground state ("vacuum" for the
/// purposes of raising/lowering), A the waveguide-coupled excitation, S the
/// metastable state of the EIT scheme.
enum class Mode : int { G = -1, A = 0, S = 1 };

/// Ordered enumeration of atomic configurations with at most `max_excitations`
/// total excitations over `site_count` sites. A configuration is stored as a
/// sorted tuple of occupied slots (slot = site * modes_per_site + mode), with
/// repeats for bosonic multiple occupation. States are ordered by excitation
/// number, then lexicographically within each sector.
struct FewExcitationBasis {
    int site_count = 0;
    int modes_per_site = 1;
    int max_excitations = 0;
    bool hardcore = true;

    std::vector<std::uint32_t> slot_data;
    std::vector<std::size_t> sector_begin;  // state index of first state in sector k
    std::map<std::vector<std::uint32_t>, std::size_t> index_map;

    std::size_t dim() const { return sector_begin.back(); }
    int n_slots() const { return site_count * modes_per_site; }
    int n_sectors() const { return max_excitations + 1; }

    std::size_t sector_dim(int k) const { return sector_begin[k + 1] - sector_begin[k]; }
    int sector_of(std::size_t index) const;

    /// Occupied slots of state `index`, sorted, length = its excitation number.
    std::span<const std::uint32_t> slots(std::size_t index) const;

    /// Ordinal of a configuration given as a sorted slot tuple; throws if the
    /// configuration is not part of the enumerated space.
    std::size_t index_of(std::span<const std::uint32_t> sorted_slots) const;
    /// Like index_of but returns npos instead of throwing.
    std::size_t find(std::span<const std::uint32_t> sorted_slots) const;

    int slot(int site, Mode mode) const;
    int site_of_slot(std::uint32_t s) const { return static_cast<int>(s) / modes_per_site; }
    Mode mode_of_slot(std::uint32_t s) const {
        return static_cast<Mode>(static_cast<int>(s) % modes_per_site);
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  private:
    // byte offset of the slot tuples of sector k within slot_data
    std::vector<std::size_t> data_begin_;
    friend FewExcitationBasis enumerate_basis(int, const LevelScheme&, int, bool,
                                              std::size_t);
};

/// Enumerates the few-excitation space. With hardcore = true every
/// configuration has per-site total occupation <= 1 (the U0 -> infinity
/// limit realized as exact exclusion); otherwise occupation is bosonic.
/// Throws DimensionError when the dimension would exceed dim_cap.
FewExcitationBasis enumerate_basis(int n_sites, const LevelScheme& levels,
                                   int max_excitations, bool hardcore,
                                   std::size_t dim_cap = 500000);

/// Single-site transition operator |to><from| in the bosonized-spin
/// convention, restricted to the enumerated basis. Mode::G as `from` gives a
/// raising operator, as `to` a lowering operator. Annihilating below vacuum
/// or raising out of the enumerated space yields zero columns.
SparseOperator transition_operator(const FewExcitationBasis& basis, int site,
                                   Mode from, Mode to);

/// Occupation-number operator of one site mode (diagonal).
SparseOperator number_operator(const FewExcitationBasis& basis, int site, Mode mode);

/// <state|op|state>; conjugate-symmetric in its arguments for Hermitian op.
Complex expectation_value(const SparseOperator& op, const Vector& state);

}  // namespace wqed
