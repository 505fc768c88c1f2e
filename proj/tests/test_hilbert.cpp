#include "doctest.h"

#include <random>

#include "wqed/basis.hpp"

using namespace wqed;

namespace {

// independent brute-force count: occupation vectors over N*m slots with the
// stated per-site and total constraints
int brute_force_dim(int n_sites, int modes, int n_max, bool hardcore) {
    const int slots = n_sites * modes;
    int count = 0;
    std::vector<int> occ(slots, 0);
    std::function<void(int, int)> walk = [&](int slot, int total) {
        if (slot == slots) {
            ++count;
            return;
        }
        for (int n = 0; total + n <= n_max; ++n) {
            if (hardcore) {
                int site_total = n;
                const int site = slot / modes;
                for (int s = site * modes; s < slot; ++s)
                    if (s / modes == site) site_total += occ[s];
                if (site_total > 1) break;
            }
            occ[slot] = n;
            walk(slot + 1, total + n);
        }
        occ[slot] = 0;
    };
    walk(0, 0);
    return count;
}

}  // namespace

TEST_CASE("basis dimensions match combinatorial counts") {
    const auto two_level = LevelScheme::two_level(1.0);
    const auto eit = LevelScheme::eit(1.0, 0.5, 2.0);

    CHECK(enumerate_basis(2, two_level, 2, true).dim() == 4);   // 2^N at n = N
    CHECK(enumerate_basis(3, two_level, 1, true).dim() == 4);   // 1 + C(3,1)
    CHECK(enumerate_basis(2, eit, 2, true).dim() == 9);
    CHECK(enumerate_basis(2, eit, 2, true).dim() ==
          static_cast<std::size_t>(brute_force_dim(2, 2, 2, true)));

    // bosonic (finite-u0) counting
    CHECK(enumerate_basis(2, two_level, 2, false).dim() ==
          static_cast<std::size_t>(brute_force_dim(2, 1, 2, false)));
    CHECK(enumerate_basis(3, eit, 2, false).dim() ==
          static_cast<std::size_t>(brute_force_dim(3, 2, 2, false)));

    for (int n : {1, 4, 7}) {
        const auto b = enumerate_basis(n, two_level, 2, true);
        std::size_t expect = 1 + n + n * (n - 1) / 2;
        CHECK(b.dim() == expect);
    }
}

TEST_CASE("index_of inverts the state enumeration") {
    for (bool hardcore : {true, false}) {
        const auto b = enumerate_basis(3, LevelScheme::eit(1.0, 0.0, 1.0), 2, hardcore);
        for (std::size_t k = 0; k < b.dim(); ++k)
            CHECK(b.index_of(b.slots(k)) == k);
    }
}

TEST_CASE("hardcore bases never doubly occupy a site") {
    const auto b = enumerate_basis(4, LevelScheme::eit(1.0, 0.0, 1.0), 3, true);
    for (std::size_t k = 0; k < b.dim(); ++k) {
        const auto slots = b.slots(k);
        std::vector<int> per_site(4, 0);
        for (auto s : slots) per_site[b.site_of_slot(s)]++;
        for (int n : per_site) CHECK(n <= 1);
    }
}

TEST_CASE("states are ordered by sector then lexicographically") {
    const auto b = enumerate_basis(3, LevelScheme::two_level(1.0), 2, true);
    for (std::size_t k = 1; k < b.dim(); ++k) {
        const auto a = b.slots(k - 1);
        const auto c = b.slots(k);
        const bool sector_ordered = a.size() < c.size();
        const bool lex_ordered =
            a.size() == c.size() &&
            std::lexicographical_compare(a.begin(), a.end(), c.begin(), c.end());
        CHECK((sector_ordered || lex_ordered));
    }
}

TEST_CASE("transition operators implement bosonized-spin matrix elements") {
    const auto lv = LevelScheme::two_level(1.0);
    const auto b = enumerate_basis(2, lv, 2, true);
    const auto lower0 = transition_operator(b, 0, Mode::A, Mode::G);

    Vector e0 = Vector::Zero(b.dim());
    std::uint32_t slot0 = 0;
    e0[b.index_of({&slot0, 1})] = 1.0;
    Vector vac = Vector::Zero(b.dim());
    vac[0] = 1.0;

    CHECK((lower0 * e0 - vac).norm() == doctest::Approx(0.0));
    CHECK((lower0 * vac).norm() == doctest::Approx(0.0));

    // (a0^+ a0) on (|e0> + |e1>)/sqrt(2)
    std::uint32_t slot1 = 1;
    Vector plus = Vector::Zero(b.dim());
    plus[b.index_of({&slot0, 1})] = 1.0 / std::sqrt(2.0);
    plus[b.index_of({&slot1, 1})] = 1.0 / std::sqrt(2.0);
    const auto n0 = number_operator(b, 0, Mode::A);
    CHECK(expectation_value(n0, plus).real() == doctest::Approx(0.5));

    CHECK_THROWS_AS(transition_operator(b, 0, Mode::S, Mode::G), ModelError);
}

TEST_CASE("bosonic amplitudes carry sqrt factors outside the hardcore basis") {
    const auto lv = LevelScheme::two_level(1.0);
    const auto b = enumerate_basis(1, lv, 2, false);
    const auto raise = transition_operator(b, 0, Mode::G, Mode::A);
    std::uint32_t s0 = 0;
    const std::vector<std::uint32_t> two{0, 0};
    const auto i1 = b.index_of({&s0, 1});
    const auto i2 = b.index_of(two);
    Vector one = Vector::Zero(b.dim());
    one[i1] = 1.0;
    CHECK((raise * one)[i2].real() == doctest::Approx(std::sqrt(2.0)));
    // raising out of the truncated space projects to zero
    Vector twice = Vector::Zero(b.dim());
    twice[i2] = 1.0;
    CHECK((raise * twice).norm() == doctest::Approx(0.0));
}

TEST_CASE("operator algebra matches brute-force products on small spaces") {
    const auto lv = LevelScheme::eit(1.0, 0.2, 0.7);
    const auto b = enumerate_basis(2, lv, 2, true);
    REQUIRE(b.dim() <= 32);
    const DenseMatrix raise_a = DenseMatrix(transition_operator(b, 0, Mode::G, Mode::A));
    const DenseMatrix lower_a = DenseMatrix(transition_operator(b, 0, Mode::A, Mode::G));
    const DenseMatrix swap_as = DenseMatrix(transition_operator(b, 0, Mode::A, Mode::S));

    CHECK((raise_a - lower_a.adjoint()).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
    const DenseMatrix n_a = DenseMatrix(number_operator(b, 0, Mode::A));
    CHECK(((raise_a * lower_a) - n_a).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    // s^+ a equals the mode-swap operator built directly
    const DenseMatrix raise_s = DenseMatrix(transition_operator(b, 0, Mode::G, Mode::S));
    CHECK(((raise_s * lower_a) - swap_as).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
}

TEST_CASE("expectation values") {
    const auto b = enumerate_basis(2, LevelScheme::two_level(1.0), 2, true);
    SparseOperator id(static_cast<int>(b.dim()), static_cast<int>(b.dim()));
    id.setIdentity();

    std::mt19937 rng(7);
    std::normal_distribution<double> gauss;
    Vector psi(b.dim());
    for (Eigen::Index i = 0; i < psi.size(); ++i)
        psi[i] = Complex(gauss(rng), gauss(rng));
    psi.normalize();
    CHECK(expectation_value(id, psi).real() == doctest::Approx(1.0));

    // Hermitian operator: zero imaginary part
    SparseOperator n_tot = number_operator(b, 0, Mode::A);
    n_tot = n_tot + SparseOperator(number_operator(b, 1, Mode::A));
    CHECK(std::abs(expectation_value(n_tot, psi).imag()) < 1e-12);

    // number operator on a two-excitation basis state
    Vector two = Vector::Zero(b.dim());
    std::vector<std::uint32_t> slots{0, 1};
    two[b.index_of(slots)] = 1.0;
    CHECK(expectation_value(n_tot, two).real() == doctest::Approx(2.0));

    Vector bad(3);
    CHECK_THROWS_AS(expectation_value(id, bad), ModelError);
}

TEST_CASE("dimension cap raises an error") {
    CHECK_THROWS_AS(enumerate_basis(200, LevelScheme::two_level(1.0), 3, true, 1000),
                    DimensionError);
}
