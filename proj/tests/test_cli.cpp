#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "wqed/runner.hpp"

using namespace wqed;

namespace {

const char* kMinimalSpectrum = R"json({
  "kind": "spectrum",
  "model": {
    "n_sites": 2,
    "levels": {"kind": "eit", "gamma_1d": 1.0, "gamma_prime": 0.5, "rabi": 1.0}
  },
  "grids": {"delta": {"start": -0.5, "stop": 0.5, "count": 5}}
})json";

}  // namespace

TEST_CASE("minimal config gets the documented defaults") {
    const auto cfg = parse_config(kMinimalSpectrum);
    CHECK(cfg.model.lattice_phase == doctest::Approx(std::numbers::pi / 2.0));
    CHECK(cfg.numerics.rel_tol == doctest::Approx(1e-8));
    CHECK(cfg.numerics.n_max == 2);
    REQUIRE(cfg.model.drive.has_value());
    CHECK(cfg.model.drive->amplitude == doctest::Approx(1e-6));
    CHECK(cfg.grid("delta").size() == 5);
}

TEST_CASE("unknown keys are rejected by name") {
    const char* bad = R"json({
      "kind": "spectrum",
      "model": {
        "n_sites": 2,
        "levels": {"kind": "two_level", "gamma1d_typo": 1.0, "gamma_1d": 1.0}
      },
      "grids": {"delta": [0.0]}
    })json";
    try {
        parse_config(bad);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("gamma1d_typo") != std::string::npos);
    }
}

TEST_CASE("out-of-range values and inconsistent regimes are rejected") {
    CHECK_THROWS_AS(parse_config(R"({"kind": "nope", "model": {"n_sites": 1,
        "levels": {"gamma_1d": 1.0}}})"),
                    ConfigError);
    // zero-drive g2 is inconsistent
    CHECK_THROWS_AS(parse_config(R"({"kind": "g2", "model": {"n_sites": 1,
        "levels": {"kind": "eit", "gamma_1d": 1.0, "rabi": 1.0},
        "drive": {"amplitude": 0.0}}, "grids": {"tau": [0.0, 1.0]}})"),
                    ConfigError);
    // negative gamma_1d surfaces the model's own validation
    CHECK_THROWS(parse_config(R"({"kind": "linear", "model": {"n_sites": 1,
        "levels": {"gamma_1d": -1.0}}, "grids": {"delta": [0.0]}})"));
}

TEST_CASE("the interaction-shift sweep configuration is accepted") {
    const char* fig = R"json({
      "kind": "spectrum",
      "model": {
        "n_sites": 200,
        "levels": {"kind": "eit", "gamma_1d": 1.0, "gamma_prime": 3.0, "rabi": 2.0},
        "drive": {"amplitude": 1e-6}
      },
      "grids": {"delta": {"start": -0.6, "stop": 0.6, "count": 13},
                "interaction_c": [0.0, 0.4]}
    })json";
    const auto cfg = parse_config(fig);
    CHECK(cfg.model.n_sites == 200);
    CHECK(cfg.grid("interaction_c").size() == 2);
}

TEST_CASE("configs round-trip through serialization") {
    for (const char* text : {kMinimalSpectrum,
                             R"({"kind": "fock", "model": {"n_sites": 2,
             "levels": {"gamma_1d": 1.0}}, "n_photons": 1, "t_final": 5.0})"}) {
        const auto cfg = parse_config(text);
        const auto round = parse_config(serialize_config(cfg));
        CHECK(round == cfg);
    }
}

TEST_CASE("runs are deterministic and produce the documented columns") {
    const auto cfg = parse_config(kMinimalSpectrum);
    RunOptions opts;
    opts.workers = 2;
    const auto a = run(cfg, opts);
    const auto b = run(cfg, opts);

    const auto& spec = a.table("spectrum");
    CHECK(spec.columns == std::vector<std::string>{"delta", "c", "t1", "t2"});
    CHECK(spec.rows.size() == 5);
    REQUIRE(b.table("spectrum").rows.size() == spec.rows.size());
    for (std::size_t i = 0; i < spec.rows.size(); ++i)
        for (std::size_t j = 0; j < spec.rows[i].size(); ++j)
            CHECK(spec.rows[i][j] == b.table("spectrum").rows[i][j]);

    CHECK_NOTHROW(a.table("peaks"));
}

TEST_CASE("bundles are written as TSV tables plus a metadata sidecar") {
    namespace fs = std::filesystem;
    const auto cfg = parse_config(kMinimalSpectrum);
    const auto bundle = run(cfg);
    const auto dir = fs::temp_directory_path() / "wqed_cli_test";
    fs::remove_all(dir);
    write_bundle(bundle, dir.string(), "demo");

    CHECK(fs::exists(dir / "demo_spectrum.tsv"));
    CHECK(fs::exists(dir / "demo_peaks.tsv"));
    CHECK(fs::exists(dir / "demo_meta.json"));

    std::ifstream in(dir / "demo_spectrum.tsv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "delta\tc\tt1\tt2");
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    CHECK(lines == 5);
    fs::remove_all(dir);
}

TEST_CASE("evolve config runs and reports site populations") {
    const char* text = R"json({
      "kind": "evolve",
      "model": {
        "n_sites": 40,
        "levels": {"kind": "eit", "gamma_1d": 2.0, "gamma_prime": 0.0, "rabi": 1.0}
      },
      "grids": {"time": [0.0, 5.0]},
      "sigma_p": 5.0,
      "mu": 20.0
    })json";
    const auto bundle = run(parse_config(text));
    const auto& pops = bundle.table("populations");
    CHECK(pops.columns == std::vector<std::string>{"site", "t", "pop_ss", "pop_ee"});
    CHECK(pops.rows.size() == 2 * 40);
    const auto& norm = bundle.table("norm");
    CHECK(norm.rows.front()[1] == doctest::Approx(1.0));
}
