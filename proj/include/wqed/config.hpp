#pragma once

#include <map>
#include <optional>
#include <string>

#include "wqed/spin_model.hpp"

namespace wqed {

/// Invalid or inconsistent experiment configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
    Spectrum,    // T1/T2 detuning sweeps
    Evolve,      // polariton transport in the single-excitation sector
    G2,          // time-domain photon coincidences
    Smatrix,     // frequency-domain transmission and two-photon quantities
    Linear,      // susceptibility and transfer-matrix spectra
    Compare,     // time- vs frequency-domain g2 overlay
    Fock,        // Fock-state input response
    T2Estimate,  // sqrt(T1) and localized-photon approximations vs full T2
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from(const std::string& name);

struct LevelConfig {
    std::string kind = "two_level";  // or "eit"
    double gamma_1d = 1.0;
    double gamma_prime = 0.0;
    double rabi = 0.0;
    double delta_l = 0.0;
    bool operator==(const LevelConfig&) const = default;
};

struct InteractionConfig {
    double constant_c = 0.0;  // pair energy of |s_i s_j>
    bool hardcore = true;
    std::optional<double> u0;
    bool operator==(const InteractionConfig&) const = default;
};

struct DriveConfig {
    double amplitude = 1e-6;
    double detuning = 0.0;
    bool operator==(const DriveConfig&) const = default;
};

struct ModelConfig {
    int n_sites = 1;
    double lattice_phase = std::numbers::pi / 2.0;  // k_in * d
    double spacing = 1.0;
    LevelConfig levels;
    InteractionConfig interaction;
    std::optional<DriveConfig> drive;
    bool operator==(const ModelConfig&) const = default;
};

struct NumericsConfig {
    double rel_tol = 1e-8;
    int n_max = 2;
    std::size_t dim_cap = 500000;
    Eigen::Index dense_limit = 3000;
    std::optional<double> t_settle;
    bool operator==(const NumericsConfig&) const = default;
};

struct ExperimentConfig {
    int schema_version = 1;
    ExperimentKind kind = ExperimentKind::Spectrum;
    ModelConfig model;
    std::map<std::string, std::vector<double>> grids;
    NumericsConfig numerics;
    std::optional<double> sigma_p;   // evolve
    std::optional<double> mu;        // evolve
    std::optional<int> n_photons;    // fock
    std::optional<double> t_final;   // fock
    std::optional<int> phase_count;  // fock
    std::optional<double> e_total;   // smatrix two-photon block
    std::string output_prefix = "run";

    bool operator==(const ExperimentConfig&) const = default;

    SpinModel build_model() const;
    const std::vector<double>& grid(const std::string& name) const;
    bool has_grid(const std::string& name) const { return grids.count(name) > 0; }
};

/// Strict parse: unknown keys, out-of-range values and inconsistent regimes
/// are rejected with messages naming the offending key.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

}  // namespace wqed
