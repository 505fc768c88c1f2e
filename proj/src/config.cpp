#include "wqed/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace wqed {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& section) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + section);
}

double require_number(const json& obj, const std::string& key,
                      const std::string& section) {
    if (!obj.contains(key))
        throw ConfigError("missing key '" + key + "' in " + section);
    if (!obj[key].is_number())
        throw ConfigError("key '" + key + "' in " + section + " must be a number");
    return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError("key '" + key + "' must be a number");
    return obj[key].get<double>();
}

std::vector<double> parse_grid(const json& g, const std::string& name) {
    if (g.is_array()) {
        std::vector<double> v;
        for (const auto& x : g) {
            if (!x.is_number())
                throw ConfigError("grid '" + name + "' must contain numbers");
            v.push_back(x.get<double>());
        }
        if (v.empty()) throw ConfigError("grid '" + name + "' must be nonempty");
        return v;
    }
    if (g.is_object()) {
        reject_unknown(g, {"start", "stop", "count"}, "grid '" + name + "'");
        const double start = require_number(g, "start", "grid '" + name + "'");
        const double stop = require_number(g, "stop", "grid '" + name + "'");
        const int count = static_cast<int>(require_number(g, "count", "grid '" + name + "'"));
        if (count < 1) throw ConfigError("grid '" + name + "' needs count >= 1");
        std::vector<double> v(count);
        for (int i = 0; i < count; ++i)
            v[i] = count == 1 ? start : start + (stop - start) * i / (count - 1);
        return v;
    }
    throw ConfigError("grid '" + name + "' must be an array or {start, stop, count}");
}

const std::set<std::string> kGridNames = {"delta", "time",  "tau",   "x",
                                          "omega", "interaction_c", "radii"};

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Spectrum: return "spectrum";
        case ExperimentKind::Evolve: return "evolve";
        case ExperimentKind::G2: return "g2";
        case ExperimentKind::Smatrix: return "smatrix";
        case ExperimentKind::Linear: return "linear";
        case ExperimentKind::Compare: return "compare";
        case ExperimentKind::Fock: return "fock";
        case ExperimentKind::T2Estimate: return "t2estimate";
    }
    throw ConfigError("unreachable experiment kind");
}

ExperimentKind experiment_kind_from(const std::string& name) {
    for (auto k : {ExperimentKind::Spectrum, ExperimentKind::Evolve,
                   ExperimentKind::G2, ExperimentKind::Smatrix,
                   ExperimentKind::Linear, ExperimentKind::Compare,
                   ExperimentKind::Fock, ExperimentKind::T2Estimate})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown experiment kind '" + name + "'");
}

SpinModel ExperimentConfig::build_model() const {
    SpinModel m;
    m.geometry = Geometry::lattice(model.n_sites, model.lattice_phase, model.spacing);
    if (model.levels.kind == "two_level")
        m.levels = LevelScheme::two_level(model.levels.gamma_1d, model.levels.gamma_prime);
    else
        m.levels = LevelScheme::eit(model.levels.gamma_1d, model.levels.gamma_prime,
                                    model.levels.rabi, model.levels.delta_l);
    m.interaction = InteractionSpec::constant(model.n_sites, model.interaction.constant_c);
    m.interaction.hardcore = model.interaction.hardcore;
    if (model.interaction.u0) m.interaction.u0 = *model.interaction.u0;
    if (model.drive)
        m.drive = DriveSpec{model.drive->amplitude, model.drive->detuning};
    m.validate();
    return m;
}

const std::vector<double>& ExperimentConfig::grid(const std::string& name) const {
    auto it = grids.find(name);
    if (it == grids.end())
        throw ConfigError("experiment '" + to_string(kind) + "' needs grid '" + name + "'");
    return it->second;
}

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(root,
                   {"schema_version", "kind", "model", "grids", "numerics",
                    "sigma_p", "mu", "n_photons", "t_final", "phase_count",
                    "e_total", "output_prefix"},
                   "config");

    ExperimentConfig cfg;
    cfg.schema_version = static_cast<int>(number_or(root, "schema_version", 1));
    if (cfg.schema_version != 1)
        throw ConfigError("unsupported schema_version " +
                          std::to_string(cfg.schema_version));
    if (!root.contains("kind") || !root["kind"].is_string())
        throw ConfigError("config needs a string 'kind'");
    cfg.kind = experiment_kind_from(root["kind"].get<std::string>());

    if (!root.contains("model") || !root["model"].is_object())
        throw ConfigError("config needs a 'model' object");
    const json& jm = root["model"];
    reject_unknown(jm, {"n_sites", "lattice_phase", "spacing", "levels",
                        "interaction", "drive"},
                   "model");
    cfg.model.n_sites = static_cast<int>(require_number(jm, "n_sites", "model"));
    if (cfg.model.n_sites < 0) throw ConfigError("n_sites must be >= 0");
    cfg.model.lattice_phase = number_or(jm, "lattice_phase", cfg.model.lattice_phase);
    cfg.model.spacing = number_or(jm, "spacing", cfg.model.spacing);

    if (!jm.contains("levels") || !jm["levels"].is_object())
        throw ConfigError("model needs a 'levels' object");
    const json& jl = jm["levels"];
    reject_unknown(jl, {"kind", "gamma_1d", "gamma_prime", "rabi", "delta_l"},
                   "model.levels");
    cfg.model.levels.kind = jl.value("kind", std::string("two_level"));
    if (cfg.model.levels.kind != "two_level" && cfg.model.levels.kind != "eit")
        throw ConfigError("levels.kind must be 'two_level' or 'eit'");
    cfg.model.levels.gamma_1d = require_number(jl, "gamma_1d", "model.levels");
    cfg.model.levels.gamma_prime = number_or(jl, "gamma_prime", 0.0);
    cfg.model.levels.rabi = number_or(jl, "rabi", 0.0);
    cfg.model.levels.delta_l = number_or(jl, "delta_l", 0.0);

    if (jm.contains("interaction")) {
        const json& ji = jm["interaction"];
        reject_unknown(ji, {"constant_c", "hardcore", "u0"}, "model.interaction");
        cfg.model.interaction.constant_c = number_or(ji, "constant_c", 0.0);
        if (ji.contains("hardcore")) {
            if (!ji["hardcore"].is_boolean())
                throw ConfigError("interaction.hardcore must be a boolean");
            cfg.model.interaction.hardcore = ji["hardcore"].get<bool>();
        }
        if (ji.contains("u0")) cfg.model.interaction.u0 = require_number(ji, "u0", "model.interaction");
    }

    if (jm.contains("drive")) {
        const json& jd = jm["drive"];
        reject_unknown(jd, {"amplitude", "detuning"}, "model.drive");
        DriveConfig d;
        d.amplitude = number_or(jd, "amplitude", d.amplitude);
        d.detuning = number_or(jd, "detuning", d.detuning);
        if (d.amplitude < 0.0) throw ConfigError("drive.amplitude must be >= 0");
        cfg.model.drive = d;
    }

    if (root.contains("grids")) {
        if (!root["grids"].is_object()) throw ConfigError("'grids' must be an object");
        for (auto it = root["grids"].begin(); it != root["grids"].end(); ++it) {
            if (!kGridNames.count(it.key()))
                throw ConfigError("unknown grid '" + it.key() + "'");
            cfg.grids[it.key()] = parse_grid(it.value(), it.key());
        }
    }

    if (root.contains("numerics")) {
        const json& jn = root["numerics"];
        reject_unknown(jn, {"rel_tol", "n_max", "dim_cap", "dense_limit", "t_settle"},
                       "numerics");
        cfg.numerics.rel_tol = number_or(jn, "rel_tol", cfg.numerics.rel_tol);
        if (cfg.numerics.rel_tol < 1e-12 || cfg.numerics.rel_tol > 1e-4)
            throw ConfigError("numerics.rel_tol must lie in [1e-12, 1e-4]");
        cfg.numerics.n_max = static_cast<int>(number_or(jn, "n_max", cfg.numerics.n_max));
        if (cfg.numerics.n_max < 0 || cfg.numerics.n_max > 3)
            throw ConfigError("numerics.n_max must lie in [0, 3]");
        cfg.numerics.dim_cap = static_cast<std::size_t>(
            number_or(jn, "dim_cap", static_cast<double>(cfg.numerics.dim_cap)));
        cfg.numerics.dense_limit = static_cast<Eigen::Index>(
            number_or(jn, "dense_limit", static_cast<double>(cfg.numerics.dense_limit)));
        if (jn.contains("t_settle"))
            cfg.numerics.t_settle = require_number(jn, "t_settle", "numerics");
    }

    if (root.contains("sigma_p")) cfg.sigma_p = require_number(root, "sigma_p", "config");
    if (root.contains("mu")) cfg.mu = require_number(root, "mu", "config");
    if (root.contains("n_photons"))
        cfg.n_photons = static_cast<int>(require_number(root, "n_photons", "config"));
    if (root.contains("t_final")) cfg.t_final = require_number(root, "t_final", "config");
    if (root.contains("phase_count"))
        cfg.phase_count = static_cast<int>(require_number(root, "phase_count", "config"));
    if (root.contains("e_total")) cfg.e_total = require_number(root, "e_total", "config");
    if (root.contains("output_prefix")) {
        if (!root["output_prefix"].is_string())
            throw ConfigError("output_prefix must be a string");
        cfg.output_prefix = root["output_prefix"].get<std::string>();
    }

    // regime consistency and per-kind required inputs
    switch (cfg.kind) {
        case ExperimentKind::Spectrum:
            cfg.grid("delta");
            if (!cfg.model.drive) cfg.model.drive = DriveConfig{};
            if (cfg.model.drive->amplitude == 0.0)
                throw ConfigError("spectrum requires a nonzero drive amplitude");
            break;
        case ExperimentKind::Evolve:
            cfg.grid("time");
            if (!cfg.sigma_p || !cfg.mu)
                throw ConfigError("evolve needs 'sigma_p' and 'mu'");
            if (cfg.model.levels.kind != "eit")
                throw ConfigError("evolve needs the EIT level scheme");
            break;
        case ExperimentKind::G2:
        case ExperimentKind::Compare:
            cfg.grid("tau");
            if (!cfg.model.drive) cfg.model.drive = DriveConfig{};
            if (cfg.model.drive->amplitude == 0.0)
                throw ConfigError("g2 requires a nonzero drive amplitude");
            break;
        case ExperimentKind::Smatrix:
            cfg.grid("omega");
            break;
        case ExperimentKind::Linear:
            cfg.grid("delta");
            break;
        case ExperimentKind::Fock:
            if (!cfg.n_photons || *cfg.n_photons < 0 || *cfg.n_photons > 2)
                throw ConfigError("fock needs n_photons in [0, 2]");
            if (!cfg.t_final || *cfg.t_final <= 0.0)
                throw ConfigError("fock needs a positive t_final");
            break;
        case ExperimentKind::T2Estimate:
            cfg.grid("delta");
            if (cfg.model.levels.kind != "eit")
                throw ConfigError("t2estimate needs the EIT level scheme");
            if (!cfg.model.drive) cfg.model.drive = DriveConfig{};
            break;
    }
    cfg.build_model();  // surfaces range errors with the model's own messages
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json root;
    root["schema_version"] = cfg.schema_version;
    root["kind"] = to_string(cfg.kind);
    json jm;
    jm["n_sites"] = cfg.model.n_sites;
    jm["lattice_phase"] = cfg.model.lattice_phase;
    jm["spacing"] = cfg.model.spacing;
    json jl;
    jl["kind"] = cfg.model.levels.kind;
    jl["gamma_1d"] = cfg.model.levels.gamma_1d;
    jl["gamma_prime"] = cfg.model.levels.gamma_prime;
    jl["rabi"] = cfg.model.levels.rabi;
    jl["delta_l"] = cfg.model.levels.delta_l;
    jm["levels"] = jl;
    json ji;
    ji["constant_c"] = cfg.model.interaction.constant_c;
    ji["hardcore"] = cfg.model.interaction.hardcore;
    if (cfg.model.interaction.u0) ji["u0"] = *cfg.model.interaction.u0;
    jm["interaction"] = ji;
    if (cfg.model.drive) {
        json jd;
        jd["amplitude"] = cfg.model.drive->amplitude;
        jd["detuning"] = cfg.model.drive->detuning;
        jm["drive"] = jd;
    }
    root["model"] = jm;
    if (!cfg.grids.empty()) {
        json jg;
        for (const auto& [name, values] : cfg.grids) jg[name] = values;
        root["grids"] = jg;
    }
    json jn;
    jn["rel_tol"] = cfg.numerics.rel_tol;
    jn["n_max"] = cfg.numerics.n_max;
    jn["dim_cap"] = cfg.numerics.dim_cap;
    jn["dense_limit"] = cfg.numerics.dense_limit;
    if (cfg.numerics.t_settle) jn["t_settle"] = *cfg.numerics.t_settle;
    root["numerics"] = jn;
    if (cfg.sigma_p) root["sigma_p"] = *cfg.sigma_p;
    if (cfg.mu) root["mu"] = *cfg.mu;
    if (cfg.n_photons) root["n_photons"] = *cfg.n_photons;
    if (cfg.t_final) root["t_final"] = *cfg.t_final;
    if (cfg.phase_count) root["phase_count"] = *cfg.phase_count;
    if (cfg.e_total) root["e_total"] = *cfg.e_total;
    root["output_prefix"] = cfg.output_prefix;
    return root.dump(2);
}

}  // namespace wqed
