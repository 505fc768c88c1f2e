#include "wqed/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "wqed/dynamics.hpp"
#include "wqed/linear_optics.hpp"
#include "wqed/scattering.hpp"
#include "wqed/version.hpp"

namespace wqed {

const Table& ResultBundle::table(const std::string& name) const {
    for (const auto& t : tables)
        if (t.name == name) return t;
    throw ModelError("no table named '" + name + "'");
}

void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn) {
    workers = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

double quadratic_peak(std::span<const double> grid, std::span<const double> values) {
    if (grid.size() != values.size() || grid.empty())
        throw ModelError("peak finding needs matching nonempty grids");
    std::size_t best = 0;  // first maximum = smaller grid value on ties
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (values[i] > values[best]) best = i;
    if (best == 0 || best + 1 == grid.size()) return grid[best];
    const double x0 = grid[best - 1], x1 = grid[best], x2 = grid[best + 1];
    const double y0 = values[best - 1], y1 = values[best], y2 = values[best + 1];
    const double num =
        (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
    const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if (den == 0.0) return x1;
    return std::clamp(x1 - 0.5 * num / den, x0, x2);
}

namespace {

NumericsConfig effective_numerics(const ExperimentConfig& cfg, const RunOptions& opt) {
    NumericsConfig n = cfg.numerics;
    if (opt.tol_override) n.rel_tol = *opt.tol_override;
    return n;
}

double settle_time(const SpinModel& model, const NumericsConfig& numerics) {
    if (numerics.t_settle) return *numerics.t_settle;
    if (model.levels.kind == LevelKind::ThreeLevelEIT && model.levels.rabi > 0.0)
        return 20.0 / eit_parameters(model).bandwidth;
    return 40.0 / model.levels.gamma_total();
}

Table spectrum_table(const ExperimentConfig& cfg, const NumericsConfig& numerics,
                     int workers) {
    const SpinModel base = cfg.build_model();
    const auto& deltas = cfg.grid("delta");
    std::vector<double> c_values =
        cfg.has_grid("interaction_c") ? cfg.grid("interaction_c")
                                      : std::vector<double>{cfg.model.interaction.constant_c};

    Table t{"spectrum", {"delta", "c", "t1", "t2"}, {}};
    t.rows.resize(deltas.size() * c_values.size());
    for (std::size_t ic = 0; ic < c_values.size(); ++ic) {
        const SpinModel with_c = base.with_constant_interaction(c_values[ic]);
        const auto basis = enumerate_basis(with_c.n_sites(), with_c.levels,
                                           numerics.n_max, with_c.interaction.hardcore,
                                           numerics.dim_cap);
        parallel_for(deltas.size(), workers, [&](std::size_t id) {
            const SpinModel m = with_c.with_detuning(deltas[id]);
            SteadyStateOptions opts;
            opts.dense_limit = numerics.dense_limit;
            const Vector psi = steady_state(m, basis, opts);
            const auto tm = transmission_moments(psi, m, basis);
            t.rows[ic * deltas.size() + id] = {deltas[id], c_values[ic], tm.t1, tm.t2};
        });
    }
    return t;
}

Table peaks_table(const Table& spectrum) {
    Table t{"peaks", {"c", "delta_peak_t1", "delta_peak_t2"}, {}};
    std::map<double, std::vector<std::pair<double, std::pair<double, double>>>> by_c;
    for (const auto& row : spectrum.rows)
        by_c[row[1]].push_back({row[0], {row[2], row[3]}});
    for (auto& [c, pts] : by_c) {
        std::vector<double> grid, t1, t2;
        for (auto& [d, v] : pts) {
            grid.push_back(d);
            t1.push_back(v.first);
            t2.push_back(v.second);
        }
        t.rows.push_back({c, quadratic_peak(grid, t1), quadratic_peak(grid, t2)});
    }
    return t;
}

std::vector<Table> run_evolve(const ExperimentConfig& cfg, const NumericsConfig& numerics) {
    SpinModel model = cfg.build_model();
    model.drive.reset();
    const auto basis =
        enumerate_basis(model.n_sites(), model.levels, 1, true, numerics.dim_cap);
    const Vector psi0 =
        gaussian_spin_wave(model.geometry, *cfg.sigma_p, *cfg.mu, basis);
    const auto h = effective_hamiltonian(model, basis);
    const auto traj = evolve(h, psi0, cfg.grid("time"), numerics.rel_tol);

    Table pops{"populations", {"site", "t", "pop_ss", "pop_ee"}, {}};
    Table norms{"norm", {"t", "norm"}, {}};
    for (std::size_t it = 0; it < traj.times.size(); ++it) {
        const auto p = polariton_populations(traj.states[it], basis);
        for (int j = 0; j < model.n_sites(); ++j)
            pops.rows.push_back({static_cast<double>(j), traj.times[it], p.ss[j], p.ee[j]});
        norms.rows.push_back({traj.times[it], traj.norms[it]});
    }
    return {pops, norms};
}

Table g2_table(const ExperimentConfig& cfg, const NumericsConfig& numerics) {
    const SpinModel model = cfg.build_model();
    const auto basis = enumerate_basis(model.n_sites(), model.levels, numerics.n_max,
                                       model.interaction.hardcore, numerics.dim_cap);
    const auto series =
        g2_time(model, basis, cfg.grid("tau"), settle_time(model, numerics));
    Table t{"g2", {"tau", "g2"}, {}};
    for (std::size_t i = 0; i < series.grid.size(); ++i)
        t.rows.push_back({series.grid[i], series.real_at(i)});
    return t;
}

std::pair<Table, double> compare_tables(const ExperimentConfig& cfg,
                                        const NumericsConfig& numerics) {
    const SpinModel model = cfg.build_model();
    const auto basis = enumerate_basis(model.n_sites(), model.levels, numerics.n_max,
                                       model.interaction.hardcore, numerics.dim_cap);
    const auto& taus = cfg.grid("tau");
    const auto time_series =
        g2_time(model, basis, taus, settle_time(model, numerics));

    const double delta = model.detuning();
    const auto psi = two_photon_wavefunction(model, 2.0 * delta, 0.0, taus);
    ScatteringEngine engine(model);
    const auto freq_series = g2_from_wavefunction(psi, engine.transmission(delta));

    Table t{"g2_compare", {"tau", "g2_time", "g2_freq"}, {}};
    double max_dev = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const double a = time_series.real_at(i), b = freq_series.real_at(i);
        t.rows.push_back({taus[i], a, b});
        if (b != 0.0) max_dev = std::max(max_dev, std::abs(a - b) / std::abs(b));
    }
    return {t, max_dev};
}

std::vector<Table> run_smatrix(const ExperimentConfig& cfg, const NumericsConfig&) {
    const SpinModel model = cfg.build_model();
    const auto spec = transmission_spectrum(model, cfg.grid("omega"));
    Table t{"transmission", {"omega", "t_re", "t_im", "r_re", "r_im"}, {}};
    const auto& ts = spec.series.at("t");
    const auto& rs = spec.series.at("r");
    for (std::size_t i = 0; i < spec.axes[0].size(); ++i)
        t.rows.push_back({spec.axes[0][i], ts[i].real(), ts[i].imag(), rs[i].real(),
                          rs[i].imag()});
    std::vector<Table> tables{t};

    if (cfg.has_grid("x")) {
        const double e_total = cfg.e_total ? *cfg.e_total : 2.0 * model.detuning();
        const auto psi = two_photon_wavefunction(model, e_total, 0.0, cfg.grid("x"));
        ScatteringEngine engine(model);
        const auto g2 = g2_from_wavefunction(psi, engine.transmission(e_total / 2.0));
        Table tw{"two_photon", {"x", "psi_re", "psi_im", "g2"}, {}};
        const auto& pv = psi.series.at("psi");
        for (std::size_t i = 0; i < g2.grid.size(); ++i)
            tw.rows.push_back({g2.grid[i], pv[i].real(), pv[i].imag(), g2.real_at(i)});
        tables.push_back(tw);
    }
    return tables;
}

std::vector<Table> run_linear(const ExperimentConfig& cfg, const NumericsConfig&) {
    const SpinModel model = cfg.build_model();
    const auto& deltas = cfg.grid("delta");
    const auto chain = chain_spectrum(model, deltas);
    std::vector<double> omegas(deltas.size());
    for (std::size_t i = 0; i < deltas.size(); ++i)
        omegas[i] = deltas[i] - model.levels.delta_l;
    const auto green = transmission_spectrum(model, omegas);

    Table t{"linear",
            {"delta", "chi_re", "chi_im", "tm_t2", "tm_r2", "gf_t2", "gf_r2"},
            {}};
    const auto& gt = green.series.at("t");
    const auto& gr = green.series.at("r");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const Complex chi = susceptibility(model.levels, deltas[i]);
        t.rows.push_back({deltas[i], chi.real(), chi.imag(),
                          std::norm(chain[i].t), std::norm(chain[i].r),
                          std::norm(gt[i]), std::norm(gr[i])});
    }
    std::vector<Table> tables{t};
    if (model.levels.kind == LevelKind::ThreeLevelEIT && model.levels.rabi > 0.0) {
        const auto p = eit_parameters(model);
        Table te{"eit_parameters",
                 {"optical_depth", "group_velocity", "bandwidth", "min_pulse_length"},
                 {{p.optical_depth, p.group_velocity, p.bandwidth, p.min_pulse_length}}};
        tables.push_back(te);
    }
    return tables;
}

std::vector<Table> run_fock(const ExperimentConfig& cfg, const NumericsConfig&) {
    const SpinModel model = cfg.build_model();
    FockOptions opts;
    if (cfg.has_grid("radii")) opts.radii = cfg.grid("radii");
    if (cfg.phase_count) opts.phase_count = *cfg.phase_count;
    const double momentum = model.geometry.k_in;
    const DenseMatrix rho =
        fock_input_response(model, *cfg.n_photons, momentum, *cfg.t_final, opts);

    const auto basis = enumerate_basis(model.n_sites(), model.levels, *cfg.n_photons,
                                       model.interaction.hardcore);
    Table t{"fock_populations", {"site", "pop_ee", "pop_ss"}, {}};
    for (int j = 0; j < model.n_sites(); ++j) {
        const auto ne = DenseMatrix(number_operator(basis, j, Mode::A));
        const double pe = (ne * rho).trace().real();
        double ps = 0.0;
        if (model.levels.modes_per_site() == 2) {
            const auto ns = DenseMatrix(number_operator(basis, j, Mode::S));
            ps = (ns * rho).trace().real();
        }
        t.rows.push_back({static_cast<double>(j), pe, ps});
    }
    Table tr{"fock_trace", {"trace_re", "trace_im"}, {{rho.trace().real(), rho.trace().imag()}}};
    return {t, tr};
}

Table t2estimate_table(const ExperimentConfig& cfg, const NumericsConfig& numerics,
                       int workers) {
    const SpinModel base = cfg.build_model();
    const auto& deltas = cfg.grid("delta");
    Table t{"t2_estimates",
            {"delta", "c", "t1", "t2_full", "t2_sqrt_t1", "t2_localized"},
            {}};
    t.rows.resize(deltas.size());
    parallel_for(deltas.size(), workers, [&](std::size_t i) {
        const double delta = deltas[i];
        const double c = 2.0 * delta;
        const SpinModel m = base.with_constant_interaction(c).with_detuning(delta);
        const auto basis = enumerate_basis(m.n_sites(), m.levels, numerics.n_max,
                                           m.interaction.hardcore, numerics.dim_cap);
        SteadyStateOptions opts;
        opts.dense_limit = numerics.dense_limit;
        const Vector psi = steady_state(m, basis, opts);
        const auto tm = transmission_moments(psi, m, basis);
        const auto est = t2_estimates(m, delta, tm.t1);
        t.rows[i] = {delta, c, tm.t1, tm.t2, est.small_detuning, est.large_detuning};
    });
    return t;
}

}  // namespace

ResultBundle run(const ExperimentConfig& cfg, const RunOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    const NumericsConfig numerics = effective_numerics(cfg, options);

    ResultBundle bundle;
    nlohmann::json meta;
    switch (cfg.kind) {
        case ExperimentKind::Spectrum: {
            bundle.tables.push_back(spectrum_table(cfg, numerics, options.workers));
            bundle.tables.push_back(peaks_table(bundle.tables.front()));
            break;
        }
        case ExperimentKind::Evolve: {
            auto tables = run_evolve(cfg, numerics);
            bundle.tables.insert(bundle.tables.end(), tables.begin(), tables.end());
            break;
        }
        case ExperimentKind::G2:
            bundle.tables.push_back(g2_table(cfg, numerics));
            break;
        case ExperimentKind::Compare: {
            auto [table, max_dev] = compare_tables(cfg, numerics);
            bundle.tables.push_back(table);
            meta["max_relative_deviation"] = max_dev;
            break;
        }
        case ExperimentKind::Smatrix: {
            auto tables = run_smatrix(cfg, numerics);
            bundle.tables.insert(bundle.tables.end(), tables.begin(), tables.end());
            break;
        }
        case ExperimentKind::Linear: {
            auto tables = run_linear(cfg, numerics);
            bundle.tables.insert(bundle.tables.end(), tables.begin(), tables.end());
            break;
        }
        case ExperimentKind::Fock: {
            auto tables = run_fock(cfg, numerics);
            bundle.tables.insert(bundle.tables.end(), tables.begin(), tables.end());
            break;
        }
        case ExperimentKind::T2Estimate:
            bundle.tables.push_back(t2estimate_table(cfg, numerics, options.workers));
            break;
    }

    const auto elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    meta["config"] = nlohmann::json::parse(serialize_config(cfg));
    meta["version"] = version_string();
    meta["wall_time_seconds"] = elapsed;
    meta["rel_tol"] = numerics.rel_tol;
    meta["workers"] = options.workers;
    bundle.metadata_json = meta.dump(2);
    return bundle;
}

void write_bundle(const ResultBundle& bundle, const std::string& out_dir,
                  const std::string& prefix) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    for (const auto& t : bundle.tables) {
        std::ofstream out(fs::path(out_dir) / (prefix + "_" + t.name + ".tsv"));
        for (std::size_t c = 0; c < t.columns.size(); ++c)
            out << t.columns[c] << (c + 1 < t.columns.size() ? '\t' : '\n');
        char buf[64];
        for (const auto& row : t.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", row[c]);
                out << buf << (c + 1 < row.size() ? '\t' : '\n');
            }
        }
    }
    std::ofstream meta(fs::path(out_dir) / (prefix + "_meta.json"));
    meta << bundle.metadata_json << '\n';
}

}  // namespace wqed
