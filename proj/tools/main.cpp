#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "wqed/runner.hpp"
#include "wqed/version.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    int workers = 1;
    double tol = 0.0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--workers", args.workers, "worker threads for grid sweeps")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tol", args.tol, "override the relative tolerance");
}

int run_kind(wqed::ExperimentKind kind, const CommonArgs& args) {
    const auto cfg = wqed::load_config(args.config_path);
    if (cfg.kind != kind)
        throw wqed::ConfigError("config kind '" + wqed::to_string(cfg.kind) +
                                "' does not match subcommand '" +
                                wqed::to_string(kind) + "'");
    wqed::RunOptions opts;
    opts.workers = args.workers;
    if (args.tol > 0.0) opts.tol_override = args.tol;
    const auto bundle = wqed::run(cfg, opts);
    wqed::write_bundle(bundle, args.out_dir, cfg.output_prefix);
    std::printf("wrote %zu table(s) to %s (prefix %s)\n", bundle.tables.size(),
                args.out_dir.c_str(), cfg.output_prefix.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"few-photon transport through atom chains coupled to a 1D waveguide"};
    app.set_version_flag("--version", wqed::version_string());
    app.require_subcommand(1);

    const std::vector<wqed::ExperimentKind> kinds = {
        wqed::ExperimentKind::Spectrum, wqed::ExperimentKind::Evolve,
        wqed::ExperimentKind::G2,       wqed::ExperimentKind::Smatrix,
        wqed::ExperimentKind::Linear,   wqed::ExperimentKind::Compare,
        wqed::ExperimentKind::Fock,     wqed::ExperimentKind::T2Estimate,
    };
    std::vector<CommonArgs> args(kinds.size());
    for (std::size_t i = 0; i < kinds.size(); ++i)
        add_common(app.add_subcommand(wqed::to_string(kinds[i])), args[i]);

    CLI11_PARSE(app, argc, argv);

    try {
        for (std::size_t i = 0; i < kinds.size(); ++i)
            if (app.get_subcommand(wqed::to_string(kinds[i]))->parsed())
                return run_kind(kinds[i], args[i]);
        std::fprintf(stderr, "no subcommand given\n");
        return 2;
    } catch (const wqed::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const wqed::ModelError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const wqed::DimensionError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const wqed::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
