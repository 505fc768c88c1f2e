#pragma once

#include "wqed/config.hpp"

namespace wqed {

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ResultBundle {
    std::vector<Table> tables;
    std::string metadata_json;

    const Table& table(const std::string& name) const;
};

struct RunOptions {
    int workers = 1;
    std::optional<double> tol_override;
};

/// Executes one experiment. Deterministic for a fixed config: grid points are
/// computed in parallel but written into preallocated slots.
ResultBundle run(const ExperimentConfig& config, const RunOptions& options = {});

/// Writes one TSV file per table plus a JSON metadata sidecar into out_dir.
void write_bundle(const ResultBundle& bundle, const std::string& out_dir,
                  const std::string& prefix);

/// Location of the maximum via quadratic interpolation over the three highest
/// grid points; ties break toward the smaller grid value.
double quadratic_peak(std::span<const double> grid, std::span<const double> values);

/// Runs fn(i) for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace wqed
