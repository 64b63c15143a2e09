#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entrate/entropy_est.hpp"
#include "entrate/markov.hpp"

namespace entrate {

/*
 * Monte Carlo RMSE harness: per-trial chain generation, path simulation,
 * estimation against the exact rate, deterministic parallel execution, and
 * plot-ready CSV/JSON reports.
 */

struct BenchConfig {
    std::uint32_t S = 200;
    std::vector<std::string> families;   // of {memoryless_uniform, zipf, geometric, uniform_spectrum}
    std::vector<std::uint64_t> n_grid;   // each >= 2
    std::uint32_t trials = 10;
    std::vector<std::string> estimators; // of {emp, opt, mm}; lz joins via include_lz
    std::uint64_t master_seed = 0;
    double gamma_star = 0.1;             // uniform_spectrum target
    PolyEstimatorParams poly;
    bool overlay_thm2 = false;           // extra estimator="thm2_bound" rows
    bool include_lz = false;
    std::uint64_t lz_max_n = 100000;     // lz rows only for n <= this
    unsigned threads = 1;
};

struct BenchRow {
    std::string family;
    std::uint32_t S = 0;
    std::uint64_t n = 0;
    std::string estimator;
    double rmse = 0.0;
    double mean_error = 0.0; // mean(estimate - exact), signed
    std::uint32_t trials = 0;
    std::uint64_t seed = 0;
    std::string error; // empty unless every use of this cell failed identically
};

// "lo:hi:logN" for N log-spaced points (deduplicated), or a comma list.
std::vector<std::uint64_t> parse_grid(const std::string& spec);

// One chain per (family, n, trial) from seeds derived off the master seed,
// one path per trial shared by all estimators, errors recorded per row
// rather than thrown. Rows come back sorted by (family, n, estimator) and
// with doubles pre-snapped to their 9-significant-digit representation so
// CSV and JSON emit identical values.
std::vector<BenchRow> run_bench(const BenchConfig& config);

std::string rows_to_csv(const std::vector<BenchRow>& rows);
std::string rows_to_json(const std::vector<BenchRow>& rows);

// format is "csv" or "json"; path "-" writes to stdout.
void emit_report(const std::vector<BenchRow>& rows, const std::string& format,
                 const std::string& path);

} // namespace entrate
