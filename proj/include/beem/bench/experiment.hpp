#pragma once

// Seeded repeats of one experiment, metric aggregation and report files.

#include "beem/bench/config.hpp"
#include "beem/core/beem.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace beem::bench {

// More than 10% of the runs failed.
struct ExperimentFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunRecord {
    int index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double acc = 0.0, homo = 0.0, nmi = 0.0, ari = 0.0;
    int em_steps = 0;
    double wall_seconds = 0.0;
    FitReport report;
    Labels truth;
    // Purity of the sampled assignment at every iteration (BEEM only).
    std::vector<double> purity_trace;
    // Two-cluster fits only: membership of the cluster matched to class 1.
    std::vector<double> class1_scores;
    std::optional<double> auroc;
};

struct Stat {
    double mean = 0.0;
    double std = 0.0;  // population
};

struct ResultRow {
    std::string experiment;
    std::string method;
    std::string init;
    std::string weight;
    std::string family;
    Stat acc, homo, nmi, ari, em_steps;
    int runs = 0;
    int failures = 0;
    Stat wall_seconds;
};

struct ExperimentResult {
    ResultRow row;
    std::vector<RunRecord> runs;
};

struct RunOptions {
    int jobs = 1;
    // Overrides config.repeats when set.
    std::optional<int> repeats;
    // Per-run trace CSVs go to <trace_dir>/run_<index>.csv when nonempty.
    std::filesystem::path trace_dir;
};

Stat mean_std(const std::vector<double>& values);

// One run with the given seed; throws on failure.
RunRecord run_once(const ExperimentConfig& config, int index, std::uint64_t seed);

// Runs repeats with seeds base_seed + i. Failed runs are excluded with a
// warning; throws ExperimentFailure when more than 10% fail.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

enum class TableFormat { Csv, Json };

// CSV: fixed column order, 4 decimals. JSON: full precision.
void emit_table(const std::vector<ResultRow>& rows, TableFormat format, const std::filesystem::path& path);
std::string table_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_table_json(const std::filesystem::path& path);

// experiment, runs, wall_mean, wall_std
void emit_wall_times(const std::vector<ResultRow>& rows, const std::filesystem::path& path);

// Long format: one line per (iteration, cluster). Purity is blank when the
// method has no per-iteration assignment or no labels are given.
void emit_traces(const FitReport& report, const Labels& truth, const std::filesystem::path& path);

// Writes <outdir>/<name>.csv, .json, _wall_time.csv and traces/<name>/.
ExperimentResult run_and_write(const ExperimentConfig& config, const std::filesystem::path& outdir, RunOptions options);

}  // namespace beem::bench
