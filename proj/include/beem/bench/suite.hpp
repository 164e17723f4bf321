#pragma once

// Regenerates every in-scope results table and the GP association traces,
// then compares each cell with the published reference mean.

#include "beem/bench/config.hpp"
#include "beem/bench/experiment.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace beem::bench {

// Published mean and std of one row; std < 0 when none was given.
struct Reference {
    double acc, acc_sd, homo, homo_sd, nmi, nmi_sd, ari, ari_sd;
};

struct SuiteEntry {
    ExperimentConfig config;
    Reference reference;
};

struct SuiteTable {
    std::string name;
    std::vector<SuiteEntry> entries;
    // Relative to the data directory; empty for generated datasets.
    std::filesystem::path requires_file;
};

struct SuiteOptions {
    std::filesystem::path outdir;
    std::filesystem::path data_dir = "data";
    std::optional<int> repeats;
    int jobs = 1;
};

struct SuiteCell {
    std::string table;
    std::string method, init, weight, metric;
    double computed = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;
    bool flagged = false;
};

struct SuiteSummary {
    std::vector<SuiteCell> cells;
    std::vector<std::string> skipped;
    int flagged() const;
};

inline constexpr double kToleranceFloor = 0.05;

// Tolerance max(2 * std, floor); floor only when no std was published.
double tolerance(double reference_sd);

std::vector<SuiteTable> suite_tables(const std::filesystem::path& data_dir);

// GP association experiments: simple and complex sinusoid variants.
std::vector<ExperimentConfig> suite_gp_configs();

SuiteSummary paper_suite(const SuiteOptions& options, std::ostream& log);

}  // namespace beem::bench
