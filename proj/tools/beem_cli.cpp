// beem: run experiment configs, regenerate the results tables, dump datasets.

#include "beem/bench/config.hpp"
#include "beem/bench/experiment.hpp"
#include "beem/bench/suite.hpp"
#include "beem/datagen.hpp"
#include "beem/simd/kernels.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

void write_vectors(const beem::LabeledVectors& d, std::ostream& out) {
    const Eigen::Index dims = d.points.empty() ? 0 : d.points.front().size();
    for (Eigen::Index j = 0; j < dims; ++j) out << 'x' << j + 1 << ',';
    out << "label\n";
    char buf[32];
    for (std::size_t i = 0; i < d.points.size(); ++i) {
        for (Eigen::Index j = 0; j < dims; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", d.points[i][j]);
            out << buf << ',';
        }
        out << d.labels[i] << '\n';
    }
}

void write_sequences(const beem::LabeledSequences& d, std::ostream& out) {
    const Eigen::Index dims = d.sequences.empty() ? 0 : d.sequences.front().cols();
    out << "sequence,step";
    for (Eigen::Index j = 0; j < dims; ++j) out << ",x" << j + 1;
    out << ",label\n";
    char buf[32];
    for (std::size_t i = 0; i < d.sequences.size(); ++i) {
        for (Eigen::Index t = 0; t < d.sequences[i].rows(); ++t) {
            out << i << ',' << t;
            for (Eigen::Index j = 0; j < dims; ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", d.sequences[i](t, j));
                out << ',' << buf;
            }
            out << ',' << d.labels[i] << '\n';
        }
    }
}

int cmd_gen(const std::string& name, std::uint64_t seed, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write " << path << '\n';
        return kExitRuntime;
    }
    beem::RandomHmmSpec hmm;
    if (name == "square") {
        write_vectors(beem::gen_square({100, 50, 50, 10}, 10.0, 0.3, seed), out);
    } else if (name == "balanced_square") {
        write_vectors(beem::gen_square({50, 50, 50, 50}, 10.0, 0.3, seed), out);
    } else if (name == "rainbow") {
        write_vectors(beem::gen_rainbow(1000, 9.0, 8, seed), out);
    } else if (name == "random_hmm") {
        write_sequences(beem::gen_random_hmms(hmm, seed), out);
    } else if (name == "random_hmm_short") {
        hmm.len_lo = 5;
        hmm.len_hi = 10;
        write_sequences(beem::gen_random_hmms(hmm, seed), out);
    } else if (name == "sinusoid_simple") {
        write_vectors(beem::gen_sinusoid_association(beem::SinusoidVariant::Simple, seed), out);
    } else if (name == "sinusoid_complex") {
        write_vectors(beem::gen_sinusoid_association(beem::SinusoidVariant::Complex, seed), out);
    } else {
        std::cerr << "error: unknown dataset '" << name
                  << "' (square, balanced_square, rainbow, random_hmm, random_hmm_short, sinusoid_simple, sinusoid_complex)\n";
        return kExitConfig;
    }
    return out ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boltzmann-exploration EM benchmarks"};
    app.require_subcommand(1);

    std::string config_path, outdir, data_dir = "data", dataset, out_path;
    int repeats = 0, jobs = 1;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "Run one experiment config");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--outdir", outdir, "Output directory")->required();
    run->add_option("--repeats", repeats, "Override the number of repeats")->check(CLI::PositiveNumber);
    run->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

    auto* suite = app.add_subcommand("paper-suite", "Regenerate every results table and the GP traces");
    suite->add_option("--outdir", outdir, "Output directory")->required();
    suite->add_option("--data-dir", data_dir, "Directory holding iris.csv and characters/");
    suite->add_option("--repeats", repeats, "Override the number of repeats")->check(CLI::PositiveNumber);
    suite->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

    auto* gen = app.add_subcommand("gen", "Write a synthetic dataset as CSV");
    gen->add_option("--dataset", dataset, "Dataset name")->required();
    gen->add_option("--seed", seed, "Seed")->required();
    gen->add_option("--out", out_path, "Output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*gen) return cmd_gen(dataset, seed, out_path);

        std::cerr << "simd: " << beem::simd::isa_name(beem::simd::kernels().isa) << '\n';
        if (*run) {
            const beem::bench::ExperimentConfig config = beem::bench::load_config(config_path);
            beem::bench::RunOptions options;
            options.jobs = jobs;
            if (repeats > 0) options.repeats = repeats;
            const auto result = beem::bench::run_and_write(config, outdir, options);
            std::cout << beem::bench::table_csv({result.row});
            return kExitOk;
        }
        beem::bench::SuiteOptions options;
        options.outdir = outdir;
        options.data_dir = data_dir;
        options.jobs = jobs;
        if (repeats > 0) options.repeats = repeats;
        beem::bench::paper_suite(options, std::cout);
        return kExitOk;
    } catch (const beem::bench::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const beem::bench::ExperimentFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
