#pragma once

// Seeded synthetic benchmarks and loaders for the real datasets. Every
// generator is a pure function of its arguments.

#include "beem/common.hpp"
#include "beem/models/gp.hpp"
#include "beem/models/hmm.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace beem {

struct LabeledVectors {
    std::vector<Vector> points;
    Labels labels;
    std::size_t num_classes = 0;
    std::vector<std::string> class_names;
    std::string provenance;
};

struct LabeledSequences {
    std::vector<Sequence> sequences;
    Labels labels;
    std::vector<std::size_t> lengths;
    std::size_t num_classes = 0;
    std::vector<std::string> class_names;
    std::string provenance;
};

// Four isotropic Gaussians at (+-side/2, +-side/2). counts[i] belongs to the
// corner i taken clockwise from the top-left: (-,+), (+,+), (+,-), (-,-).
LabeledVectors gen_square(const std::array<int, 4>& counts, double side, double var, std::uint64_t seed);

// k means r*(cos w_i, sin w_i) with w_i = i*pi/(k-1); unit covariance;
// component chosen uniformly per sample.
std::vector<Vector> rainbow_means(double radius, std::size_t k);
LabeledVectors gen_rainbow(std::size_t n, double radius, std::size_t k, std::uint64_t seed);

struct RandomHmmSpec {
    std::size_t k = 3;
    Eigen::Index n_states = 4;
    std::vector<double> state_means{-2.0, -1.0, 0.0, 1.0};
    double state_std = 0.1;
    std::size_t seqs_per_cluster = 20;
    int len_lo = 20;
    int len_hi = 50;
};

// k HMMs with Dirichlet(1) initial distributions and transition rows, shared
// scalar emissions; lengths uniform on [len_lo, len_hi].
LabeledSequences gen_random_hmms(const RandomHmmSpec& spec, std::uint64_t seed);

enum class SinusoidVariant { Simple, Complex };

struct SinusoidOptions {
    bool noise = true;
    bool subsample = true;
};

// Points are (x, y) pairs. Simple: sin(pi x) and sin(pi x + pi/2), crossing
// once, 125 uniform inputs on [0, 1] each, noise variance 0.01. Complex: +sin and -sin
// over one cycle on a 100-point grid, noise variances 0.3 and 0.2,
// subsampled to 75 and 60 points; inputs rescaled to [0, 1] and outputs
// standardised.
LabeledVectors gen_sinusoid_association(SinusoidVariant variant, std::uint64_t seed, const SinusoidOptions& options = {});

std::vector<GpPoint> to_gp_points(const LabeledVectors& data);

// Comma-separated with a header row. The label column is given by name or by
// 0-based index; its values may be any strings and are numbered in order of
// first appearance. Every other column must be numeric.
LabeledVectors load_labeled_csv(const std::filesystem::path& path, const std::string& label_column);

// One file per sequence, one time step per line, whitespace-separated
// floats. The class tag is the filename up to the first '_'. Only the listed
// classes are kept; labels follow the order of `classes`.
LabeledSequences load_sequence_corpus(const std::filesystem::path& dir, const std::vector<std::string>& classes);

}  // namespace beem
