#pragma once

// Mixtures of HMMs fitted by soft EM (Baum-Welch on the block-diagonal
// HMM), with random and sequence-similarity initialisation.

#include "beem/common.hpp"
#include "beem/core/beem.hpp"
#include "beem/models/hmm.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace beem {

struct MhmmEmConfig {
    int max_iters = 100;
    double tol = 1e-4;
    double variance_floor = kVarianceFloor;
};

struct MhmmFit {
    FitReport report;
    std::vector<HmmComponent> hmms;
    Vector weights;
    double loglik = 0.0;
};

// Key A: each component gets emission means drawn from random frames, the
// pooled frame variance, a uniform initial distribution and Dirichlet(1)
// transition rows.
std::vector<HmmComponent> mhmm_init_random(std::span<const Sequence> seqs, std::size_t k, Eigen::Index states, Rng& rng);

// Sequence-similarity initialisation: one HMM per sequence, cross
// log-likelihood matrix L[i][j] = log p(seq_j | model_i), symmetrised, rows
// clustered by k-means, one HMM fitted per group.
struct SmythOptions {
    int per_sequence_iters = 10;
    int group_iters = 10;
};
std::vector<HmmComponent> smyth_init(std::span<const Sequence> seqs, std::size_t k, Eigen::Index states,
                                     std::uint64_t seed, const SmythOptions& options = {});

// Intermediate results of smyth_init, exposed for inspection.
struct SmythSimilarity {
    Matrix similarity;                 // symmetrised, over the usable sequences
    std::vector<std::size_t> usable;   // indices of sequences with length >= 2
    Labels groups;                     // k-means group per usable sequence
};
SmythSimilarity smyth_similarity(std::span<const Sequence> seqs, std::size_t k, Eigen::Index states,
                                 std::uint64_t seed, const SmythOptions& options = {});

// Soft EM: responsibilities r_nk ∝ w_k p(seq_n | hmm_k); each component gets
// one weighted Baum-Welch update per iteration. Observed-data
// log-likelihood is non-decreasing.
MhmmFit em_fit_mhmm(std::span<const Sequence> seqs, std::vector<HmmComponent> init, const MhmmEmConfig& config);

}  // namespace beem
