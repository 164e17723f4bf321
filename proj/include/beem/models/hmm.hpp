#pragma once

// Hidden Markov models with diagonal-covariance Gaussian emissions, evaluated
// in the log domain.

#include "beem/common.hpp"
#include "beem/core/beem.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace beem {

inline constexpr double kVarianceFloor = 1e-6;

// One row per time step, one column per emission dimension.
using Sequence = Matrix;

struct HmmComponent {
    Vector initial;       // S
    Matrix transition;    // S x S, row-stochastic
    Matrix means;         // S x d
    Matrix variances;     // S x d, diagonal emission variances

    Eigen::Index states() const { return initial.size(); }
    Eigen::Index dims() const { return means.cols(); }
    void validate() const;
};

// log p(seq_t | state s) for every t and s, L x S.
Matrix emission_log_densities(const Sequence& seq, const HmmComponent& hmm);

// log p(seq | hmm) via the forward recursion with log-sum-exp per step.
double hmm_forward_loglik(const Sequence& seq, const HmmComponent& hmm);

// One Baum-Welch update over several sequences. Expected counts are pooled
// across sequences, each scaled by its weight (empty = all ones). Returns the
// weighted log-likelihood of the sequences under `current`.
double hmm_reestimate(std::span<const Sequence> seqs, std::span<const double> weights, const HmmComponent& current,
                      HmmComponent& updated, double variance_floor = kVarianceFloor);

struct BaumWelchResult {
    HmmComponent model;
    // Total log-likelihood under the parameters at the start of each iteration,
    // followed by the value at the returned parameters.
    std::vector<double> loglik_trace;
    int iterations = 0;
};

BaumWelchResult baum_welch_fit(std::span<const Sequence> seqs, const HmmComponent& init, int max_iters, double tol,
                               std::span<const double> weights = {}, double variance_floor = kVarianceFloor);

// Block-diagonal transition matrix of a mixture of HMMs.
Matrix mhmm_block_transition(std::span<const HmmComponent> hmms);

// The single HMM equivalent to a mixture of HMMs with the given mixing
// weights (uniform when empty): block-diagonal transitions, initial mass of
// block k scaled by its weight.
HmmComponent mhmm_block_hmm(std::span<const HmmComponent> hmms, std::span<const double> weights = {});

// Starting point for Baum-Welch: emission means/variances from k-means over all
// frames, uniform initial distribution, near-uniform random transitions.
HmmComponent hmm_initial_guess(std::span<const Sequence> seqs, Eigen::Index states, Rng& rng);

// Random HMM with Dirichlet(1) initial distribution and transition rows.
HmmComponent random_hmm(const Matrix& means, const Matrix& variances, Rng& rng);

Sequence sample_hmm(const HmmComponent& hmm, Eigen::Index length, Rng& rng);

// HMM base model: forward log-likelihood as the density, Baum-Welch as the
// refit. By default each refit starts from a fresh initial guess on the
// assigned subset, so the fit depends only on the subset and the seed.
class HmmModel {
public:
    struct Options {
        Eigen::Index states = 4;
        int fit_iters = 10;
        double tol = 1e-4;
        double variance_floor = kVarianceFloor;
        std::uint64_t seed = 0;
        // Continue Baum-Welch from the current parameters instead of a fresh
        // initial guess on every refit.
        bool warm_start = false;
    };

    explicit HmmModel(Options options) : options_(options) {}
    HmmModel(HmmComponent initial, Options options);

    double log_likelihood(const Sequence& seq) const;
    void fit(const Subset<Sequence>& subset);
    std::vector<double> parameters() const;

    bool fitted() const { return fitted_; }
    const HmmComponent& component() const { return hmm_; }

private:
    Options options_;
    HmmComponent hmm_;
    bool fitted_ = false;
    std::uint64_t fits_ = 0;
};

}  // namespace beem
