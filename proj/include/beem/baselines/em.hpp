#pragma once

// Soft-assignment baselines: standard EM for Gaussian mixtures, EM with
// restarts, deterministic annealing EM, and the initialisers they share.

#include "beem/common.hpp"
#include "beem/core/beem.hpp"
#include "beem/models/gaussian.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace beem {

enum class EmInit {
    RandomObservations,  // key A
    KMeans,              // key B
    Provided,
};

struct EmConfig {
    int max_iters = 500;
    double tol = 1e-6;
    EmInit init = EmInit::RandomObservations;
    std::uint64_t seed = 0;
    // Added to a covariance only when its smallest eigenvalue falls below it.
    double covariance_floor = kCovarianceFloor;

    void validate() const;
};

struct DaemConfig {
    std::vector<double> beta_schedule{0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
    int inner_iters = 15;

    void validate() const;
};

struct GmmParams {
    std::vector<GaussianComponent> components;
    Vector weights;

    std::size_t size() const { return components.size(); }
};

struct GmmFit {
    FitReport report;  // loglik_trace holds the observed-data log-likelihood
    GmmParams params;
    double loglik = 0.0;           // observed-data, at params
    double complete_loglik = 0.0;  // sum_n max_k [log w_k + log p(x_n | k)]
};

// Means drawn without replacement from the observations; covariance
// diag(per-dimension data variance); uniform weights.
GmmParams init_random_observations(std::span<const Vector> data, std::size_t k, Rng& rng);

inline constexpr int kKMeansRestarts = 10;

// Best of kKMeansRestarts k-means++ seeded Lloyd runs; per-cluster MLE covariance and cluster-fraction weights.
GmmParams init_kmeans(std::span<const Vector> data, std::size_t k, std::uint64_t seed);

// Gaussian components for BEEM started from k-means (key B).
std::vector<GaussianComponent> beem_init_B(std::span<const Vector> data, std::size_t k, std::uint64_t seed);

// N x K responsibilities under the beta-tempered posterior; returns the
// observed-data log-likelihood (untempered).
double gmm_e_step(const Matrix& packed, const GmmParams& params, double beta, Matrix& resp);

GmmFit em_fit_gmm(std::span<const Vector> data, std::size_t k, const EmConfig& config,
                  const GmmParams* provided = nullptr);

// `restarts` independent runs with seeds config.seed + r; keeps the run with
// the highest complete-data log-likelihood. report.em_steps is the total.
GmmFit em_restarts(std::span<const Vector> data, std::size_t k, int restarts, const EmConfig& config);

// Annealed posterior [w_k p(x | k)]^beta. Every beta below 1 runs inner_iters
// iterations; the final beta = 1 phase is standard EM to convergence.
GmmFit daem_fit_gmm(std::span<const Vector> data, std::size_t k, const DaemConfig& daem, const EmConfig& config,
                    const GmmParams* provided = nullptr);

}  // namespace beem
