#pragma once

// Gaussian process regression on scalar inputs, used as a mixture component
// for data association.

#include "beem/common.hpp"
#include "beem/core/beem.hpp"

#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace beem {

enum class KernelFamily { Rbf, Periodic };

struct KernelSpec {
    KernelFamily family = KernelFamily::Rbf;
    double output_variance = 1.0;
    double lengthscale = 1.0;
    double period = 1.0;  // Periodic only

    void validate() const;
};

// RBF:      s2 * exp(-|x - x'|^2 / (2 l^2))
// Periodic: s2 * exp(-2 sin^2(pi |x - x'| / p) / l^2)
double kernel_eval(const KernelSpec& spec, double x, double xp);

Matrix gram_matrix(const KernelSpec& spec, std::span<const double> inputs);

struct GpComponent {
    KernelSpec kernel;
    double noise_variance = 0.01;
    std::vector<double> inputs;
    std::vector<double> targets;
};

// Factorised posterior of a GpComponent; cheap to query repeatedly.
class GpPosterior {
public:
    // with_held_out also factorises what loo_log_predictive needs (O(n^3)).
    explicit GpPosterior(const GpComponent& comp, bool with_held_out = false);

    double log_marginal_likelihood() const;
    double mean(double x) const;
    // Latent variance at x (without observation noise).
    double latent_variance(double x) const;
    // log N(y | mean(x), latent_variance(x) + noise)
    double log_predictive(double x, double y) const;
    // Predictive log density of training target i with point i held out.
    double loo_log_predictive(std::size_t i) const;

    const GpComponent& component() const { return comp_; }

private:
    GpComponent comp_;
    Eigen::LLT<Matrix> llt_;
    Vector alpha_;  // (K + s2 I)^{-1} y
    Vector inv_diag_;
    double log_det_ = 0.0;
};

double gp_log_marginal_likelihood(const GpComponent& comp);
double gp_log_predictive(const GpComponent& comp, double x, double y);

// Derivative-free coordinate search over the log hyperparameters
// (output variance, lengthscale, period for Periodic, and the noise variance
// when fit_noise is set; otherwise noise stays fixed). One unit of budget is
// one sweep over all coordinates.
GpComponent gp_fit_hyperparams(std::span<const double> inputs, std::span<const double> targets,
                               const KernelSpec& initial, double noise_variance, int budget, bool fit_noise = false);

struct GpPoint {
    double x = 0.0;
    double y = 0.0;
};

enum class GpScore {
    LeaveIn,      // predictive given the whole training set
    LeaveOneOut,  // training points are scored with themselves held out
};

// GP base model: the per-observation score is a posterior predictive log
// density given the component's current training set; the refit replaces
// the training set and runs a warm-started hyperparameter search.
class GpModel {
public:
    struct Options {
        KernelSpec kernel;
        double noise_variance = 0.01;
        int budget = 10;
        bool fit_noise = true;
        GpScore score = GpScore::LeaveIn;
        // Start each hyperparameter search from the previous fit rather than
        // from `kernel` and `noise_variance`.
        bool warm_start = false;
    };

    explicit GpModel(Options options);

    double log_likelihood(const GpPoint& p) const;
    void fit(const Subset<GpPoint>& subset);
    std::vector<double> parameters() const;

    const GpComponent& component() const { return posterior_->component(); }

private:
    Options options_;
    std::shared_ptr<const GpPosterior> posterior_;
    // (x, y) of each training point -> its index, for held-out scoring.
    std::shared_ptr<const std::map<std::pair<double, double>, std::size_t>> members_;
};

}  // namespace beem
