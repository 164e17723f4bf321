#include "beem/models/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beem {
namespace {

constexpr double kLogParamBound = 12.0;

std::vector<double> to_log_params(const KernelSpec& k) {
    std::vector<double> p{std::log(k.output_variance), std::log(k.lengthscale)};
    if (k.family == KernelFamily::Periodic) p.push_back(std::log(k.period));
    return p;
}

KernelSpec from_log_params(KernelFamily family, const std::vector<double>& p, double period_fallback) {
    KernelSpec k;
    k.family = family;
    k.output_variance = std::exp(p[0]);
    k.lengthscale = std::exp(p[1]);
    k.period = family == KernelFamily::Periodic ? std::exp(p[2]) : period_fallback;
    return k;
}

}  // namespace

void KernelSpec::validate() const {
    if (!(output_variance > 0.0) || !(lengthscale > 0.0) || !(period > 0.0)) {
        throw std::invalid_argument("KernelSpec: hyperparameters must be positive");
    }
}

double kernel_eval(const KernelSpec& spec, double x, double xp) {
    const double r = std::abs(x - xp);
    switch (spec.family) {
        case KernelFamily::Rbf:
            return spec.output_variance * std::exp(-r * r / (2.0 * spec.lengthscale * spec.lengthscale));
        case KernelFamily::Periodic: {
            const double s = std::sin(std::numbers::pi * r / spec.period);
            return spec.output_variance * std::exp(-2.0 * s * s / (spec.lengthscale * spec.lengthscale));
        }
    }
    return 0.0;
}

Matrix gram_matrix(const KernelSpec& spec, std::span<const double> inputs) {
    const auto n = static_cast<Eigen::Index>(inputs.size());
    Matrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        g(i, i) = kernel_eval(spec, inputs[static_cast<std::size_t>(i)], inputs[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < i; ++j) {
            g(i, j) = g(j, i) = kernel_eval(spec, inputs[static_cast<std::size_t>(i)], inputs[static_cast<std::size_t>(j)]);
        }
    }
    return g;
}

GpPosterior::GpPosterior(const GpComponent& comp, bool with_held_out) : comp_(comp) {
    comp_.kernel.validate();
    if (!(comp_.noise_variance > 0.0)) throw std::invalid_argument("GpPosterior: noise variance must be positive");
    if (comp_.inputs.size() != comp_.targets.size()) throw std::invalid_argument("GpPosterior: input/target count");
    if (comp_.inputs.empty()) return;

    Matrix cov = gram_matrix(comp_.kernel, comp_.inputs);
    cov.diagonal().array() += comp_.noise_variance;
    llt_.compute(cov);
    if (llt_.info() != Eigen::Success) {
        cov.diagonal().array() += 1e-8 * std::max(1.0, cov.diagonal().mean());
        llt_.compute(cov);
        if (llt_.info() != Eigen::Success) throw std::domain_error("GP covariance factorisation failed");
    }
    const Eigen::Map<const Vector> y(comp_.targets.data(), static_cast<Eigen::Index>(comp_.targets.size()));
    alpha_ = llt_.solve(y);
    const Matrix& l = llt_.matrixLLT();
    log_det_ = 2.0 * l.diagonal().array().log().sum();
    if (with_held_out) {
        const auto n = static_cast<Eigen::Index>(comp_.inputs.size());
        const Matrix linv = llt_.matrixL().solve(Matrix::Identity(n, n));
        inv_diag_ = linv.colwise().squaredNorm().transpose();
    }
}

double GpPosterior::log_marginal_likelihood() const {
    const auto n = static_cast<double>(comp_.inputs.size());
    if (comp_.inputs.empty()) return 0.0;
    const Eigen::Map<const Vector> y(comp_.targets.data(), static_cast<Eigen::Index>(comp_.targets.size()));
    return -0.5 * y.dot(alpha_) - 0.5 * log_det_ - 0.5 * n * kLog2Pi;
}

double GpPosterior::mean(double x) const {
    double m = 0.0;
    for (std::size_t i = 0; i < comp_.inputs.size(); ++i) {
        m += kernel_eval(comp_.kernel, x, comp_.inputs[i]) * alpha_[static_cast<Eigen::Index>(i)];
    }
    return m;
}

double GpPosterior::latent_variance(double x) const {
    const double prior = kernel_eval(comp_.kernel, x, x);
    if (comp_.inputs.empty()) return prior;
    Vector ks(static_cast<Eigen::Index>(comp_.inputs.size()));
    for (std::size_t i = 0; i < comp_.inputs.size(); ++i) ks[static_cast<Eigen::Index>(i)] = kernel_eval(comp_.kernel, x, comp_.inputs[i]);
    llt_.matrixL().solveInPlace(ks);
    return std::max(prior - ks.squaredNorm(), 0.0);
}

double GpPosterior::log_predictive(double x, double y) const {
    const double var = latent_variance(x) + comp_.noise_variance;
    const double r = y - mean(x);
    return -0.5 * (kLog2Pi + std::log(var) + r * r / var);
}

double GpPosterior::loo_log_predictive(std::size_t i) const {
    if (i >= comp_.inputs.size()) throw std::out_of_range("loo_log_predictive: index");
    if (inv_diag_.size() == 0) throw std::logic_error("loo_log_predictive: posterior built without held-out terms");
    const auto ii = static_cast<Eigen::Index>(i);
    const double var = 1.0 / inv_diag_[ii];
    const double r = alpha_[ii] * var;  // y_i - loo mean
    return -0.5 * (kLog2Pi + std::log(var) + r * r / var);
}

double gp_log_marginal_likelihood(const GpComponent& comp) {
    if (comp.inputs.empty()) throw std::invalid_argument("gp_log_marginal_likelihood: no training points");
    return GpPosterior(comp).log_marginal_likelihood();
}

double gp_log_predictive(const GpComponent& comp, double x, double y) { return GpPosterior(comp).log_predictive(x, y); }

GpComponent gp_fit_hyperparams(std::span<const double> inputs, std::span<const double> targets,
                               const KernelSpec& initial, double noise_variance, int budget, bool fit_noise) {
    if (inputs.size() < 2) throw std::invalid_argument("gp_fit_hyperparams: need at least two points");
    if (inputs.size() != targets.size()) throw std::invalid_argument("gp_fit_hyperparams: input/target count");
    initial.validate();

    GpComponent comp;
    comp.kernel = initial;
    comp.noise_variance = noise_variance;
    comp.inputs.assign(inputs.begin(), inputs.end());
    comp.targets.assign(targets.begin(), targets.end());

    auto unpack = [&](const std::vector<double>& theta, GpComponent& out) {
        out.kernel = from_log_params(initial.family, theta, initial.period);
        if (fit_noise) out.noise_variance = std::exp(theta.back());
    };
    auto objective = [&](const std::vector<double>& theta) {
        GpComponent trial = comp;
        unpack(theta, trial);
        try {
            return GpPosterior(trial).log_marginal_likelihood();
        } catch (const std::domain_error&) {
            return kNegInf;
        }
    };

    std::vector<double> theta = to_log_params(initial);
    if (fit_noise) theta.push_back(std::log(noise_variance));
    std::vector<double> step(theta.size(), 0.5);
    double best = objective(theta);

    for (int sweep = 0; sweep < budget; ++sweep) {
        for (std::size_t i = 0; i < theta.size(); ++i) {
            bool moved = false;
            for (double sign : {1.0, -1.0}) {
                std::vector<double> trial = theta;
                trial[i] = std::clamp(trial[i] + sign * step[i], -kLogParamBound, kLogParamBound);
                const double v = objective(trial);
                if (v > best) {
                    best = v;
                    theta = std::move(trial);
                    moved = true;
                    break;
                }
            }
            if (moved) {
                step[i] *= 1.5;
            } else {
                step[i] *= 0.5;
            }
        }
    }
    unpack(theta, comp);
    return comp;
}

GpModel::GpModel(Options options) : options_(options) {
    if (options_.budget < 0) throw std::invalid_argument("GpModel: budget must be nonnegative");
    GpComponent comp;
    comp.kernel = options_.kernel;
    comp.noise_variance = options_.noise_variance;
    posterior_ = std::make_shared<const GpPosterior>(comp);
}

double GpModel::log_likelihood(const GpPoint& p) const {
    if (members_ && posterior_->component().inputs.size() > 1) {
        const auto it = members_->find({p.x, p.y});
        if (it != members_->end()) return posterior_->loo_log_predictive(it->second);
    }
    return posterior_->log_predictive(p.x, p.y);
}

void GpModel::fit(const Subset<GpPoint>& subset) {
    if (subset.empty()) throw std::invalid_argument("GpModel::fit: empty subset");
    std::vector<double> xs, ys;
    xs.reserve(subset.size());
    ys.reserve(subset.size());
    for (std::size_t i = 0; i < subset.size(); ++i) {
        xs.push_back(subset[i].x);
        ys.push_back(subset[i].y);
    }
    const GpComponent& current = posterior_->component();
    const KernelSpec& start = options_.warm_start ? current.kernel : options_.kernel;
    const double start_noise = options_.warm_start ? current.noise_variance : options_.noise_variance;
    GpComponent next;
    if (xs.size() >= 2) {
        next = gp_fit_hyperparams(xs, ys, start, start_noise, options_.budget, options_.fit_noise);
    } else {
        next.kernel = start;
        next.noise_variance = start_noise;
        next.inputs = xs;
        next.targets = ys;
    }
    const bool held_out = options_.score == GpScore::LeaveOneOut && xs.size() >= 2;
    posterior_ = std::make_shared<const GpPosterior>(next, held_out);
    members_.reset();
    if (held_out) {
        auto members = std::make_shared<std::map<std::pair<double, double>, std::size_t>>();
        for (std::size_t i = 0; i < xs.size(); ++i) members->emplace(std::pair{xs[i], ys[i]}, i);
        members_ = std::move(members);
    }
}

std::vector<double> GpModel::parameters() const {
    std::vector<double> p = to_log_params(posterior_->component().kernel);
    if (options_.fit_noise) p.push_back(std::log(posterior_->component().noise_variance));
    return p;
}

}  // namespace beem
