#pragma once

// Boltzmann-exploration EM over an abstract base-model contract.
//
// Each iteration scores every observation under every component (the value
// matrix), turns each row into a temperature-scaled softmax, draws one hard
// assignment per observation from it, and refits every component on the
// observations it received. The temperature decays geometrically from its
// initial value, so early iterations explore and later ones exploit.
//
// Component indices are 0-based throughout.

#include "beem/common.hpp"

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace beem {

// Read-only view of the observations with the given indices.
template <class Obs>
class Subset {
public:
    Subset(std::span<const Obs> data, std::span<const std::size_t> indices) : data_(data), indices_(indices) {}

    std::size_t size() const { return indices_.size(); }
    bool empty() const { return indices_.empty(); }
    const Obs& operator[](std::size_t i) const { return data_[indices_[i]]; }
    std::span<const std::size_t> indices() const { return indices_; }
    std::span<const Obs> data() const { return data_; }

    std::vector<Obs> gather() const {
        std::vector<Obs> out;
        out.reserve(size());
        for (std::size_t i : indices_) out.push_back(data_[i]);
        return out;
    }

private:
    std::span<const Obs> data_;
    std::span<const std::size_t> indices_;
};

// A base distribution usable by the engine: a natural-log density for one
// observation, and a refit on a subset of observations.
template <class M, class Obs>
concept BaseModel = std::copy_constructible<M> && requires(M m, const M cm, const Obs& x, const Subset<Obs>& s) {
    { cm.log_likelihood(x) } -> std::convertible_to<double>;
    m.fit(s);
};

// Optional: score a whole dataset at once (lets models use the SIMD kernels).
template <class M, class Obs>
concept BatchScoring = requires(const M cm, std::span<const Obs> data, std::span<double> out) {
    cm.log_likelihood_batch(data, out);
};

// Optional: flat parameter vector, needed only for the parameter-change stop rule.
template <class M>
concept FlatParameters = requires(const M cm) {
    { cm.parameters() } -> std::convertible_to<std::vector<double>>;
};

enum class WeightMode {
    UniformFixed,  // key I
    Learned,       // key II
};

enum class Termination {
    LikelihoodPatience,
    ParameterChange,
};

struct BeemConfig {
    double tau0 = 1.5;
    double alpha = 0.97;
    int patience = 10;
    int max_iters = 500;
    double epsilon = 0.0;
    Termination termination = Termination::LikelihoodPatience;
    WeightMode weight_mode = WeightMode::UniformFixed;
    std::uint64_t seed = 0;
    // Replace the categorical draw by argmax (classification EM). Test hook.
    bool greedy_assignment = false;

    void validate() const;
};

struct AssignmentState {
    Labels labels;
    std::vector<std::vector<std::size_t>> subsets;
    double temperature = 1.0;
    int iteration = 0;

    static AssignmentState from_labels(const Labels& labels, std::size_t k);
    // Subsets are disjoint, cover 0..N-1 and agree with labels.
    bool consistent() const;
};

struct FitReport {
    Labels labels;
    std::vector<double> loglik_trace;
    std::vector<std::vector<std::size_t>> size_trace;
    std::vector<double> temp_trace;
    // Assignment at every iteration: the sampled one for BEEM, the argmax for
    // EM-family fits. Empty when not recorded.
    std::vector<Labels> label_trace;
    int em_steps = 0;
    bool converged = false;
    int best_iteration = 0;
    // Mixing weights; uniform in mode I.
    Vector weights;
    // Posterior membership (temperature 1) under the reported parameters, N x K.
    Matrix responsibilities;
};

// Softmax of (loglik_row + log_weights) / tau, evaluated with the row max
// subtracted. Pass an empty log_weights for uniform mixing weights.
void modified_responsibility(std::span<const double> loglik_row, std::span<const double> log_weights, double tau,
                             std::span<double> out);
std::vector<double> modified_responsibility(std::span<const double> loglik_row, std::span<const double> log_weights,
                                            double tau);

// Categorical draw; returns k with probability probs[k].
std::size_t sample_assignment(std::span<const double> probs, Rng& rng);

// Temperature at iteration t (1-based): tau0 * alpha^(t-1).
double cool(double tau0, int t, double alpha);

// Shuffle then deal round-robin: a disjoint cover of 0..n-1 with k nonempty parts.
std::vector<std::vector<std::size_t>> random_partition(std::size_t n, std::size_t k, Rng& rng);

// sum_n max_k values(n, k)
double complete_data_loglik(const Matrix& values);

template <class Obs, class Model>
    requires BaseModel<Model, Obs>
void fill_values(std::span<const Obs> data, std::span<const Model> models, Matrix& values) {
    values.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(models.size()));
    for (std::size_t k = 0; k < models.size(); ++k) {
        double* col = values.col(static_cast<Eigen::Index>(k)).data();
        if constexpr (BatchScoring<Model, Obs>) {
            models[k].log_likelihood_batch(data, std::span<double>(col, data.size()));
        } else {
            for (std::size_t n = 0; n < data.size(); ++n) col[n] = models[k].log_likelihood(data[n]);
        }
    }
}

template <class Obs, class Model>
    requires BaseModel<Model, Obs>
double complete_data_loglik(std::span<const Obs> data, std::span<const Model> models) {
    Matrix values;
    fill_values(data, models, values);
    return complete_data_loglik(values);
}

namespace detail {

template <class Model>
double parameter_distance(const std::vector<Model>& a, const std::vector<Model>& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const std::vector<double> pa = a[k].parameters();
        const std::vector<double> pb = b[k].parameters();
        double s = 0.0;
        for (std::size_t i = 0; i < pa.size() && i < pb.size(); ++i) s += (pa[i] - pb[i]) * (pa[i] - pb[i]);
        worst = std::max(worst, std::sqrt(s));
    }
    return worst;
}

Labels argmax_rows(const Matrix& values, std::span<const double> log_weights);
Matrix posterior(const Matrix& values, std::span<const double> log_weights);

}  // namespace detail

// Runs the engine from already-initialised components.
template <class Obs, class Model>
    requires BaseModel<Model, Obs>
FitReport beem_fit_from(std::span<const Obs> data, std::vector<Model> models, const BeemConfig& config) {
    config.validate();
    if (data.empty()) throw std::invalid_argument("beem_fit: empty data");
    if (models.empty()) throw std::invalid_argument("beem_fit: no components");
    if (data.size() < models.size()) throw std::invalid_argument("beem_fit: fewer observations than components");
    if (config.termination == Termination::ParameterChange && !FlatParameters<Model>) {
        throw std::invalid_argument("beem_fit: parameter-change termination needs models exposing parameters()");
    }

    const std::size_t n_obs = data.size();
    const std::size_t k = models.size();
    // Seeded separately from any partition draw done by the caller.
    Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

    std::vector<double> log_weights;
    if (config.weight_mode == WeightMode::Learned) log_weights.assign(k, -std::log(static_cast<double>(k)));

    FitReport report;
    Matrix values;
    fill_values<Obs, Model>(data, models, values);

    std::vector<Model> best_models = models;
    std::vector<double> best_log_weights = log_weights;
    double best = kNegInf;
    int stale = 0;

    std::vector<double> row(k), resp(k);
    AssignmentState state;
    state.labels.assign(n_obs, 0);

    for (int t = 1; t <= config.max_iters; ++t) {
        state.iteration = t;
        state.temperature = cool(config.tau0, t, config.alpha);
        state.subsets.assign(k, {});

        for (std::size_t n = 0; n < n_obs; ++n) {
            for (std::size_t j = 0; j < k; ++j) row[j] = values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j));
            std::size_t z;
            if (config.greedy_assignment) {
                z = 0;
                double top = kNegInf;
                for (std::size_t j = 0; j < k; ++j) {
                    const double v = row[j] + (log_weights.empty() ? 0.0 : log_weights[j]);
                    if (v > top) {
                        top = v;
                        z = j;
                    }
                }
            } else {
                modified_responsibility(row, log_weights, state.temperature, resp);
                z = sample_assignment(resp, rng);
            }
            state.labels[n] = static_cast<int>(z);
            state.subsets[z].push_back(n);
        }

        std::vector<Model> previous;
        if (config.termination == Termination::ParameterChange) previous = models;

        // Components that received nothing keep their parameters.
        for (std::size_t j = 0; j < k; ++j) {
            if (!state.subsets[j].empty()) models[j].fit(Subset<Obs>(data, state.subsets[j]));
        }
        if (config.weight_mode == WeightMode::Learned) {
            for (std::size_t j = 0; j < k; ++j) {
                log_weights[j] = std::log(static_cast<double>(state.subsets[j].size()) / static_cast<double>(n_obs));
            }
        }

        fill_values<Obs, Model>(data, models, values);
        const double score = complete_data_loglik(values);

        report.loglik_trace.push_back(score);
        report.temp_trace.push_back(state.temperature);
        std::vector<std::size_t> sizes(k);
        for (std::size_t j = 0; j < k; ++j) sizes[j] = state.subsets[j].size();
        report.size_trace.push_back(std::move(sizes));
        report.label_trace.push_back(state.labels);
        report.em_steps = t;

        if (score > best) {
            best = score;
            best_models = models;
            best_log_weights = log_weights;
            report.best_iteration = t;
            stale = 0;
        } else {
            ++stale;
        }

        if (config.termination == Termination::LikelihoodPatience && stale >= config.patience) {
            report.converged = true;
            break;
        }
        if constexpr (FlatParameters<Model>) {
            if (config.termination == Termination::ParameterChange &&
                detail::parameter_distance(previous, models) <= config.epsilon) {
                report.converged = true;
                break;
            }
        }
    }

    fill_values<Obs, Model>(data, best_models, values);
    report.labels = detail::argmax_rows(values, best_log_weights);
    report.responsibilities = detail::posterior(values, best_log_weights);
    report.weights = Vector::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k));
    if (!best_log_weights.empty()) {
        for (std::size_t j = 0; j < k; ++j) report.weights[static_cast<Eigen::Index>(j)] = std::exp(best_log_weights[j]);
    }
    return report;
}

// Full procedure: random nonempty partition, one fit per part, then the
// exploration loop. `factory(j)` returns an unfitted component.
template <class Obs, class Model>
    requires BaseModel<Model, Obs>
FitReport beem_fit(std::span<const Obs> data, std::size_t k, const std::function<Model(std::size_t)>& factory,
                   const BeemConfig& config) {
    config.validate();
    if (data.empty()) throw std::invalid_argument("beem_fit: empty data");
    if (k == 0) throw std::invalid_argument("beem_fit: k must be positive");
    Rng rng(config.seed);
    const auto parts = random_partition(data.size(), k, rng);
    std::vector<Model> models;
    models.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        models.push_back(factory(j));
        models.back().fit(Subset<Obs>(data, parts[j]));
    }
    return beem_fit_from<Obs, Model>(data, std::move(models), config);
}

}  // namespace beem
