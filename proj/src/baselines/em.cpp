#include "beem/baselines/em.hpp"

#include "beem/baselines/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace beem {
namespace {

Matrix apply_floor(Matrix cov, double floor) {
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < floor) cov.diagonal().array() += floor;
    return cov;
}

Labels argmax_labels(const Matrix& resp) {
    Labels labels(static_cast<std::size_t>(resp.rows()));
    for (Eigen::Index n = 0; n < resp.rows(); ++n) {
        Eigen::Index k;
        resp.row(n).maxCoeff(&k);
        labels[static_cast<std::size_t>(n)] = static_cast<int>(k);
    }
    return labels;
}

std::vector<std::size_t> label_sizes(const Labels& labels, std::size_t k) {
    std::vector<std::size_t> sizes(k, 0);
    for (int z : labels) ++sizes[static_cast<std::size_t>(z)];
    return sizes;
}

void m_step(const Matrix& packed, const Matrix& resp, double floor, GmmParams& params) {
    const auto n = static_cast<double>(packed.rows());
    std::vector<double> w(static_cast<std::size_t>(packed.rows()));
    for (std::size_t k = 0; k < params.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        const double mass = resp.col(kk).sum();
        params.weights[kk] = mass / n;
        // A component with no mass keeps its parameters.
        if (mass < 1e-12) continue;
        for (Eigen::Index i = 0; i < packed.rows(); ++i) w[static_cast<std::size_t>(i)] = resp(i, kk);
        GaussianComponent c = gaussian_weighted_fit(packed, w, 0.0);
        c.covariance = apply_floor(std::move(c.covariance), floor);
        params.components[k] = std::move(c);
    }
}

double complete_loglik(const Matrix& packed, const GmmParams& params) {
    Matrix logp(packed.rows(), static_cast<Eigen::Index>(params.size()));
    std::vector<double> col(static_cast<std::size_t>(packed.rows()));
    for (std::size_t k = 0; k < params.size(); ++k) {
        gaussian_logpdf_batch(packed, params.components[k], col);
        const double lw = std::log(params.weights[static_cast<Eigen::Index>(k)]);
        for (Eigen::Index i = 0; i < packed.rows(); ++i) logp(i, static_cast<Eigen::Index>(k)) = col[static_cast<std::size_t>(i)] + lw;
    }
    return complete_data_loglik(logp);
}

// Runs EM at fixed beta; appends to report. Returns the number of iterations.
int em_loop(const Matrix& packed, GmmParams& params, double beta, int max_iters, double tol, bool stop_on_tol,
            double floor, FitReport& report, Matrix& resp, double& loglik) {
    int iters = 0;
    for (int it = 0; it < max_iters; ++it) {
        const double ll = gmm_e_step(packed, params, beta, resp);
        const bool have_prev = !report.loglik_trace.empty() && iters > 0;
        const double prev = have_prev ? report.loglik_trace.back() : kNegInf;
        report.loglik_trace.push_back(ll);
        report.temp_trace.push_back(1.0 / beta);
        const Labels labels = argmax_labels(resp);
        report.size_trace.push_back(label_sizes(labels, params.size()));
        report.label_trace.push_back(labels);
        ++iters;
        loglik = ll;
        if (stop_on_tol && have_prev && ll - prev < tol) {
            report.converged = true;
            break;
        }
        m_step(packed, resp, floor, params);
    }
    return iters;
}

GmmFit finish(const Matrix& packed, GmmParams params, FitReport report) {
    GmmFit fit;
    Matrix resp;
    fit.loglik = gmm_e_step(packed, params, 1.0, resp);
    report.labels = argmax_labels(resp);
    report.responsibilities = resp;
    report.weights = params.weights;
    fit.complete_loglik = complete_loglik(packed, params);
    fit.params = std::move(params);
    fit.report = std::move(report);
    return fit;
}

GmmParams initial_params(std::span<const Vector> data, std::size_t k, const EmConfig& config, const GmmParams* provided) {
    switch (config.init) {
        case EmInit::RandomObservations: {
            Rng rng(config.seed);
            return init_random_observations(data, k, rng);
        }
        case EmInit::KMeans:
            return init_kmeans(data, k, config.seed);
        case EmInit::Provided:
            if (provided == nullptr || provided->size() != k) throw std::invalid_argument("EM: provided init missing or wrong size");
            return *provided;
    }
    throw std::invalid_argument("EM: unknown init");
}

void check_inputs(std::span<const Vector> data, std::size_t k) {
    if (data.empty()) throw std::invalid_argument("EM: empty data");
    if (k == 0 || data.size() < k) throw std::invalid_argument("EM: need 1 <= k <= N");
}

}  // namespace

void EmConfig::validate() const {
    if (max_iters < 1) throw std::invalid_argument("EmConfig: max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("EmConfig: tol must be positive");
}

void DaemConfig::validate() const {
    if (beta_schedule.empty()) throw std::invalid_argument("DaemConfig: empty schedule");
    if (inner_iters < 1) throw std::invalid_argument("DaemConfig: inner_iters must be >= 1");
    for (std::size_t i = 0; i < beta_schedule.size(); ++i) {
        if (!(beta_schedule[i] > 0.0 && beta_schedule[i] <= 1.0)) throw std::invalid_argument("DaemConfig: beta outside (0, 1]");
        if (i > 0 && !(beta_schedule[i] > beta_schedule[i - 1])) throw std::invalid_argument("DaemConfig: schedule not increasing");
    }
    if (beta_schedule.back() != 1.0) throw std::invalid_argument("DaemConfig: schedule must end at 1");
}

GmmParams init_random_observations(std::span<const Vector> data, std::size_t k, Rng& rng) {
    check_inputs(data, k);
    const Matrix packed = pack_points(data);
    const Vector var = ((packed.rowwise() - packed.colwise().mean()).array().square().colwise().sum() /
                        static_cast<double>(packed.rows()))
                           .transpose()
                           .array()
                           .max(kCovarianceFloor);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order.begin(), order.end());
    GmmParams p;
    p.weights = Vector::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k));
    for (std::size_t j = 0; j < k; ++j) p.components.push_back({data[order[j]], var.asDiagonal().toDenseMatrix()});
    return p;
}

GmmParams init_kmeans(std::span<const Vector> data, std::size_t k, std::uint64_t seed) {
    check_inputs(data, k);
    const KMeansResult km = kmeans_restarts(data, k, KMeansInit::PlusPlus, 300, kKMeansRestarts, seed);
    const Matrix packed = pack_points(data);
    GmmParams p;
    p.weights.resize(static_cast<Eigen::Index>(k));
    std::vector<double> w(data.size());
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t count = 0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            w[i] = km.labels[i] == static_cast<int>(j) ? 1.0 : 0.0;
            count += km.labels[i] == static_cast<int>(j);
        }
        p.weights[static_cast<Eigen::Index>(j)] = static_cast<double>(count) / static_cast<double>(data.size());
        GaussianComponent c = gaussian_weighted_fit(packed, w, kCovarianceFloor);
        c.mean = km.centers[j];
        p.components.push_back(std::move(c));
    }
    return p;
}

std::vector<GaussianComponent> beem_init_B(std::span<const Vector> data, std::size_t k, std::uint64_t seed) {
    return init_kmeans(data, k, seed).components;
}

double gmm_e_step(const Matrix& packed, const GmmParams& params, double beta, Matrix& resp) {
    const auto n = packed.rows();
    const auto k = static_cast<Eigen::Index>(params.size());
    resp.resize(n, k);
    std::vector<double> col(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < k; ++j) {
        gaussian_logpdf_batch(packed, params.components[static_cast<std::size_t>(j)], col);
        const double lw = std::log(params.weights[j]);
        for (Eigen::Index i = 0; i < n; ++i) resp(i, j) = col[static_cast<std::size_t>(i)] + lw;
    }
    double total = 0.0;
    std::vector<double> row(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) row[static_cast<std::size_t>(j)] = resp(i, j);
        total += log_sum_exp(row);
        for (Eigen::Index j = 0; j < k; ++j) row[static_cast<std::size_t>(j)] *= beta;
        const double norm = log_sum_exp(row);
        if (norm == kNegInf) throw std::domain_error("degenerate responsibility row");
        for (Eigen::Index j = 0; j < k; ++j) resp(i, j) = std::exp(row[static_cast<std::size_t>(j)] - norm);
    }
    return total;
}

GmmFit em_fit_gmm(std::span<const Vector> data, std::size_t k, const EmConfig& config, const GmmParams* provided) {
    config.validate();
    check_inputs(data, k);
    const Matrix packed = pack_points(data);
    GmmParams params = initial_params(data, k, config, provided);
    FitReport report;
    Matrix resp;
    double ll = 0.0;
    report.em_steps = em_loop(packed, params, 1.0, config.max_iters, config.tol, true, config.covariance_floor, report, resp, ll);
    return finish(packed, std::move(params), std::move(report));
}

GmmFit em_restarts(std::span<const Vector> data, std::size_t k, int restarts, const EmConfig& config) {
    if (restarts < 1) throw std::invalid_argument("em_restarts: restarts must be >= 1");
    GmmFit best;
    bool have = false;
    int total_steps = 0;
    for (int r = 0; r < restarts; ++r) {
        EmConfig c = config;
        c.seed = config.seed + static_cast<std::uint64_t>(r);
        GmmFit fit = em_fit_gmm(data, k, c);
        total_steps += fit.report.em_steps;
        // Ties resolved by the lower restart index for order independence.
        if (!have || fit.complete_loglik > best.complete_loglik) {
            best = std::move(fit);
            have = true;
        }
    }
    best.report.em_steps = total_steps;
    return best;
}

GmmFit daem_fit_gmm(std::span<const Vector> data, std::size_t k, const DaemConfig& daem, const EmConfig& config,
                    const GmmParams* provided) {
    daem.validate();
    config.validate();
    check_inputs(data, k);
    const Matrix packed = pack_points(data);
    GmmParams params = initial_params(data, k, config, provided);
    FitReport report;
    Matrix resp;
    double ll = 0.0;
    int steps = 0;
    for (std::size_t b = 0; b + 1 < daem.beta_schedule.size(); ++b) {
        FitReport phase;
        steps += em_loop(packed, params, daem.beta_schedule[b], daem.inner_iters, config.tol, false, config.covariance_floor,
                         phase, resp, ll);
        report.loglik_trace.insert(report.loglik_trace.end(), phase.loglik_trace.begin(), phase.loglik_trace.end());
        report.temp_trace.insert(report.temp_trace.end(), phase.temp_trace.begin(), phase.temp_trace.end());
        report.size_trace.insert(report.size_trace.end(), phase.size_trace.begin(), phase.size_trace.end());
        report.label_trace.insert(report.label_trace.end(), phase.label_trace.begin(), phase.label_trace.end());
    }
    FitReport last;
    steps += em_loop(packed, params, 1.0, config.max_iters, config.tol, true, config.covariance_floor, last, resp, ll);
    report.loglik_trace.insert(report.loglik_trace.end(), last.loglik_trace.begin(), last.loglik_trace.end());
    report.temp_trace.insert(report.temp_trace.end(), last.temp_trace.begin(), last.temp_trace.end());
    report.size_trace.insert(report.size_trace.end(), last.size_trace.begin(), last.size_trace.end());
    report.label_trace.insert(report.label_trace.end(), last.label_trace.begin(), last.label_trace.end());
    report.converged = last.converged;
    report.em_steps = steps;
    return finish(packed, std::move(params), std::move(report));
}

}  // namespace beem
