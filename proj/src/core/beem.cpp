#include "beem/core/beem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace beem {

void BeemConfig::validate() const {
    if (!(tau0 > 0.0)) throw std::invalid_argument("BeemConfig: tau0 must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("BeemConfig: alpha must lie in (0, 1)");
    if (patience < 1) throw std::invalid_argument("BeemConfig: patience must be >= 1");
    if (max_iters < 1) throw std::invalid_argument("BeemConfig: max_iters must be >= 1");
    if (epsilon < 0.0) throw std::invalid_argument("BeemConfig: epsilon must be nonnegative");
}

AssignmentState AssignmentState::from_labels(const Labels& labels, std::size_t k) {
    AssignmentState s;
    s.labels = labels;
    s.subsets.assign(k, {});
    for (std::size_t n = 0; n < labels.size(); ++n) {
        if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= k) {
            throw std::invalid_argument("AssignmentState: label out of range");
        }
        s.subsets[static_cast<std::size_t>(labels[n])].push_back(n);
    }
    return s;
}

bool AssignmentState::consistent() const {
    std::vector<int> seen(labels.size(), 0);
    for (std::size_t k = 0; k < subsets.size(); ++k) {
        for (std::size_t n : subsets[k]) {
            if (n >= labels.size() || seen[n]++ != 0) return false;
            if (labels[n] != static_cast<int>(k)) return false;
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

void modified_responsibility(std::span<const double> loglik_row, std::span<const double> log_weights, double tau,
                             std::span<double> out) {
    if (!(tau > 0.0)) throw std::invalid_argument("modified_responsibility: tau must be positive");
    if (!log_weights.empty() && log_weights.size() != loglik_row.size()) {
        throw std::invalid_argument("modified_responsibility: weight/row size mismatch");
    }
    if (out.size() != loglik_row.size()) throw std::invalid_argument("modified_responsibility: output size mismatch");

    double peak = kNegInf;
    for (std::size_t k = 0; k < loglik_row.size(); ++k) {
        out[k] = (loglik_row[k] + (log_weights.empty() ? 0.0 : log_weights[k])) / tau;
        peak = std::max(peak, out[k]);
    }
    if (peak == kNegInf || std::isnan(peak)) throw std::domain_error("degenerate responsibility row");
    double total = 0.0;
    for (double& v : out) {
        v = std::exp(v - peak);
        total += v;
    }
    for (double& v : out) v /= total;
}

std::vector<double> modified_responsibility(std::span<const double> loglik_row, std::span<const double> log_weights,
                                            double tau) {
    std::vector<double> out(loglik_row.size());
    modified_responsibility(loglik_row, log_weights, tau, out);
    return out;
}

std::size_t sample_assignment(std::span<const double> probs, Rng& rng) {
    if (probs.empty()) throw std::invalid_argument("sample_assignment: empty distribution");
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw std::invalid_argument("sample_assignment: negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("sample_assignment: probabilities do not sum to 1");

    const double u = rng.uniform() * total;
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        if (probs[k] > 0.0) last_positive = k;
        cum += probs[k];
        if (u < cum && probs[k] > 0.0) return k;
    }
    // Rounding left u just above the cumulative sum.
    return last_positive;
}

double cool(double tau0, int t, double alpha) {
    if (t < 1) throw std::invalid_argument("cool: t must be >= 1");
    if (!(tau0 > 0.0)) throw std::invalid_argument("cool: tau0 must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("cool: alpha must lie in (0, 1)");
    return tau0 * std::pow(alpha, t - 1);
}

std::vector<std::vector<std::size_t>> random_partition(std::size_t n, std::size_t k, Rng& rng) {
    if (k == 0) throw std::invalid_argument("random_partition: k must be positive");
    if (n < k) throw std::invalid_argument("random_partition: n < k");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order.begin(), order.end());
    std::vector<std::vector<std::size_t>> parts(k);
    for (std::size_t i = 0; i < n; ++i) parts[i % k].push_back(order[i]);
    for (auto& p : parts) std::sort(p.begin(), p.end());
    return parts;
}

double complete_data_loglik(const Matrix& values) {
    double total = 0.0;
    for (Eigen::Index n = 0; n < values.rows(); ++n) total += values.row(n).maxCoeff();
    return total;
}

namespace detail {

Labels argmax_rows(const Matrix& values, std::span<const double> log_weights) {
    Labels labels(static_cast<std::size_t>(values.rows()));
    for (Eigen::Index n = 0; n < values.rows(); ++n) {
        Eigen::Index best = 0;
        double best_v = kNegInf;
        for (Eigen::Index k = 0; k < values.cols(); ++k) {
            const double v = values(n, k) + (log_weights.empty() ? 0.0 : log_weights[static_cast<std::size_t>(k)]);
            if (v > best_v) {
                best_v = v;
                best = k;
            }
        }
        labels[static_cast<std::size_t>(n)] = static_cast<int>(best);
    }
    return labels;
}

Matrix posterior(const Matrix& values, std::span<const double> log_weights) {
    Matrix out(values.rows(), values.cols());
    std::vector<double> row(static_cast<std::size_t>(values.cols()));
    std::vector<double> resp(row.size());
    for (Eigen::Index n = 0; n < values.rows(); ++n) {
        for (Eigen::Index k = 0; k < values.cols(); ++k) row[static_cast<std::size_t>(k)] = values(n, k);
        modified_responsibility(row, log_weights, 1.0, resp);
        for (Eigen::Index k = 0; k < values.cols(); ++k) out(n, k) = resp[static_cast<std::size_t>(k)];
    }
    return out;
}

}  // namespace detail
}  // namespace beem
