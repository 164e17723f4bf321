#include "beem/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace beem {
namespace {

double comb2(long long x) { return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); }

double entropy(const std::vector<long long>& totals, long long n) {
    double h = 0.0;
    for (long long t : totals) {
        if (t > 0) {
            const double p = static_cast<double>(t) / static_cast<double>(n);
            h -= p * std::log(p);
        }
    }
    return h;
}

double mutual_information(const Contingency& c) {
    double mi = 0.0;
    const auto n = static_cast<double>(c.n);
    for (Eigen::Index i = 0; i < c.table.rows(); ++i) {
        for (Eigen::Index j = 0; j < c.table.cols(); ++j) {
            const long long nij = c.table(i, j);
            if (nij == 0) continue;
            const double a = static_cast<double>(c.class_totals[static_cast<std::size_t>(i)]);
            const double b = static_cast<double>(c.cluster_totals[static_cast<std::size_t>(j)]);
            mi += static_cast<double>(nij) / n * std::log(n * static_cast<double>(nij) / (a * b));
        }
    }
    return std::max(mi, 0.0);
}

// H(C | K)
double conditional_class_entropy(const Contingency& c) {
    double h = 0.0;
    const auto n = static_cast<double>(c.n);
    for (Eigen::Index i = 0; i < c.table.rows(); ++i) {
        for (Eigen::Index j = 0; j < c.table.cols(); ++j) {
            const long long nij = c.table(i, j);
            if (nij == 0) continue;
            const double b = static_cast<double>(c.cluster_totals[static_cast<std::size_t>(j)]);
            h -= static_cast<double>(nij) / n * std::log(static_cast<double>(nij) / b);
        }
    }
    return std::max(h, 0.0);
}

}  // namespace

Contingency contingency(std::span<const int> true_labels, std::span<const int> pred_labels) {
    if (true_labels.size() != pred_labels.size()) throw std::invalid_argument("contingency: length mismatch");
    if (true_labels.empty()) throw std::invalid_argument("contingency: empty labelings");
    std::map<int, int> classes, clusters;
    for (int t : true_labels) classes.emplace(t, 0);
    for (int p : pred_labels) clusters.emplace(p, 0);
    int idx = 0;
    for (auto& [label, i] : classes) i = idx++;
    idx = 0;
    for (auto& [label, i] : clusters) i = idx++;

    Contingency c;
    c.table = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Zero(static_cast<Eigen::Index>(classes.size()),
                                                                              static_cast<Eigen::Index>(clusters.size()));
    for (std::size_t n = 0; n < true_labels.size(); ++n) ++c.table(classes[true_labels[n]], clusters[pred_labels[n]]);
    c.n = static_cast<long long>(true_labels.size());
    c.class_totals.resize(classes.size());
    c.cluster_totals.resize(clusters.size());
    for (Eigen::Index i = 0; i < c.table.rows(); ++i) c.class_totals[static_cast<std::size_t>(i)] = c.table.row(i).sum();
    for (Eigen::Index j = 0; j < c.table.cols(); ++j) c.cluster_totals[static_cast<std::size_t>(j)] = c.table.col(j).sum();
    return c;
}

std::vector<int> max_weight_matching(const Matrix& weights) {
    // Hungarian algorithm (potentials form) minimising cost = max - weight on
    // a square matrix padded with zero-weight entries.
    const Eigen::Index rows = weights.rows();
    const Eigen::Index cols = weights.cols();
    const Eigen::Index m = std::max(rows, cols);
    if (m == 0) return {};
    const double top = weights.size() > 0 ? weights.maxCoeff() : 0.0;
    Matrix cost = Matrix::Constant(m, m, top);
    cost.topLeftCorner(rows, cols) = (top - weights.array()).matrix();

    const double inf = std::numeric_limits<double>::infinity();
    const auto mm = static_cast<std::size_t>(m);
    std::vector<double> u(mm + 1, 0.0), v(mm + 1, 0.0);
    std::vector<std::size_t> p(mm + 1, 0), way(mm + 1, 0);
    for (std::size_t i = 1; i <= mm; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(mm + 1, inf);
        std::vector<bool> used(mm + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= mm; ++j) {
                if (used[j]) continue;
                const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= mm; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> assignment(static_cast<std::size_t>(rows), -1);
    for (std::size_t j = 1; j <= mm; ++j) {
        const std::size_t i = p[j];
        if (i >= 1 && static_cast<Eigen::Index>(i) <= rows && static_cast<Eigen::Index>(j) <= cols) {
            assignment[i - 1] = static_cast<int>(j - 1);
        }
    }
    return assignment;
}

double purity_acc(const Contingency& c) {
    const Matrix w = c.table.cast<double>();
    const std::vector<int> match = max_weight_matching(w);
    long long matched = 0;
    for (std::size_t i = 0; i < match.size(); ++i) {
        if (match[i] >= 0) matched += c.table(static_cast<Eigen::Index>(i), match[i]);
    }
    return static_cast<double>(matched) / static_cast<double>(c.n);
}

double ari(const Contingency& c) {
    if (c.n < 2) throw std::invalid_argument("ari: need at least two observations");
    double index = 0.0;
    for (Eigen::Index i = 0; i < c.table.rows(); ++i) {
        for (Eigen::Index j = 0; j < c.table.cols(); ++j) index += comb2(c.table(i, j));
    }
    double a = 0.0, b = 0.0;
    for (long long t : c.class_totals) a += comb2(t);
    for (long long t : c.cluster_totals) b += comb2(t);
    const double expected = a * b / comb2(c.n);
    const double max_index = 0.5 * (a + b);
    const double denom = max_index - expected;
    if (denom == 0.0) return 1.0;
    return (index - expected) / denom;
}

double nmi(const Contingency& c) {
    const double hc = entropy(c.class_totals, c.n);
    const double hk = entropy(c.cluster_totals, c.n);
    if (hc == 0.0 && hk == 0.0) return 1.0;
    if (hc == 0.0 || hk == 0.0) return 0.0;
    return std::clamp(mutual_information(c) / std::sqrt(hc * hk), 0.0, 1.0);
}

double homogeneity(const Contingency& c) {
    const double hc = entropy(c.class_totals, c.n);
    if (hc == 0.0) return 1.0;
    return std::clamp(1.0 - conditional_class_entropy(c) / hc, 0.0, 1.0);
}

RocCurve roc_auroc(std::span<const double> scores, std::span<const int> binary_labels) {
    if (scores.size() != binary_labels.size()) throw std::invalid_argument("roc_auroc: length mismatch");
    long long pos = 0, neg = 0;
    for (int y : binary_labels) (y != 0 ? pos : neg)++;
    if (pos == 0 || neg == 0) throw std::invalid_argument("roc_auroc: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve roc;
    roc.false_positive_rate.push_back(0.0);
    roc.true_positive_rate.push_back(0.0);
    long long tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (binary_labels[order[i]] != 0 ? tp : fp)++;
            ++i;
        }
        const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
        const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
        roc.auroc += 0.5 * (fpr - roc.false_positive_rate.back()) * (tpr + roc.true_positive_rate.back());
        roc.false_positive_rate.push_back(fpr);
        roc.true_positive_rate.push_back(tpr);
    }
    return roc;
}

}  // namespace beem
