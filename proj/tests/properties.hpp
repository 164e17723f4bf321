#pragma once

// Independent oracles and randomized property sweeps shared by the unit
// tests and the acceptance binary. Each sweep returns its violation count.

#include "beem/baselines/em.hpp"
#include "beem/core/beem.hpp"
#include "beem/metrics.hpp"
#include "beem/models/gp.hpp"
#include "beem/models/hmm.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <vector>

namespace props {

using namespace beem;

inline bool rel_close(double a, double b, double rel) {
    if (a == b) return true;
    return std::abs(a - b) <= rel * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

// ---------------------------------------------------------------- HMM oracles

inline double normal_pdf_diag(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& mean, const Eigen::RowVectorXd& var) {
    double p = 1.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double z = x[j] - mean[j];
        p *= std::exp(-0.5 * z * z / var[j]) / std::sqrt(2.0 * M_PI * var[j]);
    }
    return p;
}

// Sum over every state path of path probability times emission product.
inline double forward_by_paths(const Sequence& seq, const HmmComponent& h) {
    const Eigen::Index s = h.states();
    const Eigen::Index len = seq.rows();
    std::vector<Eigen::Index> path(static_cast<std::size_t>(len), 0);
    double total = 0.0;
    while (true) {
        double p = h.initial[path[0]] * normal_pdf_diag(seq.row(0), h.means.row(path[0]), h.variances.row(path[0]));
        for (Eigen::Index t = 1; t < len; ++t) {
            const Eigen::Index a = path[static_cast<std::size_t>(t - 1)], b = path[static_cast<std::size_t>(t)];
            p *= h.transition(a, b) * normal_pdf_diag(seq.row(t), h.means.row(b), h.variances.row(b));
        }
        total += p;
        std::size_t i = 0;
        while (i < path.size() && ++path[i] == s) path[i++] = 0;
        if (i == path.size()) break;
    }
    return std::log(total);
}

inline HmmComponent random_component(Rng& rng, Eigen::Index states, Eigen::Index dims) {
    Matrix means(states, dims), vars(states, dims);
    for (Eigen::Index i = 0; i < states; ++i) {
        for (Eigen::Index j = 0; j < dims; ++j) {
            means(i, j) = rng.normal(0.0, 1.5);
            vars(i, j) = 0.2 + rng.uniform();
        }
    }
    return random_hmm(means, vars, rng);
}

inline Sequence random_sequence(Rng& rng, Eigen::Index len, Eigen::Index dims) {
    Sequence s(len, dims);
    for (Eigen::Index t = 0; t < len; ++t)
        for (Eigen::Index j = 0; j < dims; ++j) s(t, j) = rng.normal(0.0, 1.5);
    return s;
}

inline int forward_oracle_sweep(int cases, std::uint64_t seed) {
    Rng rng(seed);
    int bad = 0;
    for (int c = 0; c < cases; ++c) {
        const Eigen::Index s = rng.uniform_int(1, 3), len = rng.uniform_int(1, 4), d = rng.uniform_int(1, 2);
        const HmmComponent h = random_component(rng, s, d);
        const Sequence seq = random_sequence(rng, len, d);
        bad += !rel_close(hmm_forward_loglik(seq, h), forward_by_paths(seq, h), 1e-8);
    }
    return bad;
}

// Mixture likelihood log sum_k w_k p(seq | hmm_k) against the single
// block-diagonal HMM.
inline int block_equivalence_sweep(int cases, std::uint64_t seed) {
    Rng rng(seed);
    int bad = 0;
    for (int c = 0; c < cases; ++c) {
        const std::size_t k = static_cast<std::size_t>(rng.uniform_int(1, 3));
        const Eigen::Index d = rng.uniform_int(1, 2);
        std::vector<HmmComponent> hmms;
        for (std::size_t j = 0; j < k; ++j) hmms.push_back(random_component(rng, rng.uniform_int(1, 3), d));
        const Vector w = dirichlet_uniform(rng, static_cast<Eigen::Index>(k));
        const std::vector<double> weights(w.data(), w.data() + w.size());
        const HmmComponent block = mhmm_block_hmm(hmms, weights);
        const Sequence seq = random_sequence(rng, rng.uniform_int(1, 12), d);
        std::vector<double> terms;
        for (std::size_t j = 0; j < k; ++j) terms.push_back(std::log(weights[j]) + hmm_forward_loglik(seq, hmms[j]));
        bad += !rel_close(hmm_forward_loglik(seq, block), log_sum_exp(terms), 1e-8);
    }
    return bad;
}

inline bool non_decreasing(const std::vector<double>& v, double slack) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] < v[i - 1] - slack * std::max(1.0, std::abs(v[i - 1]))) return false;
    }
    return true;
}

inline int baum_welch_monotonicity_sweep(int cases, std::uint64_t seed) {
    Rng rng(seed);
    int bad = 0;
    for (int c = 0; c < cases; ++c) {
        const Eigen::Index s = rng.uniform_int(2, 4), d = rng.uniform_int(1, 2);
        const HmmComponent truth = random_component(rng, s, d);
        std::vector<Sequence> seqs;
        const int n = static_cast<int>(rng.uniform_int(3, 10));
        for (int i = 0; i < n; ++i) seqs.push_back(sample_hmm(truth, rng.uniform_int(10, 40), rng));
        const HmmComponent init = hmm_initial_guess(seqs, s, rng);
        const BaumWelchResult fit = baum_welch_fit(seqs, init, 30, 0.0);
        bad += !non_decreasing(fit.loglik_trace, 1e-8);
    }
    return bad;
}

// ---------------------------------------------------------------- GMM EM

inline int em_monotonicity_sweep(int cases, std::uint64_t seed) {
    Rng rng(seed);
    int bad = 0;
    for (int c = 0; c < cases; ++c) {
        const std::size_t k = static_cast<std::size_t>(rng.uniform_int(2, 4));
        const Eigen::Index d = rng.uniform_int(1, 3);
        std::vector<Vector> centers;
        for (std::size_t j = 0; j < k; ++j) centers.push_back(Vector::NullaryExpr(d, [&] { return rng.normal(0.0, 4.0); }));
        std::vector<Vector> pts;
        const int n = static_cast<int>(rng.uniform_int(30, 120));
        for (int i = 0; i < n; ++i) {
            const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(k) - 1));
            pts.push_back(centers[j] + Vector::NullaryExpr(d, [&] { return rng.normal(); }));
        }
        EmConfig cfg;
        cfg.seed = rng.next();
        cfg.tol = 1e-10;
        const GmmFit fit = em_fit_gmm(pts, k, cfg);
        bad += !non_decreasing(fit.report.loglik_trace, 1e-8);
    }
    return bad;
}

// ---------------------------------------------------------------- GP oracles

inline Matrix dense_cov(const GpComponent& c) {
    const auto n = static_cast<Eigen::Index>(c.inputs.size());
    Matrix k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            k(i, j) = kernel_eval(c.kernel, c.inputs[static_cast<std::size_t>(i)], c.inputs[static_cast<std::size_t>(j)]);
    return k;
}

inline double dense_lml(const GpComponent& c) {
    Matrix k = dense_cov(c);
    k.diagonal().array() += c.noise_variance;
    const Eigen::FullPivLU<Matrix> lu(k);
    const Vector y = Eigen::Map<const Vector>(c.targets.data(), static_cast<Eigen::Index>(c.targets.size()));
    const double n = static_cast<double>(c.inputs.size());
    return -0.5 * y.dot(lu.inverse() * y) - 0.5 * std::log(lu.determinant()) - 0.5 * n * std::log(2.0 * M_PI);
}

inline double dense_predictive(const GpComponent& c, double x, double y) {
    const auto n = static_cast<Eigen::Index>(c.inputs.size());
    double mean = 0.0, var = kernel_eval(c.kernel, x, x);
    if (n > 0) {
        Matrix k = dense_cov(c);
        k.diagonal().array() += c.noise_variance;
        const Matrix inv = Eigen::FullPivLU<Matrix>(k).inverse();
        Vector ks(n);
        for (Eigen::Index i = 0; i < n; ++i) ks[i] = kernel_eval(c.kernel, x, c.inputs[static_cast<std::size_t>(i)]);
        const Vector yv = Eigen::Map<const Vector>(c.targets.data(), n);
        mean = ks.dot(inv * yv);
        var -= ks.dot(inv * ks);
    }
    var += c.noise_variance;
    return -0.5 * (std::log(2.0 * M_PI * var) + (y - mean) * (y - mean) / var);
}

// Point i removed, then the plain predictive.
inline double dense_loo(const GpComponent& c, std::size_t i) {
    GpComponent rest = c;
    rest.inputs.erase(rest.inputs.begin() + static_cast<std::ptrdiff_t>(i));
    rest.targets.erase(rest.targets.begin() + static_cast<std::ptrdiff_t>(i));
    return dense_predictive(rest, c.inputs[i], c.targets[i]);
}

inline GpComponent random_gp(Rng& rng, std::size_t n) {
    GpComponent c;
    c.kernel.family = rng.uniform() < 0.5 ? KernelFamily::Rbf : KernelFamily::Periodic;
    c.kernel.output_variance = 0.2 + 2.0 * rng.uniform();
    c.kernel.lengthscale = 0.2 + 2.0 * rng.uniform();
    c.kernel.period = 0.5 + rng.uniform();
    c.noise_variance = 0.01 + 0.3 * rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
        c.inputs.push_back(rng.uniform() * 3.0);
        c.targets.push_back(rng.normal());
    }
    return c;
}

inline int gp_oracle_sweep(int cases, std::uint64_t seed) {
    Rng rng(seed);
    int bad = 0;
    for (int t = 0; t < cases; ++t) {
        const GpComponent c = random_gp(rng, static_cast<std::size_t>(rng.uniform_int(1, 5)));
        const GpPosterior post(c, true);
        bad += !rel_close(post.log_marginal_likelihood(), dense_lml(c), 1e-8);
        const double x = rng.uniform() * 3.0, y = rng.normal();
        bad += !rel_close(post.log_predictive(x, y), dense_predictive(c, x, y), 1e-8);
        if (c.inputs.size() >= 2) {
            const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(c.inputs.size()) - 1));
            bad += !rel_close(post.loo_log_predictive(i), dense_loo(c, i), 1e-8);
        }
    }
    return bad;
}

// ---------------------------------------------------------------- metrics

// Direct definitions on the label vectors themselves.
inline double pairs_ari(const Labels& a, const Labels& b) {
    const std::size_t n = a.size();
    double both = 0, same_a = 0, same_b = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool sa = a[i] == a[j], sb = b[i] == b[j];
            both += sa && sb;
            same_a += sa;
            same_b += sb;
        }
    }
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    const double expected = same_a * same_b / pairs;
    const double max_index = 0.5 * (same_a + same_b);
    if (max_index == expected) return 1.0;
    return (both - expected) / (max_index - expected);
}

inline double entropy_of(const std::map<int, double>& counts, double n) {
    double h = 0.0;
    for (const auto& [k, c] : counts) {
        if (c > 0) h -= c / n * std::log(c / n);
    }
    return h;
}

inline double direct_nmi(const Labels& a, const Labels& b) {
    const double n = static_cast<double>(a.size());
    std::map<int, double> ca, cb;
    std::map<std::pair<int, int>, double> joint;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca[a[i]] += 1;
        cb[b[i]] += 1;
        joint[{a[i], b[i]}] += 1;
    }
    double mi = 0.0;
    for (const auto& [key, c] : joint) mi += c / n * std::log((c / n) / ((ca[key.first] / n) * (cb[key.second] / n)));
    const double ha = entropy_of(ca, n), hb = entropy_of(cb, n);
    if (ha == 0.0 && hb == 0.0) return 1.0;
    if (ha == 0.0 || hb == 0.0) return 0.0;
    return mi / std::sqrt(ha * hb);
}

inline double direct_homogeneity(const Labels& truth, const Labels& pred) {
    const double n = static_cast<double>(truth.size());
    std::map<int, double> ct, cp;
    std::map<std::pair<int, int>, double> joint;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ct[truth[i]] += 1;
        cp[pred[i]] += 1;
        joint[{truth[i], pred[i]}] += 1;
    }
    const double hc = entropy_of(ct, n);
    if (hc == 0.0) return 1.0;
    double cond = 0.0;  // H(C | K)
    for (const auto& [key, c] : joint) cond -= c / n * std::log(c / cp[key.second]);
    return 1.0 - cond / hc;
}

// Best over every one-to-one map from classes to clusters (padded).
inline double enumerated_purity(const Labels& truth, const Labels& pred) {
    std::vector<int> classes(truth.begin(), truth.end()), clusters(pred.begin(), pred.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    std::sort(clusters.begin(), clusters.end());
    clusters.erase(std::unique(clusters.begin(), clusters.end()), clusters.end());
    const std::size_t m = std::max(classes.size(), clusters.size());
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    long long best = 0;
    do {
        long long hit = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const auto ci = static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), truth[i]) - classes.begin());
            const auto ki = static_cast<std::size_t>(std::lower_bound(clusters.begin(), clusters.end(), pred[i]) - clusters.begin());
            hit += perm[ci] == static_cast<int>(ki);
        }
        best = std::max(best, hit);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(truth.size());
}

inline int metric_oracle_sweep(int cases, std::uint64_t seed) {
    Rng rng(seed);
    int bad = 0;
    for (int t = 0; t < cases; ++t) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 40));
        const int c = static_cast<int>(rng.uniform_int(1, 4)), k = static_cast<int>(rng.uniform_int(1, 4));
        Labels a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = static_cast<int>(rng.uniform_int(0, c - 1)) * 3 - 1;  // arbitrary label values
            b[i] = static_cast<int>(rng.uniform_int(0, k - 1)) + 7;
        }
        const Contingency ct = contingency(a, b);
        bad += std::abs(ari(ct) - pairs_ari(a, b)) > 1e-10;
        bad += std::abs(nmi(ct) - direct_nmi(a, b)) > 1e-10;
        bad += std::abs(homogeneity(ct) - direct_homogeneity(a, b)) > 1e-10;
        bad += std::abs(purity_acc(ct) - enumerated_purity(a, b)) > 1e-10;
    }
    return bad;
}

inline double pairwise_auroc(const std::vector<double>& s, const std::vector<int>& y) {
    double good = 0.0, total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[i] != 1 || y[j] != 0) continue;
            total += 1.0;
            good += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
    }
    return good / total;
}

inline int auroc_oracle_sweep(int cases, std::uint64_t seed) {
    Rng rng(seed);
    int bad = 0;
    for (int t = 0; t < cases; ++t) {
        const std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 20));
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = std::round(rng.uniform() * 6.0) / 6.0;  // coarse grid forces ties
            y[i] = rng.uniform() < 0.5;
        }
        y[0] = 1;
        y[1] = 0;
        bad += std::abs(roc_auroc(s, y).auroc - pairwise_auroc(s, y)) > 1e-10;
    }
    return bad;
}

// ---------------------------------------------------------------- softmax

inline int responsibility_sweep(int cases, std::uint64_t seed) {
    Rng rng(seed);
    int bad = 0;
    for (int t = 0; t < cases; ++t) {
        const std::size_t k = static_cast<std::size_t>(rng.uniform_int(2, 8));
        std::vector<double> row(k);
        for (double& v : row) v = -50.0 + 100.0 * rng.uniform();
        const double tau = std::exp(-4.6 + 9.2 * rng.uniform());

        const std::vector<double> p = modified_responsibility(row, {}, tau);
        double sum = 0.0;
        for (double v : p) {
            sum += v;
            bad += v < 0.0;
        }
        bad += std::abs(sum - 1.0) > 1e-12;

        std::vector<double> shifted = row;
        const double c = -1e3 + 2e3 * rng.uniform();
        for (double& v : shifted) v += c;
        const std::vector<double> ps = modified_responsibility(shifted, {}, tau);
        for (std::size_t j = 0; j < k; ++j) bad += std::abs(ps[j] - p[j]) > 1e-9;

        // Mode I against mode II with exactly uniform weights.
        const std::vector<double> lw(k, std::log(1.0 / static_cast<double>(k)));
        const std::vector<double> pw = modified_responsibility(row, lw, tau);
        for (std::size_t j = 0; j < k; ++j) bad += std::abs(pw[j] - p[j]) > 1e-12;

        // Cold limit: one-hot at the argmax when entries are distinct.
        std::vector<double> sorted = row;
        std::sort(sorted.begin(), sorted.end());
        bool distinct = true;
        for (std::size_t j = 1; j < k; ++j) distinct = distinct && sorted[j] - sorted[j - 1] > 1e-3;
        if (distinct) {
            const std::size_t arg = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
            const std::vector<double> cold = modified_responsibility(row, {}, 1e-6);
            for (std::size_t j = 0; j < k; ++j) bad += std::abs(cold[j] - (j == arg ? 1.0 : 0.0)) > 1e-12;
        }

        // Hot limit: uniform.
        const std::vector<double> hot = modified_responsibility(row, {}, 1e6);
        for (double v : hot) bad += std::abs(v - 1.0 / static_cast<double>(k)) > 1e-3;
    }
    return bad;
}

}  // namespace props
