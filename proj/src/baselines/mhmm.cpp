#include "beem/baselines/mhmm.hpp"

#include "beem/baselines/kmeans.hpp"
#include "beem/log.hpp"
#include "beem/models/gaussian.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace beem {

std::vector<HmmComponent> mhmm_init_random(std::span<const Sequence> seqs, std::size_t k, Eigen::Index states, Rng& rng) {
    if (seqs.empty()) throw std::invalid_argument("mhmm_init_random: no sequences");
    std::vector<const Sequence*> owners;
    std::vector<Eigen::Index> rows;
    for (const auto& s : seqs) {
        for (Eigen::Index t = 0; t < s.rows(); ++t) {
            owners.push_back(&s);
            rows.push_back(t);
        }
    }
    const Eigen::Index d = seqs.front().cols();
    Vector mean = Vector::Zero(d), sq = Vector::Zero(d);
    for (std::size_t i = 0; i < owners.size(); ++i) {
        const Vector f = owners[i]->row(rows[i]).transpose();
        mean += f;
        sq += f.array().square().matrix();
    }
    mean /= static_cast<double>(owners.size());
    const Vector var = (sq / static_cast<double>(owners.size()) - mean.array().square().matrix()).array().max(kVarianceFloor);

    std::vector<HmmComponent> out;
    for (std::size_t j = 0; j < k; ++j) {
        HmmComponent h;
        h.initial = Vector::Constant(states, 1.0 / static_cast<double>(states));
        h.transition.resize(states, states);
        for (Eigen::Index r = 0; r < states; ++r) h.transition.row(r) = dirichlet_uniform(rng, states).transpose();
        h.means.resize(states, d);
        h.variances.resize(states, d);
        for (Eigen::Index s = 0; s < states; ++s) {
            const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(owners.size()) - 1));
            h.means.row(s) = owners[pick]->row(rows[pick]);
            h.variances.row(s) = var.transpose();
        }
        out.push_back(std::move(h));
    }
    return out;
}

SmythSimilarity smyth_similarity(std::span<const Sequence> seqs, std::size_t k, Eigen::Index states, std::uint64_t seed,
                                 const SmythOptions& options) {
    if (seqs.size() < k || k == 0) throw std::invalid_argument("smyth_init: need 1 <= k <= N sequences");
    SmythSimilarity out;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        if (seqs[i].rows() >= 2) {
            out.usable.push_back(i);
        } else {
            warn("smyth_init: sequence " + std::to_string(i) + " shorter than 2 steps excluded from per-sequence fitting");
        }
    }
    if (out.usable.size() < k) throw std::invalid_argument("smyth_init: fewer usable sequences than clusters");

    Rng rng(seed);
    std::vector<HmmComponent> singles;
    singles.reserve(out.usable.size());
    for (std::size_t i : out.usable) {
        const std::span<const Sequence> one(&seqs[i], 1);
        HmmComponent h = hmm_initial_guess(one, states, rng);
        singles.push_back(baum_welch_fit(one, h, options.per_sequence_iters, 1e-6).model);
    }
    const auto m = static_cast<Eigen::Index>(out.usable.size());
    Matrix l(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) l(i, j) = hmm_forward_loglik(seqs[out.usable[static_cast<std::size_t>(j)]], singles[static_cast<std::size_t>(i)]);
    }
    out.similarity = 0.5 * (l + l.transpose());

    std::vector<Vector> rows_v;
    rows_v.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) rows_v.push_back(out.similarity.row(i).transpose());
    out.groups = kmeans(rows_v, k, KMeansInit::PlusPlus, 300, rng.next()).labels;
    return out;
}

std::vector<HmmComponent> smyth_init(std::span<const Sequence> seqs, std::size_t k, Eigen::Index states, std::uint64_t seed,
                                     const SmythOptions& options) {
    const SmythSimilarity sim = smyth_similarity(seqs, k, states, seed, options);
    Rng rng(seed ^ 0xa5a5a5a5ULL);
    std::vector<HmmComponent> out;
    for (std::size_t g = 0; g < k; ++g) {
        std::vector<Sequence> members;
        for (std::size_t i = 0; i < sim.usable.size(); ++i) {
            if (sim.groups[i] == static_cast<int>(g)) members.push_back(seqs[sim.usable[i]]);
        }
        if (members.empty()) throw std::runtime_error("smyth_init: empty group after clustering");
        HmmComponent h = hmm_initial_guess(members, states, rng);
        out.push_back(baum_welch_fit(members, h, options.group_iters, 1e-6).model);
    }
    return out;
}

MhmmFit em_fit_mhmm(std::span<const Sequence> seqs, std::vector<HmmComponent> init, const MhmmEmConfig& config) {
    if (seqs.empty()) throw std::invalid_argument("em_fit_mhmm: no sequences");
    if (init.empty()) throw std::invalid_argument("em_fit_mhmm: no components");
    const std::size_t n = seqs.size();
    const std::size_t k = init.size();
    MhmmFit fit;
    fit.hmms = std::move(init);
    fit.weights = Vector::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k));

    Matrix logp(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    Matrix resp(logp.rows(), logp.cols());
    std::vector<double> row(k);

    auto e_step = [&]() {
        double total = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                logp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = hmm_forward_loglik(seqs[i], fit.hmms[j]);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                row[j] = logp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) + std::log(fit.weights[static_cast<Eigen::Index>(j)]);
            }
            const double norm = log_sum_exp(row);
            total += norm;
            for (std::size_t j = 0; j < k; ++j) resp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::exp(row[j] - norm);
        }
        return total;
    };

    std::vector<double> w(n);
    for (int it = 0; it < config.max_iters; ++it) {
        const double ll = e_step();
        const bool stop = !fit.report.loglik_trace.empty() && ll - fit.report.loglik_trace.back() < config.tol;
        fit.report.loglik_trace.push_back(ll);
        fit.report.temp_trace.push_back(1.0);
        std::vector<std::size_t> sizes(k, 0);
        Labels labels(n);
        for (Eigen::Index i = 0; i < resp.rows(); ++i) {
            Eigen::Index z;
            resp.row(i).maxCoeff(&z);
            ++sizes[static_cast<std::size_t>(z)];
            labels[static_cast<std::size_t>(i)] = static_cast<int>(z);
        }
        fit.report.size_trace.push_back(std::move(sizes));
        fit.report.label_trace.push_back(std::move(labels));
        fit.report.em_steps = it + 1;
        fit.loglik = ll;
        if (stop) {
            fit.report.converged = true;
            break;
        }
        for (std::size_t j = 0; j < k; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            const double mass = resp.col(jj).sum();
            fit.weights[jj] = mass / static_cast<double>(n);
            if (mass < 1e-12) continue;
            for (std::size_t i = 0; i < n; ++i) w[i] = resp(static_cast<Eigen::Index>(i), jj);
            HmmComponent next;
            hmm_reestimate(seqs, w, fit.hmms[j], next, config.variance_floor);
            fit.hmms[j] = std::move(next);
        }
    }
    if (!fit.report.converged) fit.loglik = e_step();
    fit.report.labels.resize(n);
    for (Eigen::Index i = 0; i < resp.rows(); ++i) {
        Eigen::Index z;
        resp.row(i).maxCoeff(&z);
        fit.report.labels[static_cast<std::size_t>(i)] = static_cast<int>(z);
    }
    fit.report.responsibilities = resp;
    fit.report.weights = fit.weights;
    return fit;
}

}  // namespace beem
