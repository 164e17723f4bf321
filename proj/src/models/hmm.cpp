#include "beem/models/hmm.hpp"

#include "beem/baselines/kmeans.hpp"
#include "beem/models/gaussian.hpp"
#include "beem/simd/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace beem {
namespace {

Matrix log_of(const Matrix& m) { return m.array().log().matrix(); }

struct Lattice {
    Matrix log_alpha;  // L x S
    Matrix log_beta;   // L x S
    Matrix emissions;  // L x S
    double loglik = 0.0;
};

Lattice forward_backward(const Sequence& seq, const HmmComponent& hmm, const Matrix& log_a, const Vector& log_pi) {
    const Eigen::Index len = seq.rows();
    const Eigen::Index s_count = hmm.states();
    Lattice lat;
    lat.emissions = emission_log_densities(seq, hmm);
    lat.log_alpha.resize(len, s_count);
    lat.log_beta.resize(len, s_count);
    std::vector<double> terms(static_cast<std::size_t>(s_count));

    for (Eigen::Index s = 0; s < s_count; ++s) lat.log_alpha(0, s) = log_pi[s] + lat.emissions(0, s);
    for (Eigen::Index t = 1; t < len; ++t) {
        for (Eigen::Index s = 0; s < s_count; ++s) {
            for (Eigen::Index r = 0; r < s_count; ++r) terms[static_cast<std::size_t>(r)] = lat.log_alpha(t - 1, r) + log_a(r, s);
            lat.log_alpha(t, s) = lat.emissions(t, s) + log_sum_exp(terms);
        }
    }
    for (Eigen::Index s = 0; s < s_count; ++s) lat.log_beta(len - 1, s) = 0.0;
    for (Eigen::Index t = len - 2; t >= 0; --t) {
        for (Eigen::Index r = 0; r < s_count; ++r) {
            for (Eigen::Index s = 0; s < s_count; ++s) {
                terms[static_cast<std::size_t>(s)] = log_a(r, s) + lat.emissions(t + 1, s) + lat.log_beta(t + 1, s);
            }
            lat.log_beta(t, r) = log_sum_exp(terms);
        }
    }
    for (Eigen::Index s = 0; s < s_count; ++s) terms[static_cast<std::size_t>(s)] = lat.log_alpha(len - 1, s);
    lat.loglik = log_sum_exp(terms);
    return lat;
}

}  // namespace

void HmmComponent::validate() const {
    const Eigen::Index s = states();
    if (s == 0) throw std::invalid_argument("HmmComponent: no states");
    if (transition.rows() != s || transition.cols() != s) throw std::invalid_argument("HmmComponent: transition shape");
    if (means.rows() != s || variances.rows() != s || variances.cols() != means.cols()) {
        throw std::invalid_argument("HmmComponent: emission shape");
    }
    if (std::abs(initial.sum() - 1.0) > 1e-9 || (initial.array() < 0.0).any()) {
        throw std::invalid_argument("HmmComponent: initial distribution not normalised");
    }
    for (Eigen::Index r = 0; r < s; ++r) {
        if (std::abs(transition.row(r).sum() - 1.0) > 1e-9 || (transition.row(r).array() < 0.0).any()) {
            throw std::invalid_argument("HmmComponent: transition row not stochastic");
        }
    }
    if ((variances.array() <= 0.0).any()) throw std::invalid_argument("HmmComponent: nonpositive emission variance");
}

Matrix emission_log_densities(const Sequence& seq, const HmmComponent& hmm) {
    if (seq.cols() != hmm.dims()) throw std::invalid_argument("HMM emission dimension mismatch");
    const Eigen::Index len = seq.rows();
    const Eigen::Index d = seq.cols();
    Matrix out(len, hmm.states());
    const simd::PointsView view{seq.data(), static_cast<std::size_t>(len), static_cast<std::size_t>(d),
                                static_cast<std::size_t>(seq.outerStride())};
    Vector mean(d), inv_var(d);
    for (Eigen::Index s = 0; s < hmm.states(); ++s) {
        double log_det = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            mean[j] = hmm.means(s, j);
            inv_var[j] = 1.0 / hmm.variances(s, j);
            log_det += std::log(hmm.variances(s, j));
        }
        double* col = out.col(s).data();
        simd::kernels().diag_quadratic(view, mean.data(), inv_var.data(), col);
        const double offset = static_cast<double>(d) * kLog2Pi + log_det;
        for (Eigen::Index t = 0; t < len; ++t) col[t] = -0.5 * (offset + col[t]);
    }
    return out;
}

double hmm_forward_loglik(const Sequence& seq, const HmmComponent& hmm) {
    if (seq.rows() < 1) throw std::invalid_argument("hmm_forward_loglik: empty sequence");
    const Matrix em = emission_log_densities(seq, hmm);
    const Matrix log_a = log_of(hmm.transition);
    const Eigen::Index s_count = hmm.states();
    Vector alpha(s_count), next(s_count);
    std::vector<double> terms(static_cast<std::size_t>(s_count));
    for (Eigen::Index s = 0; s < s_count; ++s) alpha[s] = std::log(hmm.initial[s]) + em(0, s);
    for (Eigen::Index t = 1; t < seq.rows(); ++t) {
        for (Eigen::Index s = 0; s < s_count; ++s) {
            for (Eigen::Index r = 0; r < s_count; ++r) terms[static_cast<std::size_t>(r)] = alpha[r] + log_a(r, s);
            next[s] = em(t, s) + log_sum_exp(terms);
        }
        alpha.swap(next);
    }
    return log_sum_exp(std::span<const double>(alpha.data(), static_cast<std::size_t>(s_count)));
}

double hmm_reestimate(std::span<const Sequence> seqs, std::span<const double> weights, const HmmComponent& current,
                      HmmComponent& updated, double variance_floor) {
    if (seqs.empty()) throw std::invalid_argument("hmm_reestimate: no sequences");
    if (!weights.empty() && weights.size() != seqs.size()) throw std::invalid_argument("hmm_reestimate: weight count");
    const Eigen::Index s_count = current.states();
    const Eigen::Index d = current.dims();
    const Matrix log_a = log_of(current.transition);
    const Vector log_pi = current.initial.array().log().matrix();

    Vector init_acc = Vector::Zero(s_count);
    Matrix trans_acc = Matrix::Zero(s_count, s_count);
    Vector occupancy = Vector::Zero(s_count);
    Matrix first_moment = Matrix::Zero(s_count, d);
    std::vector<Matrix> gammas;
    gammas.reserve(seqs.size());
    double total = 0.0;
    double weight_sum = 0.0;

    for (std::size_t n = 0; n < seqs.size(); ++n) {
        const Sequence& seq = seqs[n];
        if (seq.rows() < 1) throw std::invalid_argument("hmm_reestimate: empty sequence");
        if (seq.cols() != d) throw std::invalid_argument("hmm_reestimate: dimension mismatch");
        const double w = weights.empty() ? 1.0 : weights[n];
        const Lattice lat = forward_backward(seq, current, log_a, log_pi);
        total += w * lat.loglik;
        weight_sum += w;
        Matrix gamma = (lat.log_alpha + lat.log_beta).array() - lat.loglik;
        gamma = gamma.array().exp();
        init_acc += w * gamma.row(0).transpose();
        for (Eigen::Index t = 0; t + 1 < seq.rows(); ++t) {
            for (Eigen::Index r = 0; r < s_count; ++r) {
                for (Eigen::Index s = 0; s < s_count; ++s) {
                    const double lx = lat.log_alpha(t, r) + log_a(r, s) + lat.emissions(t + 1, s) +
                                      lat.log_beta(t + 1, s) - lat.loglik;
                    trans_acc(r, s) += w * std::exp(lx);
                }
            }
        }
        gamma *= w;
        occupancy += gamma.colwise().sum().transpose();
        first_moment += gamma.transpose() * seq;
        gammas.push_back(std::move(gamma));
    }

    updated = current;
    if (weight_sum > 0.0 && init_acc.sum() > 0.0) updated.initial = init_acc / init_acc.sum();
    for (Eigen::Index r = 0; r < s_count; ++r) {
        const double row_total = trans_acc.row(r).sum();
        if (row_total > 0.0) updated.transition.row(r) = trans_acc.row(r) / row_total;
    }
    for (Eigen::Index s = 0; s < s_count; ++s) {
        if (occupancy[s] > 0.0) updated.means.row(s) = first_moment.row(s) / occupancy[s];
    }
    Matrix second = Matrix::Zero(s_count, d);
    for (std::size_t n = 0; n < seqs.size(); ++n) {
        for (Eigen::Index s = 0; s < s_count; ++s) {
            const Matrix centered = seqs[n].rowwise() - updated.means.row(s);
            second.row(s) += gammas[n].col(s).transpose() * centered.array().square().matrix();
        }
    }
    for (Eigen::Index s = 0; s < s_count; ++s) {
        if (occupancy[s] > 0.0) {
            updated.variances.row(s) = (second.row(s) / occupancy[s]).array().max(variance_floor).matrix();
        }
    }
    return total;
}

BaumWelchResult baum_welch_fit(std::span<const Sequence> seqs, const HmmComponent& init, int max_iters, double tol,
                               std::span<const double> weights, double variance_floor) {
    if (seqs.empty()) throw std::invalid_argument("baum_welch_fit: no sequences");
    BaumWelchResult result;
    result.model = init;
    HmmComponent next;
    bool stopped = false;
    for (int it = 0; it < max_iters; ++it) {
        const double ll = hmm_reestimate(seqs, weights, result.model, next, variance_floor);
        if (!result.loglik_trace.empty() && ll - result.loglik_trace.back() < tol) {
            result.loglik_trace.push_back(ll);
            stopped = true;
            break;
        }
        result.loglik_trace.push_back(ll);
        result.model = next;
        ++result.iterations;
    }
    if (!stopped) {
        double ll = 0.0;
        for (std::size_t n = 0; n < seqs.size(); ++n) {
            ll += (weights.empty() ? 1.0 : weights[n]) * hmm_forward_loglik(seqs[n], result.model);
        }
        result.loglik_trace.push_back(ll);
    }
    return result;
}

Matrix mhmm_block_transition(std::span<const HmmComponent> hmms) {
    if (hmms.empty()) throw std::invalid_argument("mhmm_block_transition: no components");
    Eigen::Index total = 0;
    for (const auto& h : hmms) total += h.states();
    Matrix block = Matrix::Zero(total, total);
    Eigen::Index offset = 0;
    for (const auto& h : hmms) {
        block.block(offset, offset, h.states(), h.states()) = h.transition;
        offset += h.states();
    }
    return block;
}

HmmComponent mhmm_block_hmm(std::span<const HmmComponent> hmms, std::span<const double> weights) {
    HmmComponent out;
    out.transition = mhmm_block_transition(hmms);
    const Eigen::Index total = out.transition.rows();
    const Eigen::Index d = hmms.front().dims();
    out.initial.resize(total);
    out.means.resize(total, d);
    out.variances.resize(total, d);
    Eigen::Index offset = 0;
    for (std::size_t k = 0; k < hmms.size(); ++k) {
        const auto& h = hmms[k];
        if (h.dims() != d) throw std::invalid_argument("mhmm_block_hmm: dimension mismatch");
        const double w = weights.empty() ? 1.0 / static_cast<double>(hmms.size()) : weights[k];
        out.initial.segment(offset, h.states()) = w * h.initial;
        out.means.middleRows(offset, h.states()) = h.means;
        out.variances.middleRows(offset, h.states()) = h.variances;
        offset += h.states();
    }
    return out;
}

HmmComponent hmm_initial_guess(std::span<const Sequence> seqs, Eigen::Index states, Rng& rng) {
    if (seqs.empty()) throw std::invalid_argument("hmm_initial_guess: no sequences");
    const Eigen::Index d = seqs.front().cols();
    std::vector<Vector> frames;
    for (const auto& s : seqs) {
        for (Eigen::Index t = 0; t < s.rows(); ++t) frames.push_back(s.row(t).transpose());
    }
    HmmComponent hmm;
    hmm.initial = Vector::Constant(states, 1.0 / static_cast<double>(states));
    hmm.transition.resize(states, states);
    for (Eigen::Index r = 0; r < states; ++r) {
        for (Eigen::Index c = 0; c < states; ++c) hmm.transition(r, c) = 1.0 + 0.2 * rng.uniform();
        hmm.transition.row(r) /= hmm.transition.row(r).sum();
    }
    hmm.means.resize(states, d);
    hmm.variances.resize(states, d);

    const Matrix packed = pack_points(frames);
    Vector global_var = ((packed.rowwise() - packed.colwise().mean()).array().square().colwise().sum() /
                         static_cast<double>(std::max<Eigen::Index>(packed.rows(), 1)))
                            .transpose();
    global_var = global_var.array().max(kVarianceFloor);

    if (static_cast<Eigen::Index>(frames.size()) >= states) {
        const KMeansResult km = kmeans(frames, static_cast<std::size_t>(states), KMeansInit::PlusPlus, 100, rng.next());
        for (Eigen::Index s = 0; s < states; ++s) {
            hmm.means.row(s) = km.centers[static_cast<std::size_t>(s)].transpose();
            Vector acc = Vector::Zero(d);
            int count = 0;
            for (std::size_t i = 0; i < frames.size(); ++i) {
                if (km.labels[i] == s) {
                    acc += (frames[i] - km.centers[static_cast<std::size_t>(s)]).array().square().matrix();
                    ++count;
                }
            }
            if (count > 1) {
                hmm.variances.row(s) = (acc / count).array().max(kVarianceFloor).matrix().transpose();
            } else {
                hmm.variances.row(s) = global_var.transpose();
            }
        }
    } else {
        for (Eigen::Index s = 0; s < states; ++s) {
            hmm.means.row(s) = frames[static_cast<std::size_t>(s) % frames.size()].transpose();
            hmm.variances.row(s) = global_var.transpose();
        }
    }
    return hmm;
}

HmmComponent random_hmm(const Matrix& means, const Matrix& variances, Rng& rng) {
    const Eigen::Index s_count = means.rows();
    HmmComponent hmm;
    hmm.initial = dirichlet_uniform(rng, s_count);
    hmm.transition.resize(s_count, s_count);
    for (Eigen::Index r = 0; r < s_count; ++r) hmm.transition.row(r) = dirichlet_uniform(rng, s_count).transpose();
    hmm.means = means;
    hmm.variances = variances;
    return hmm;
}

Sequence sample_hmm(const HmmComponent& hmm, Eigen::Index length, Rng& rng) {
    const Eigen::Index d = hmm.dims();
    Sequence seq(length, d);
    auto draw = [&](const auto& probs) {
        const double u = rng.uniform();
        double cum = 0.0;
        Eigen::Index last = 0;
        for (Eigen::Index s = 0; s < probs.size(); ++s) {
            if (probs[s] > 0.0) last = s;
            cum += probs[s];
            if (u < cum) return s;
        }
        return last;
    };
    Eigen::Index state = draw(hmm.initial);
    for (Eigen::Index t = 0; t < length; ++t) {
        if (t > 0) state = draw(hmm.transition.row(state));
        for (Eigen::Index j = 0; j < d; ++j) {
            seq(t, j) = rng.normal(hmm.means(state, j), std::sqrt(hmm.variances(state, j)));
        }
    }
    return seq;
}

HmmModel::HmmModel(HmmComponent initial, Options options) : options_(options), hmm_(std::move(initial)), fitted_(true) {
    hmm_.validate();
}

double HmmModel::log_likelihood(const Sequence& seq) const {
    if (!fitted_) throw std::logic_error("HmmModel: not fitted");
    return hmm_forward_loglik(seq, hmm_);
}

void HmmModel::fit(const Subset<Sequence>& subset) {
    if (subset.empty()) throw std::invalid_argument("HmmModel::fit: empty subset");
    const std::vector<Sequence> seqs = subset.gather();
    if (!fitted_ || !options_.warm_start) {
        Rng rng(options_.seed + 0x51ed27ULL * (fits_ + 1));
        hmm_ = hmm_initial_guess(seqs, options_.states, rng);
        fitted_ = true;
    }
    hmm_ = baum_welch_fit(seqs, hmm_, options_.fit_iters, options_.tol, {}, options_.variance_floor).model;
    ++fits_;
}

std::vector<double> HmmModel::parameters() const {
    std::vector<double> p;
    auto append = [&p](const auto& m) { p.insert(p.end(), m.data(), m.data() + m.size()); };
    append(hmm_.initial);
    append(hmm_.transition);
    append(hmm_.means);
    append(hmm_.variances);
    return p;
}

}  // namespace beem
