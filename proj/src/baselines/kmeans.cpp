#include "beem/baselines/kmeans.hpp"

#include "beem/models/gaussian.hpp"
#include "beem/simd/kernels.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace beem {
namespace {

// dist(i, c) = squared Euclidean distance from point i to center c.
void distances(const Matrix& packed, const std::vector<Vector>& centers, Matrix& dist) {
    const auto view = points_view(packed);
    const Vector ones = Vector::Ones(packed.cols());
    dist.resize(packed.rows(), static_cast<Eigen::Index>(centers.size()));
    for (std::size_t c = 0; c < centers.size(); ++c) {
        simd::kernels().diag_quadratic(view, centers[c].data(), ones.data(), dist.col(static_cast<Eigen::Index>(c)).data());
    }
}

}  // namespace

std::vector<std::size_t> kmeans_plus_plus(std::span<const Vector> data, std::size_t k, Rng& rng) {
    if (k == 0 || data.size() < k) throw std::invalid_argument("kmeans++: need 1 <= k <= N");
    const Matrix packed = pack_points(data);
    const auto view = points_view(packed);
    const Vector ones = Vector::Ones(packed.cols());
    std::vector<std::size_t> chosen{static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(data.size()) - 1))};
    std::vector<double> nearest(data.size()), scratch(data.size());
    simd::kernels().diag_quadratic(view, data[chosen[0]].data(), ones.data(), nearest.data());
    while (chosen.size() < k) {
        const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
        std::size_t pick = 0;
        if (total > 0.0) {
            const double u = rng.uniform() * total;
            double cum = 0.0;
            pick = data.size();
            for (std::size_t i = 0; i < data.size(); ++i) {
                cum += nearest[i];
                if (u < cum && nearest[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
            if (pick == data.size()) {
                // rounding: take the last point with positive mass
                for (std::size_t i = data.size(); i-- > 0;) {
                    if (nearest[i] > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        } else {
            // Fewer distinct points than k; fall back to any unchosen index.
            for (std::size_t i = 0; i < data.size(); ++i) {
                if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) {
                    pick = i;
                    break;
                }
            }
        }
        chosen.push_back(pick);
        simd::kernels().diag_quadratic(view, data[pick].data(), ones.data(), scratch.data());
        for (std::size_t i = 0; i < data.size(); ++i) nearest[i] = std::min(nearest[i], scratch[i]);
    }
    return chosen;
}

KMeansResult kmeans(std::span<const Vector> data, std::size_t k, KMeansInit init, int max_iters, std::uint64_t seed) {
    if (k == 0) throw std::invalid_argument("kmeans: k must be positive");
    if (data.size() < k) throw std::invalid_argument("kmeans: fewer points than clusters");
    Rng rng(seed);
    const Matrix packed = pack_points(data);
    const std::size_t n = data.size();

    std::vector<std::size_t> seeds;
    if (init == KMeansInit::PlusPlus) {
        seeds = kmeans_plus_plus(data, k, rng);
    } else {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order.begin(), order.end());
        seeds.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    }

    KMeansResult res;
    for (std::size_t s : seeds) res.centers.push_back(data[s]);
    res.labels.assign(n, -1);
    Matrix dist;

    auto assign = [&]() {
        distances(packed, res.centers, dist);
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::Index best;
            inertia += dist.row(static_cast<Eigen::Index>(i)).minCoeff(&best);
            if (res.labels[i] != static_cast<int>(best)) {
                res.labels[i] = static_cast<int>(best);
                changed = true;
            }
        }
        res.inertia = inertia;
        return changed;
    };

    assign();
    res.inertia_trace.push_back(res.inertia);
    for (int it = 0; it < max_iters; ++it) {
        std::vector<Vector> sums(k, Vector::Zero(packed.cols()));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sums[static_cast<std::size_t>(res.labels[i])] += data[i];
            ++counts[static_cast<std::size_t>(res.labels[i])];
        }
        std::vector<bool> taken(n, false);
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                res.centers[c] = sums[c] / static_cast<double>(counts[c]);
                continue;
            }
            // farthest point from its own center
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = dist(static_cast<Eigen::Index>(i), res.labels[i]);
                if (!taken[i] && d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            taken[far] = true;
            res.centers[c] = data[far];
        }
        res.iterations = it + 1;
        const bool changed = assign();
        res.inertia_trace.push_back(res.inertia);
        if (!changed) break;
    }
    return res;
}

KMeansResult kmeans_restarts(std::span<const Vector> data, std::size_t k, KMeansInit init, int max_iters, int restarts,
                             std::uint64_t seed) {
    if (restarts < 1) throw std::invalid_argument("kmeans_restarts: restarts must be >= 1");
    Rng seeds(seed);
    KMeansResult best;
    for (int r = 0; r < restarts; ++r) {
        KMeansResult run = kmeans(data, k, init, max_iters, seeds.next());
        if (r == 0 || run.inertia < best.inertia) best = std::move(run);
    }
    return best;
}

}  // namespace beem
