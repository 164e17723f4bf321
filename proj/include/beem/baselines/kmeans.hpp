#pragma once

#include "beem/common.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace beem {

enum class KMeansInit { RandomPoints, PlusPlus };

struct KMeansResult {
    std::vector<Vector> centers;
    Labels labels;
    double inertia = 0.0;
    // Inertia after seeding, then after every Lloyd iteration.
    std::vector<double> inertia_trace;
    int iterations = 0;
};

// Lloyd's algorithm. An empty cluster is re-seeded at the point farthest
// from its assigned center.
KMeansResult kmeans(std::span<const Vector> data, std::size_t k, KMeansInit init, int max_iters, std::uint64_t seed);

// Best of `restarts` independent runs (lowest inertia); run r uses the r-th
// draw of Rng(seed) as its seed.
KMeansResult kmeans_restarts(std::span<const Vector> data, std::size_t k, KMeansInit init, int max_iters, int restarts,
                             std::uint64_t seed);

// k-means++ seeding: indices of the chosen centers.
std::vector<std::size_t> kmeans_plus_plus(std::span<const Vector> data, std::size_t k, Rng& rng);

}  // namespace beem
