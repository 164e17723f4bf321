#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "beem/core/beem.hpp"
#include "beem/datagen.hpp"
#include "beem/models/gaussian.hpp"
#include "properties.hpp"

#include <cmath>
#include <numeric>
#include <set>

using namespace beem;

namespace {

FitReport fit_square(std::uint64_t seed, std::size_t k, WeightMode mode, bool greedy = false) {
    const LabeledVectors d = gen_square({100, 50, 50, 10}, 10.0, 0.3, 7);
    BeemConfig cfg;
    cfg.seed = seed;
    cfg.weight_mode = mode;
    cfg.greedy_assignment = greedy;
    return beem_fit<Vector, GaussianModel>(d.points, k, [](std::size_t) { return GaussianModel(); }, cfg);
}

}  // namespace

TEST_CASE("responsibility worked examples") {
    const auto p = modified_responsibility(std::vector<double>{0.0, std::log(2.0)}, {}, 1.0);
    CHECK(p[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

    // tau = 2 takes square roots of the odds
    const auto q = modified_responsibility(std::vector<double>{0.0, std::log(4.0)}, {}, 2.0);
    CHECK(q[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

    // weights enter additively before the temperature
    const std::vector<double> lw{std::log(0.75), std::log(0.25)};
    const auto r = modified_responsibility(std::vector<double>{0.0, 0.0}, lw, 1.0);
    CHECK(r[0] == doctest::Approx(0.75).epsilon(1e-14));

    // an -inf entry gets exactly zero mass
    const auto s = modified_responsibility(std::vector<double>{kNegInf, 3.0, 3.0}, {}, 0.5);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == doctest::Approx(0.5));
}

TEST_CASE("responsibility rejects bad input") {
    const std::vector<double> row{1.0, 2.0};
    CHECK_THROWS_AS(modified_responsibility(row, {}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(modified_responsibility(row, {}, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(modified_responsibility(std::vector<double>{kNegInf, kNegInf}, {}, 1.0), std::domain_error);
}

TEST_CASE("responsibility randomized properties") {
    CHECK(props::responsibility_sweep(1000, 11) == 0);
}

TEST_CASE("sampling frequencies and determinism") {
    const std::vector<double> p{0.2, 0.5, 0.0, 0.3};
    Rng rng(3);
    std::vector<int> counts(4, 0);
    const int draws = 200000;
    for (int i = 0; i < draws; ++i) ++counts[sample_assignment(p, rng)];
    CHECK(counts[2] == 0);
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(counts[k] / double(draws) - p[k]) < 0.005);

    Rng a(99), b(99);
    for (int i = 0; i < 100; ++i) CHECK(sample_assignment(p, a) == sample_assignment(p, b));

    Rng c(1);
    CHECK_THROWS(sample_assignment(std::vector<double>{0.5, -0.1, 0.6}, c));
    CHECK_THROWS(sample_assignment(std::vector<double>{0.5, 0.6}, c));
}

TEST_CASE("cooling schedule") {
    CHECK(cool(1.5, 1, 0.97) == 1.5);
    CHECK(cool(1.5, 3, 0.97) == doctest::Approx(1.5 * 0.97 * 0.97).epsilon(1e-14));
    CHECK(cool(2.0, 11, 0.5) == doctest::Approx(2.0 / 1024.0).epsilon(1e-14));
    CHECK_THROWS(cool(1.5, 0, 0.97));
}

TEST_CASE("complete-data score and partition") {
    Matrix v(3, 2);
    v << 1.0, 2.0, 3.0, -1.0, -5.0, -4.0;
    CHECK(complete_data_loglik(v) == doctest::Approx(1.0));

    Rng rng(5);
    const auto parts = random_partition(10, 3, rng);
    REQUIRE(parts.size() == 3);
    std::multiset<std::size_t> all;
    std::vector<std::size_t> sizes;
    for (const auto& part : parts) {
        CHECK_FALSE(part.empty());
        sizes.push_back(part.size());
        all.insert(part.begin(), part.end());
    }
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<std::size_t>{3, 3, 4});
    CHECK(all.size() == 10);
    CHECK(std::set<std::size_t>(all.begin(), all.end()).size() == 10);
    CHECK_THROWS(random_partition(2, 3, rng));

    const auto st = AssignmentState::from_labels({0, 1, 1, 2, 0}, 3);
    CHECK(st.consistent());
    CHECK(st.subsets[1] == std::vector<std::size_t>{1, 2});
}

TEST_CASE("beem fit is a pure function of the seed") {
    const FitReport a = fit_square(4, 4, WeightMode::UniformFixed);
    const FitReport b = fit_square(4, 4, WeightMode::UniformFixed);
    CHECK(a.labels == b.labels);
    CHECK(a.loglik_trace == b.loglik_trace);
    CHECK(a.label_trace == b.label_trace);
    const FitReport c = fit_square(5, 4, WeightMode::UniformFixed);
    CHECK(c.label_trace != a.label_trace);
}

TEST_CASE("beem trace invariants") {
    for (WeightMode mode : {WeightMode::UniformFixed, WeightMode::Learned}) {
        const FitReport r = fit_square(8, 4, mode);
        const auto t = static_cast<std::size_t>(r.em_steps);
        REQUIRE(t >= 1);
        CHECK(r.loglik_trace.size() == t);
        CHECK(r.temp_trace.size() == t);
        CHECK(r.size_trace.size() == t);
        CHECK(r.label_trace.size() == t);
        for (std::size_t i = 0; i < t; ++i) {
            CHECK(r.temp_trace[i] == doctest::Approx(cool(1.5, static_cast<int>(i) + 1, 0.97)).epsilon(1e-14));
            CHECK(std::accumulate(r.size_trace[i].begin(), r.size_trace[i].end(), std::size_t{0}) == 210);
            CHECK(AssignmentState::from_labels(r.label_trace[i], 4).consistent());
        }
        const double best = *std::max_element(r.loglik_trace.begin(), r.loglik_trace.end());
        CHECK(r.loglik_trace[static_cast<std::size_t>(r.best_iteration) - 1] == best);
        if (r.converged) CHECK(r.em_steps - r.best_iteration == 10);
        CHECK(r.weights.sum() == doctest::Approx(1.0));
        CHECK(r.labels.size() == 210);
        CHECK(r.responsibilities.rows() == 210);
    }
}

TEST_CASE("single component") {
    const FitReport r = fit_square(1, 1, WeightMode::Learned);
    CHECK(std::all_of(r.labels.begin(), r.labels.end(), [](int z) { return z == 0; }));
    CHECK(r.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("greedy assignment gives a non-decreasing score") {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const FitReport r = fit_square(s, 4, WeightMode::UniformFixed, true);
        CHECK(props::non_decreasing(r.loglik_trace, 1e-6));
    }
}

TEST_CASE("engine argument checks") {
    const std::vector<Vector> two{Vector::Zero(1), Vector::Ones(1)};
    BeemConfig cfg;
    auto factory = [](std::size_t) { return GaussianModel(); };
    CHECK_THROWS(beem_fit<Vector, GaussianModel>(two, 3, factory, cfg));
    CHECK_THROWS(beem_fit<Vector, GaussianModel>(std::vector<Vector>{}, 1, factory, cfg));
    cfg.tau0 = 0.0;
    CHECK_THROWS(beem_fit<Vector, GaussianModel>(two, 1, factory, cfg));
}
