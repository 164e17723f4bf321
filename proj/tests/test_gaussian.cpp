#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "beem/models/gaussian.hpp"

#include <cmath>

using namespace beem;

namespace {

GaussianComponent comp(Vector mean, Matrix cov) { return {std::move(mean), std::move(cov)}; }

}  // namespace

TEST_CASE("log density worked values") {
    CHECK(gaussian_logpdf(Vector::Zero(1), comp(Vector::Zero(1), Matrix::Identity(1, 1))) ==
          doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-14));
    CHECK(gaussian_logpdf(Vector::Zero(1), comp(Vector::Zero(1), Matrix::Identity(1, 1))) == doctest::Approx(-0.91894).epsilon(1e-5));

    const double hand = -std::log(2.0 * M_PI * 0.3) - 25.0 / 0.3;
    const double v = gaussian_logpdf(Vector::Constant(2, 5.0), comp(Vector::Zero(2), 0.3 * Matrix::Identity(2, 2)));
    CHECK(v == doctest::Approx(hand).epsilon(1e-12));
    CHECK(std::abs(v + 83.966) < 2e-3);
}

TEST_CASE("log density against an explicit inverse and determinant") {
    Rng rng(2);
    for (int t = 0; t < 50; ++t) {
        const Eigen::Index d = rng.uniform_int(1, 5);
        Matrix a = Matrix::NullaryExpr(d, d, [&] { return rng.normal(); });
        const Matrix cov = a * a.transpose() + 0.5 * Matrix::Identity(d, d);
        const Vector mean = Vector::NullaryExpr(d, [&] { return rng.normal(); });
        const Vector x = Vector::NullaryExpr(d, [&] { return rng.normal(0.0, 2.0); });
        const Vector z = x - mean;
        const double oracle = -0.5 * (static_cast<double>(d) * std::log(2.0 * M_PI) + std::log(cov.determinant()) + z.dot(cov.inverse() * z));
        CHECK(gaussian_logpdf(x, comp(mean, cov)) == doctest::Approx(oracle).epsilon(1e-10));

        // translation invariance
        const Vector s = Vector::NullaryExpr(d, [&] { return rng.normal(0.0, 10.0); });
        CHECK(gaussian_logpdf(x + s, comp(mean + s, cov)) == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("batch scoring equals pointwise scoring") {
    Rng rng(3);
    std::vector<Vector> pts;
    for (int i = 0; i < 37; ++i) pts.push_back(Vector::NullaryExpr(3, [&] { return rng.normal(); }));
    const GaussianComponent c = gaussian_mle_fit(pts);
    std::vector<double> out(pts.size());
    gaussian_logpdf_batch(pack_points(pts), c, out);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(out[i] == doctest::Approx(gaussian_logpdf(pts[i], c)).epsilon(1e-12));

    GaussianModel m(c);
    m.log_likelihood_batch(pts, out);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(out[i] == doctest::Approx(m.log_likelihood(pts[i])).epsilon(1e-12));
}

TEST_CASE("maximum-likelihood fit") {
    std::vector<Vector> pts;
    for (double a : {0.0, 2.0})
        for (double b : {0.0, 2.0}) pts.push_back((Vector(2) << a, b).finished());
    const GaussianComponent c = gaussian_mle_fit(pts, 0.0);
    CHECK(c.mean.isApprox(Vector::Ones(2)));
    CHECK((c.covariance - Matrix::Identity(2, 2)).norm() < 1e-14);

    std::vector<Vector> reordered(pts.rbegin(), pts.rend());
    const GaussianComponent r = gaussian_mle_fit(reordered, 0.0);
    CHECK((r.covariance - c.covariance).norm() < 1e-14);

    const Vector p = (Vector(3) << 1.0, -2.0, 4.0).finished();
    const GaussianComponent one = gaussian_mle_fit(std::vector<Vector>{p}, 1e-6);
    CHECK(one.mean == p);
    CHECK((one.covariance - 1e-6 * Matrix::Identity(3, 3)).norm() < 1e-20);

    CHECK_THROWS(gaussian_mle_fit(std::vector<Vector>{}));
}

TEST_CASE("fitted density peaks at the sample mean") {
    Rng rng(9);
    std::vector<Vector> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(Vector::Constant(1, rng.normal(3.0, 2.0)));
    const GaussianComponent c = gaussian_mle_fit(pts);
    const double top = gaussian_logpdf(c.mean, c);
    for (int g = -400; g <= 400; ++g) CHECK(gaussian_logpdf(Vector::Constant(1, 3.0 + g * 0.025), c) <= top);
}

TEST_CASE("weighted fit with unit weights matches the plain fit") {
    Rng rng(4);
    std::vector<Vector> pts;
    for (int i = 0; i < 20; ++i) pts.push_back(Vector::NullaryExpr(2, [&] { return rng.normal(); }));
    const std::vector<double> w(pts.size(), 3.0);
    const GaussianComponent a = gaussian_weighted_fit(pack_points(pts), w);
    const GaussianComponent b = gaussian_mle_fit(pts);
    CHECK(a.mean.isApprox(b.mean, 1e-12));
    CHECK(a.covariance.isApprox(b.covariance, 1e-12));
}

TEST_CASE("model contract") {
    GaussianModel m;
    CHECK_FALSE(m.fitted());
    CHECK_THROWS_AS(m.log_likelihood(Vector::Zero(1)), std::logic_error);
    std::vector<Vector> pts{Vector::Zero(1), Vector::Ones(1)};
    const std::vector<std::size_t> idx{0, 1};
    m.fit(Subset<Vector>(pts, idx));
    CHECK(m.fitted());
    CHECK(m.component().mean[0] == doctest::Approx(0.5));
    CHECK(std::isfinite(m.log_likelihood(Vector::Constant(1, 100.0))));
}
