#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "beem/models/gp.hpp"
#include "properties.hpp"

#include <Eigen/Cholesky>

#include <cmath>

using namespace beem;

TEST_CASE("kernel values") {
    KernelSpec rbf;
    CHECK(kernel_eval(rbf, 0.3, 1.3) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(kernel_eval(rbf, 0.3, 1.3) == doctest::Approx(0.60653).epsilon(1e-5));
    rbf.output_variance = 2.5;
    CHECK(kernel_eval(rbf, 4.0, 4.0) == 2.5);

    KernelSpec per;
    per.family = KernelFamily::Periodic;
    per.output_variance = 0.1;
    per.period = 0.7;
    per.lengthscale = 0.4;
    CHECK(kernel_eval(per, 0.2, 0.2) == doctest::Approx(0.1));
    CHECK(kernel_eval(per, 0.2, 0.9) == doctest::Approx(0.1).epsilon(1e-12));
    const double s = std::sin(M_PI * 0.25 / 0.7);
    CHECK(kernel_eval(per, 0.0, 0.25) == doctest::Approx(0.1 * std::exp(-2.0 * s * s / 0.16)).epsilon(1e-13));

    KernelSpec bad;
    bad.lengthscale = 0.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("gram matrices are symmetric and factorise with noise") {
    Rng rng(2);
    for (int t = 0; t < 30; ++t) {
        const GpComponent c = props::random_gp(rng, 20);
        const Matrix k = gram_matrix(c.kernel, c.inputs);
        CHECK((k - k.transpose()).norm() == 0.0);
        Matrix kn = k;
        kn.diagonal().array() += c.noise_variance;
        CHECK(Eigen::LLT<Matrix>(kn).info() == Eigen::Success);
    }
}

TEST_CASE("marginal likelihood and predictive against dense oracles") {
    CHECK(props::gp_oracle_sweep(200, 3) == 0);
}

TEST_CASE("closed forms") {
    GpComponent c;
    c.kernel.output_variance = 1.3;
    c.noise_variance = 0.2;
    c.inputs = {0.4};
    c.targets = {0.9};
    const double v = 1.5;
    CHECK(gp_log_marginal_likelihood(c) == doctest::Approx(-0.5 * (0.81 / v + std::log(2 * M_PI * v))).epsilon(1e-13));

    // predictive at the training input: mean s2 y / (s2 + n), variance s2 n / (s2 + n) + n
    const double mean = 1.3 * 0.9 / v, var = 1.3 * 0.2 / v + 0.2;
    CHECK(gp_log_predictive(c, 0.4, 0.5) == doctest::Approx(-0.5 * (std::log(2 * M_PI * var) + (0.5 - mean) * (0.5 - mean) / var)).epsilon(1e-12));

    GpComponent empty;
    empty.kernel.output_variance = 0.7;
    empty.noise_variance = 0.1;
    CHECK(gp_log_predictive(empty, 3.0, 0.2) == doctest::Approx(-0.5 * (std::log(2 * M_PI * 0.8) + 0.04 / 0.8)).epsilon(1e-13));

    // zero targets leave only the determinant and constant
    Rng rng(5);
    GpComponent z = props::random_gp(rng, 4);
    std::fill(z.targets.begin(), z.targets.end(), 0.0);
    Matrix k = props::dense_cov(z);
    k.diagonal().array() += z.noise_variance;
    CHECK(gp_log_marginal_likelihood(z) == doctest::Approx(-0.5 * std::log(k.determinant()) - 2.0 * std::log(2 * M_PI)).epsilon(1e-10));
}

TEST_CASE("hyperparameter search") {
    Rng rng(7);
    std::vector<double> x, y;
    for (int i = 0; i < 40; ++i) {
        x.push_back(rng.uniform() * 4.0);
        y.push_back(std::sin(2.0 * x.back()) + rng.normal(0.0, 0.1));
    }
    KernelSpec start;
    start.lengthscale = 3.0;
    GpComponent init{start, 0.01, x, y};
    const double before = gp_log_marginal_likelihood(init);
    const GpComponent fit = gp_fit_hyperparams(x, y, start, 0.01, 10);
    CHECK(gp_log_marginal_likelihood(fit) >= before);
    CHECK(fit.noise_variance == 0.01);
    CHECK(fit.kernel.lengthscale < 3.0);

    const GpComponent same = gp_fit_hyperparams(x, y, start, 0.01, 0);
    CHECK(same.kernel.lengthscale == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(same.kernel.output_variance == doctest::Approx(1.0).epsilon(1e-14));

    const GpComponent noisy = gp_fit_hyperparams(x, y, start, 0.5, 10, true);
    CHECK(noisy.noise_variance < 0.5);

    CHECK_THROWS(gp_fit_hyperparams(std::vector<double>{1.0}, std::vector<double>{1.0}, start, 0.01, 10));
}

TEST_CASE("lengthscale recovered from a GP draw") {
    Rng rng(11);
    KernelSpec truth;
    truth.lengthscale = 0.5;
    std::vector<double> x;
    for (int i = 0; i < 60; ++i) x.push_back(rng.uniform() * 6.0);
    Matrix k = gram_matrix(truth, x);
    k.diagonal().array() += 0.01;
    const Matrix l = Eigen::LLT<Matrix>(k).matrixL();
    const Vector draw = l * Vector::NullaryExpr(60, [&] { return rng.normal(); });
    const std::vector<double> y(draw.data(), draw.data() + 60);
    KernelSpec start;
    start.lengthscale = 1.5;
    const GpComponent fit = gp_fit_hyperparams(x, y, start, 0.01, 30);
    CHECK(fit.kernel.lengthscale > 0.25);
    CHECK(fit.kernel.lengthscale < 1.0);
}

TEST_CASE("held-out scoring in the base model") {
    std::vector<GpPoint> pts;
    for (int i = 0; i < 8; ++i) pts.push_back({i * 0.1, std::sin(i * 0.3)});
    std::vector<std::size_t> idx(pts.size());
    std::iota(idx.begin(), idx.end(), 0);

    GpModel::Options opt;
    opt.budget = 0;
    opt.fit_noise = false;
    opt.score = GpScore::LeaveOneOut;
    GpModel loo(opt);
    loo.fit(Subset<GpPoint>(pts, idx));
    const GpPosterior post(loo.component(), true);
    CHECK(loo.log_likelihood(pts[3]) == doctest::Approx(props::dense_loo(loo.component(), 3)).epsilon(1e-9));
    // a point outside the training set gets the plain predictive
    CHECK(loo.log_likelihood({0.35, 0.2}) == doctest::Approx(post.log_predictive(0.35, 0.2)).epsilon(1e-12));

    opt.score = GpScore::LeaveIn;
    GpModel in(opt);
    in.fit(Subset<GpPoint>(pts, idx));
    CHECK(in.log_likelihood(pts[3]) == doctest::Approx(post.log_predictive(pts[3].x, pts[3].y)).epsilon(1e-12));
}
