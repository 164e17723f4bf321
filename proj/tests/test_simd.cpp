#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "beem/common.hpp"
#include "beem/simd/kernels.hpp"

#include <cmath>
#include <vector>

using namespace beem;
using beem::simd::PointsView;

namespace {

struct Block {
    std::vector<double> data;
    PointsView view;
};

Block random_points(Rng& rng, std::size_t n, std::size_t d, std::size_t pad) {
    Block b;
    const std::size_t stride = n + pad;
    b.data.resize(stride * d);
    for (double& v : b.data) v = rng.normal(0.0, 3.0);
    b.view = {b.data.data(), n, d, stride};
    return b;
}

std::vector<double> random_lower(Rng& rng, std::size_t d) {
    std::vector<double> l(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < i; ++j) l[i * d + j] = rng.normal(0.0, 0.5);
        l[i * d + i] = 0.5 + rng.uniform();
    }
    return l;
}

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("scalar reference kernels match direct loops") {
    const auto& k = simd::scalar_kernels();
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform_int(0, 20));
        const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform_int(0, 5));
        Block b = random_points(rng, n, d, 3);
        std::vector<double> center(d), inv(d);
        for (std::size_t j = 0; j < d; ++j) {
            center[j] = rng.normal();
            inv[j] = 0.1 + rng.uniform();
        }
        std::vector<double> out(n);
        k.diag_quadratic(b.view, center.data(), inv.data(), out.data());
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double z = b.view.column(j)[i] - center[j];
                s += z * z * inv[j];
            }
            CHECK(close(out[i], s, 1e-12));
        }

        // Mahalanobis through an explicit inverse of L.
        const std::vector<double> l = random_lower(rng, d);
        Matrix lm(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) lm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = l[i * d + j];
        const Matrix linv = lm.inverse();
        k.mahalanobis(b.view, center.data(), l.data(), out.data());
        for (std::size_t i = 0; i < n; ++i) {
            Vector z(static_cast<Eigen::Index>(d));
            for (std::size_t j = 0; j < d; ++j) z[static_cast<Eigen::Index>(j)] = b.view.column(j)[i] - center[j];
            CHECK(close(out[i], (linv * z).squaredNorm(), 1e-9));
        }
    }
}

TEST_CASE("AVX2 kernels agree with the scalar reference, tails included") {
    const simd::KernelTable* avx = simd::avx2_kernels();
    if (avx == nullptr) {
        MESSAGE("AVX2 not available on this machine; equivalence not exercised");
        return;
    }
    const auto& ref = simd::scalar_kernels();
    Rng rng(2);
    for (std::size_t n = 1; n <= 19; ++n) {
        for (std::size_t d = 1; d <= 9; ++d) {
            Block b = random_points(rng, n, d, n % 3);
            std::vector<double> center(d), inv(d);
            for (std::size_t j = 0; j < d; ++j) {
                center[j] = rng.normal();
                inv[j] = 0.1 + rng.uniform();
            }
            std::vector<double> a(n), s(n);
            ref.diag_quadratic(b.view, center.data(), inv.data(), s.data());
            avx->diag_quadratic(b.view, center.data(), inv.data(), a.data());
            for (std::size_t i = 0; i < n; ++i) CHECK(close(a[i], s[i], 1e-12));

            const std::vector<double> l = random_lower(rng, d);
            ref.mahalanobis(b.view, center.data(), l.data(), s.data());
            avx->mahalanobis(b.view, center.data(), l.data(), a.data());
            for (std::size_t i = 0; i < n; ++i) CHECK(close(a[i], s[i], 1e-12));
        }
        std::vector<double> x(n * 3 + 1), y(n * 3 + 1);
        for (auto& v : x) v = rng.normal();
        for (auto& v : y) v = rng.normal();
        for (std::size_t len = 0; len <= x.size(); ++len) CHECK(close(avx->dot(x.data(), y.data(), len), ref.dot(x.data(), y.data(), len), 1e-12));
    }
}

TEST_CASE("runtime selection") {
    CHECK(simd::select_isa(simd::Isa::Scalar));
    CHECK(simd::kernels().isa == simd::Isa::Scalar);
    if (simd::avx2_kernels() != nullptr) {
        CHECK(simd::select_isa(simd::Isa::Avx2));
        CHECK(simd::kernels().isa == simd::Isa::Avx2);
    } else {
        CHECK_FALSE(simd::select_isa(simd::Isa::Avx2));
    }
    CHECK(simd::isa_name(simd::Isa::Scalar) == "scalar");
}
