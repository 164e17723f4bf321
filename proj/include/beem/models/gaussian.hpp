#pragma once

#include "beem/common.hpp"
#include "beem/core/beem.hpp"
#include "beem/simd/kernels.hpp"

#include <memory>
#include <span>
#include <vector>

namespace beem {

inline constexpr double kCovarianceFloor = 1e-6;

struct GaussianComponent {
    Vector mean;
    Matrix covariance;
};

// Rows of the result are the points; column-major storage makes it a
// structure-of-arrays block for the SIMD kernels.
Matrix pack_points(std::span<const Vector> points);
simd::PointsView points_view(const Matrix& packed);

// Cholesky factor of a covariance, with a single jitter retry.
struct CovarianceFactor {
    Matrix lower;             // L with L L^T = covariance (+ jitter if retried)
    std::vector<double> rows; // L in row-major order for the kernels
    double log_det = 0.0;

    explicit CovarianceFactor(const Matrix& covariance, double jitter = kCovarianceFloor);
};

double gaussian_logpdf(const Vector& x, const GaussianComponent& comp);

// Sample mean and biased (1/n) covariance plus jitter * I.
GaussianComponent gaussian_mle_fit(std::span<const Vector> points, double jitter = kCovarianceFloor);

// Weighted mean/covariance (weights need not sum to 1; at least one > 0).
GaussianComponent gaussian_weighted_fit(const Matrix& packed, std::span<const double> weights,
                                        double jitter = kCovarianceFloor);

// Log densities of every row of `packed` under `comp`.
void gaussian_logpdf_batch(const Matrix& packed, const GaussianComponent& comp, std::span<double> out);

// Multivariate normal base model.
class GaussianModel {
public:
    explicit GaussianModel(double jitter = kCovarianceFloor) : jitter_(jitter) {}
    explicit GaussianModel(GaussianComponent comp, double jitter = kCovarianceFloor);

    double log_likelihood(const Vector& x) const;
    void log_likelihood_batch(std::span<const Vector> data, std::span<double> out) const;
    void fit(const Subset<Vector>& subset);
    std::vector<double> parameters() const;

    bool fitted() const { return factor_ != nullptr; }
    const GaussianComponent& component() const { return comp_; }

private:
    void refresh();

    double jitter_;
    GaussianComponent comp_;
    std::shared_ptr<const CovarianceFactor> factor_;
};

}  // namespace beem
