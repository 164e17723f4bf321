#include "beem/models/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace beem {

Matrix pack_points(std::span<const Vector> points) {
    if (points.empty()) return Matrix(0, 0);
    const Eigen::Index d = points.front().size();
    Matrix packed(static_cast<Eigen::Index>(points.size()), d);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != d) throw std::invalid_argument("pack_points: inconsistent dimensions");
        packed.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
    }
    return packed;
}

simd::PointsView points_view(const Matrix& packed) {
    return {packed.data(), static_cast<std::size_t>(packed.rows()), static_cast<std::size_t>(packed.cols()),
            static_cast<std::size_t>(packed.rows())};
}

CovarianceFactor::CovarianceFactor(const Matrix& covariance, double jitter) {
    if (covariance.rows() != covariance.cols() || covariance.rows() == 0) {
        throw std::invalid_argument("covariance must be square and nonempty");
    }
    Eigen::LLT<Matrix> llt(covariance);
    if (llt.info() != Eigen::Success) {
        llt.compute(covariance + jitter * Matrix::Identity(covariance.rows(), covariance.cols()));
        if (llt.info() != Eigen::Success) throw std::domain_error("covariance is not positive definite after jitter");
    }
    lower = llt.matrixL();
    const Eigen::Index d = lower.rows();
    rows.resize(static_cast<std::size_t>(d * d));
    log_det = 0.0;
    for (Eigen::Index r = 0; r < d; ++r) {
        log_det += 2.0 * std::log(lower(r, r));
        for (Eigen::Index c = 0; c < d; ++c) rows[static_cast<std::size_t>(r * d + c)] = lower(r, c);
    }
}

double gaussian_logpdf(const Vector& x, const GaussianComponent& comp) {
    if (x.size() != comp.mean.size() || comp.covariance.rows() != comp.mean.size()) {
        throw std::invalid_argument("gaussian_logpdf: dimension mismatch");
    }
    const CovarianceFactor f(comp.covariance);
    const Vector z = f.lower.triangularView<Eigen::Lower>().solve(x - comp.mean);
    const double d = static_cast<double>(x.size());
    return -0.5 * (d * kLog2Pi + f.log_det + z.squaredNorm());
}

GaussianComponent gaussian_mle_fit(std::span<const Vector> points, double jitter) {
    if (points.empty()) throw std::invalid_argument("gaussian_mle_fit: no points");
    const Matrix packed = pack_points(points);
    std::vector<double> ones(points.size(), 1.0);
    return gaussian_weighted_fit(packed, ones, jitter);
}

GaussianComponent gaussian_weighted_fit(const Matrix& packed, std::span<const double> weights, double jitter) {
    if (packed.rows() == 0) throw std::invalid_argument("gaussian_weighted_fit: no points");
    if (static_cast<Eigen::Index>(weights.size()) != packed.rows()) {
        throw std::invalid_argument("gaussian_weighted_fit: weight count mismatch");
    }
    const auto& kern = simd::kernels();
    const std::size_t n = weights.size();
    const Eigen::Index d = packed.cols();
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("gaussian_weighted_fit: weights sum to zero");

    GaussianComponent comp;
    comp.mean.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) comp.mean[j] = kern.dot(weights.data(), packed.col(j).data(), n) / total;

    Matrix centered = packed.rowwise() - comp.mean.transpose();
    std::vector<double> weighted(n);
    comp.covariance.resize(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (std::size_t i = 0; i < n; ++i) weighted[i] = weights[i] * centered(static_cast<Eigen::Index>(i), a);
        for (Eigen::Index b = a; b < d; ++b) {
            const double c = kern.dot(weighted.data(), centered.col(b).data(), n) / total;
            comp.covariance(a, b) = c;
            comp.covariance(b, a) = c;
        }
    }
    comp.covariance.diagonal().array() += jitter;
    return comp;
}

void gaussian_logpdf_batch(const Matrix& packed, const GaussianComponent& comp, std::span<double> out) {
    const CovarianceFactor f(comp.covariance);
    if (packed.cols() != comp.mean.size()) throw std::invalid_argument("gaussian_logpdf_batch: dimension mismatch");
    simd::kernels().mahalanobis(points_view(packed), comp.mean.data(), f.rows.data(), out.data());
    const double offset = static_cast<double>(packed.cols()) * kLog2Pi + f.log_det;
    for (double& v : out) v = -0.5 * (offset + v);
}

GaussianModel::GaussianModel(GaussianComponent comp, double jitter) : jitter_(jitter), comp_(std::move(comp)) {
    refresh();
}

void GaussianModel::refresh() { factor_ = std::make_shared<const CovarianceFactor>(comp_.covariance, jitter_); }

double GaussianModel::log_likelihood(const Vector& x) const {
    if (!fitted()) throw std::logic_error("GaussianModel: not fitted");
    if (x.size() != comp_.mean.size()) throw std::invalid_argument("GaussianModel: dimension mismatch");
    const Vector z = factor_->lower.triangularView<Eigen::Lower>().solve(x - comp_.mean);
    return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + factor_->log_det + z.squaredNorm());
}

void GaussianModel::log_likelihood_batch(std::span<const Vector> data, std::span<double> out) const {
    if (!fitted()) throw std::logic_error("GaussianModel: not fitted");
    const Matrix packed = pack_points(data);
    if (packed.cols() != comp_.mean.size()) throw std::invalid_argument("GaussianModel: dimension mismatch");
    simd::kernels().mahalanobis(points_view(packed), comp_.mean.data(), factor_->rows.data(), out.data());
    const double offset = static_cast<double>(packed.cols()) * kLog2Pi + factor_->log_det;
    for (double& v : out) v = -0.5 * (offset + v);
}

void GaussianModel::fit(const Subset<Vector>& subset) {
    comp_ = gaussian_mle_fit(subset.gather(), jitter_);
    refresh();
}

std::vector<double> GaussianModel::parameters() const {
    std::vector<double> p(comp_.mean.data(), comp_.mean.data() + comp_.mean.size());
    p.insert(p.end(), comp_.covariance.data(), comp_.covariance.data() + comp_.covariance.size());
    return p;
}

}  // namespace beem
