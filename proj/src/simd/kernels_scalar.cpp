#include "beem/simd/kernels.hpp"

#include <vector>

namespace beem::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void diag_quadratic_scalar(const PointsView& p, const double* center, const double* inv_var, double* out) {
    for (std::size_t i = 0; i < p.count; ++i) out[i] = 0.0;
    for (std::size_t j = 0; j < p.dims; ++j) {
        const double* col = p.column(j);
        const double c = center[j];
        const double w = inv_var[j];
        for (std::size_t i = 0; i < p.count; ++i) {
            const double d = col[i] - c;
            out[i] += d * d * w;
        }
    }
}

void mahalanobis_scalar(const PointsView& p, const double* mean, const double* chol, double* out) {
    const std::size_t d = p.dims;
    std::vector<double> z(d);
    for (std::size_t i = 0; i < p.count; ++i) {
        double acc = 0.0;
        // forward substitution L z = x - mean
        for (std::size_t r = 0; r < d; ++r) {
            double v = p.column(r)[i] - mean[r];
            for (std::size_t c = 0; c < r; ++c) v -= chol[r * d + c] * z[c];
            z[r] = v / chol[r * d + r];
            acc += z[r] * z[r];
        }
        out[i] = acc;
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{Isa::Scalar, &dot_scalar, &diag_quadratic_scalar, &mahalanobis_scalar};
    return table;
}

}  // namespace beem::simd
