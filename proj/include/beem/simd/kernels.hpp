#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and
// an AVX2+FMA version; `kernels()` returns the table selected at runtime.
//
// Point sets are passed in structure-of-arrays form: dimension j of point i
// lives at data[j * stride + i]. A column-major Eigen matrix with one row per
// point has exactly this layout (stride = rows()).

#include <cstddef>
#include <span>
#include <string_view>

namespace beem::simd {

struct PointsView {
    const double* data = nullptr;
    std::size_t count = 0;
    std::size_t dims = 0;
    std::size_t stride = 0;

    const double* column(std::size_t j) const { return data + j * stride; }
};

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    Isa isa;

    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);

    // out[i] = sum_j (x_ij - center_j)^2 * inv_var_j
    void (*diag_quadratic)(const PointsView& points, const double* center, const double* inv_var, double* out);

    // out[i] = || L^{-1} (x_i - mean) ||^2 with L lower triangular, row-major
    // dims x dims. This is the Mahalanobis distance under covariance L L^T.
    void (*mahalanobis)(const PointsView& points, const double* mean, const double* chol_lower, double* out);
};

const KernelTable& scalar_kernels();

// Returns nullptr when the AVX2 variant was not compiled in or the CPU lacks
// AVX2/FMA.
const KernelTable* avx2_kernels();

// Active table. Defaults to the best supported ISA; the environment variable
// BEEM_SIMD=scalar forces the reference path.
const KernelTable& kernels();

// Overrides the active table. Returns false if the ISA is unavailable.
bool select_isa(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace beem::simd
