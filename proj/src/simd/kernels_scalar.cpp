#include "prekopa/simd/kernels.hpp"

// Scalar reference kernels. Reductions keep four independent accumulators
// (same lane structure as the SIMD variants) so that backend results differ
// only by in-block rounding.

namespace prekopa::simd {
namespace {

double dot_block_scalar(const double* x, const double* y, std::size_t n) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 += x[i] * y[i];
        a1 += x[i + 1] * y[i + 1];
        a2 += x[i + 2] * y[i + 2];
        a3 += x[i + 3] * y[i + 3];
    }
    double s = ((a0 + a1) + (a2 + a3));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double sum_block_scalar(const double* x, std::size_t n) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 += x[i];
        a1 += x[i + 1];
        a2 += x[i + 2];
        a3 += x[i + 3];
    }
    double s = ((a0 + a1) + (a2 + a3));
    for (; i < n; ++i) s += x[i];
    return s;
}

double dot3_block_scalar(const double* w, const double* x, const double* y, std::size_t n) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 += w[i] * x[i] * y[i];
        a1 += w[i + 1] * x[i + 1] * y[i + 1];
        a2 += w[i + 2] * x[i + 2] * y[i + 2];
        a3 += w[i + 3] * x[i + 3] * y[i + 3];
    }
    double s = ((a0 + a1) + (a2 + a3));
    for (; i < n; ++i) s += w[i] * x[i] * y[i];
    return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpay_scalar(const double* x, double a, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + a * y[i];
}

void add_scalar_scalar(double c, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] += c;
}

double max_abs_scalar(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double a = x[i] < 0 ? -x[i] : x[i];
        if (a > m) m = a;
    }
    return m;
}

void spmv_scalar(const std::int32_t* row_ptr, const std::int32_t* col, const double* val,
                 std::size_t nrows, const double* x, double* y) {
    for (std::size_t r = 0; r < nrows; ++r) {
        double s = 0.0;
        for (std::int32_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[col[k]];
        y[r] = s;
    }
}

}  // namespace

extern const KernelTable kernels_scalar = {
    dot_block_scalar, sum_block_scalar, dot3_block_scalar,
    axpy_scalar,      xpay_scalar,      add_scalar_scalar,
    max_abs_scalar,   spmv_scalar,
};

}  // namespace prekopa::simd
