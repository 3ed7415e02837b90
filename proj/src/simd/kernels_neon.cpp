#include "prekopa/simd/kernels.hpp"

#if defined(__aarch64__) || defined(__ARM_NEON)

#include <arm_neon.h>

namespace prekopa::simd {
namespace {

inline double hsum2x2(float64x2_t a, float64x2_t b) {
    // (l0+l1) + (l2+l3), same combine order as the other backends.
    return (vgetq_lane_f64(a, 0) + vgetq_lane_f64(a, 1)) +
           (vgetq_lane_f64(b, 0) + vgetq_lane_f64(b, 1));
}

double dot_block_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t a0 = vdupq_n_f64(0.0), a1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 = vfmaq_f64(a0, vld1q_f64(x + i), vld1q_f64(y + i));
        a1 = vfmaq_f64(a1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    }
    double s = hsum2x2(a0, a1);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double sum_block_neon(const double* x, std::size_t n) {
    float64x2_t a0 = vdupq_n_f64(0.0), a1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 = vaddq_f64(a0, vld1q_f64(x + i));
        a1 = vaddq_f64(a1, vld1q_f64(x + i + 2));
    }
    double s = hsum2x2(a0, a1);
    for (; i < n; ++i) s += x[i];
    return s;
}

double dot3_block_neon(const double* w, const double* x, const double* y, std::size_t n) {
    float64x2_t a0 = vdupq_n_f64(0.0), a1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        a0 = vfmaq_f64(a0, vmulq_f64(vld1q_f64(w + i), vld1q_f64(x + i)), vld1q_f64(y + i));
        a1 = vfmaq_f64(a1, vmulq_f64(vld1q_f64(w + i + 2), vld1q_f64(x + i + 2)),
                       vld1q_f64(y + i + 2));
    }
    double s = hsum2x2(a0, a1);
    for (; i < n; ++i) s += w[i] * x[i] * y[i];
    return s;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void xpay_neon(const double* x, double a, double* y, std::size_t n) {
    float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(x + i), va, vld1q_f64(y + i)));
    for (; i < n; ++i) y[i] = x[i] + a * y[i];
}

void add_scalar_neon(double c, double* x, std::size_t n) {
    float64x2_t vc = vdupq_n_f64(c);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vaddq_f64(vld1q_f64(x + i), vc));
    for (; i < n; ++i) x[i] += c;
}

double max_abs_neon(const double* x, std::size_t n) {
    float64x2_t vm = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vm = vmaxq_f64(vm, vabsq_f64(vld1q_f64(x + i)));
    double m = vgetq_lane_f64(vm, 0);
    double m1 = vgetq_lane_f64(vm, 1);
    if (m1 > m) m = m1;
    for (; i < n; ++i) {
        double a = x[i] < 0 ? -x[i] : x[i];
        if (a > m) m = a;
    }
    return m;
}

void spmv_neon(const std::int32_t* row_ptr, const std::int32_t* col, const double* val,
               std::size_t nrows, const double* x, double* y) {
    for (std::size_t r = 0; r < nrows; ++r) {
        double s = 0.0;
        for (std::int32_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[col[k]];
        y[r] = s;
    }
}

}  // namespace

extern const KernelTable kernels_neon = {
    dot_block_neon, sum_block_neon, dot3_block_neon,
    axpy_neon,      xpay_neon,      add_scalar_neon,
    max_abs_neon,   spmv_neon,
};

}  // namespace prekopa::simd

#endif  // aarch64 / NEON
