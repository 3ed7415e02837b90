#include "prekopa/simd/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace prekopa::simd {

extern const KernelTable kernels_scalar;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable kernels_avx2;
#endif
#if defined(__aarch64__) || defined(__ARM_NEON)
extern const KernelTable kernels_neon;
#endif

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend pick_default() {
    if (const char* env = std::getenv("PREKOPA_KERNELS")) {
        std::string s(env);
        if (s == "scalar") return Backend::scalar;
        if (s == "avx2" && backend_available(Backend::avx2)) return Backend::avx2;
        if (s == "neon" && backend_available(Backend::neon)) return Backend::neon;
        // unknown or unavailable value: fall through to auto
    }
#if defined(__aarch64__) || defined(__ARM_NEON)
    return Backend::neon;
#else
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
#endif
}

Backend g_backend = pick_default();

const KernelTable& table() {
    switch (g_backend) {
#if defined(__x86_64__) || defined(_M_X64)
        case Backend::avx2: return kernels_avx2;
#endif
#if defined(__aarch64__) || defined(__ARM_NEON)
        case Backend::neon: return kernels_neon;
#endif
        default: return kernels_scalar;
    }
}

// Pairwise combine of per-block partial sums; fixed order, O(log n) error.
double pairwise(const double* p, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += p[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise(p, h) + pairwise(p + h, n - h);
}

template <typename BlockFn, typename... Args>
double blocked_reduce(BlockFn fn, std::size_t n, Args... arrays) {
    if (n <= kBlock) return fn((arrays)..., n);
    std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partials(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
        std::size_t off = b * kBlock;
        std::size_t len = (off + kBlock <= n) ? kBlock : n - off;
        partials[b] = fn((arrays + off)..., len);
    }
    return pairwise(partials.data(), nblocks);
}

}  // namespace

bool backend_available(Backend b) {
    switch (b) {
        case Backend::scalar: return true;
        case Backend::avx2: return cpu_has_avx2();
        case Backend::neon:
#if defined(__aarch64__) || defined(__ARM_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Backend active_backend() { return g_backend; }

void set_backend(Backend b) {
    if (!backend_available(b))
        throw std::runtime_error("kernel backend not available on this host: " + backend_name(b));
    g_backend = b;
}

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "?";
}

double dot(const double* x, const double* y, std::size_t n) {
    return blocked_reduce(table().dot_block, n, x, y);
}

double sum(const double* x, std::size_t n) { return blocked_reduce(table().sum_block, n, x); }

double dot3(const double* w, const double* x, const double* y, std::size_t n) {
    return blocked_reduce(table().dot3_block, n, w, x, y);
}

void axpy(double a, const double* x, double* y, std::size_t n) { table().axpy(a, x, y, n); }

void xpay(const double* x, double a, double* y, std::size_t n) { table().xpay(x, a, y, n); }

void add_scalar(double c, double* x, std::size_t n) { table().add_scalar(c, x, n); }

double max_abs(const double* x, std::size_t n) { return table().max_abs(x, n); }

void spmv(const std::int32_t* row_ptr, const std::int32_t* col, const double* val,
          std::size_t nrows, const double* x, double* y) {
    table().spmv(row_ptr, col, val, nrows, x, y);
}

}  // namespace prekopa::simd
