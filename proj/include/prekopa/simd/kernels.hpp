#pragma once
// Vector kernels used by the solver and quadrature inner loops.
//
// Every kernel has a scalar reference implementation plus SIMD variants
// (AVX2 on x86-64, NEON on aarch64) selected once at runtime. Reductions
// use a fixed blocked-pairwise order, so results are deterministic for a
// given backend; backends agree to roundoff and are equivalence-tested.

#include <cstddef>
#include <cstdint>
#include <string>

namespace prekopa::simd {

enum class Backend { scalar, avx2, neon };

// Blocked reduction granularity. Partial sums over blocks of this size are
// combined pairwise, keeping summation error at O(log n) ulps.
inline constexpr std::size_t kBlock = 256;

struct KernelTable {
    double (*dot_block)(const double*, const double*, std::size_t);
    double (*sum_block)(const double*, std::size_t);
    double (*dot3_block)(const double*, const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*xpay)(const double*, double, double*, std::size_t);
    void (*add_scalar)(double, double*, std::size_t);
    double (*max_abs)(const double*, std::size_t);
    void (*spmv)(const std::int32_t*, const std::int32_t*, const double*,
                 std::size_t, const double*, double*);
};

bool backend_available(Backend b);
Backend active_backend();
void set_backend(Backend b);  // throws std::runtime_error if unavailable
std::string backend_name(Backend b);

// Reductions (blocked pairwise, deterministic per backend).
double dot(const double* x, const double* y, std::size_t n);
double sum(const double* x, std::size_t n);
// sum_i w[i]*x[i]*y[i] — weighted quadrature of a product.
double dot3(const double* w, const double* x, const double* y, std::size_t n);

// Elementwise updates.
void axpy(double a, const double* x, double* y, std::size_t n);   // y += a*x
void xpay(const double* x, double a, double* y, std::size_t n);   // y = x + a*y
void add_scalar(double c, double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);

// y = A*x for CSR (row_ptr has nrows+1 entries).
void spmv(const std::int32_t* row_ptr, const std::int32_t* col, const double* val,
          std::size_t nrows, const double* x, double* y);

}  // namespace prekopa::simd
