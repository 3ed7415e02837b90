#pragma once
// Sparse symmetric linear algebra for the weak-form solver: CSR storage,
// triplet assembly, and preconditioned conjugate gradients on a singular
// consistent system (kernel = constant vectors, projected out per step).

#include <cstdint>
#include <vector>

namespace prekopa {

struct Csr {
    std::size_t n = 0;
    std::vector<std::int32_t> row_ptr;
    std::vector<std::int32_t> col;
    std::vector<double> val;

    void multiply(const double* x, double* y) const;
    std::vector<double> multiply(const std::vector<double>& x) const;
    double entry(std::size_t r, std::size_t c) const;  // 0 if absent
};

// Accumulates duplicate (r,c) entries; build sorts and compresses.
class TripletAccumulator {
public:
    explicit TripletAccumulator(std::size_t n) : n_(n) {}
    void add(std::int32_t r, std::int32_t c, double v) { trips_.push_back({r, c, v}); }
    Csr build() const;

private:
    struct Trip {
        std::int32_t r, c;
        double v;
    };
    std::size_t n_;
    std::vector<Trip> trips_;
};

struct CgResult {
    std::vector<double> x;
    std::size_t iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

// PCG with Jacobi preconditioning for symmetric positive semidefinite A whose
// kernel is spanned by the constant vector. The right-hand side must satisfy
// sum(b) = 0; the residual is re-projected onto the mean-zero subspace each
// iteration to keep rounding drift out of the kernel direction.
CgResult cg_solve_singular(const Csr& A, const std::vector<double>& b, double rel_tol,
                           std::size_t max_iter);

}  // namespace prekopa
