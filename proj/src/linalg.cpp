#include "prekopa/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prekopa/simd/kernels.hpp"

namespace prekopa {

void Csr::multiply(const double* x, double* y) const {
    simd::spmv(row_ptr.data(), col.data(), val.data(), n, x, y);
}

std::vector<double> Csr::multiply(const std::vector<double>& x) const {
    std::vector<double> y(n);
    multiply(x.data(), y.data());
    return y;
}

double Csr::entry(std::size_t r, std::size_t c) const {
    for (std::int32_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
        if (col[k] == static_cast<std::int32_t>(c)) return val[k];
    return 0.0;
}

Csr TripletAccumulator::build() const {
    std::vector<Trip> t = trips_;
    std::sort(t.begin(), t.end(), [](const Trip& a, const Trip& b) {
        return a.r != b.r ? a.r < b.r : a.c < b.c;
    });
    Csr m;
    m.n = n_;
    m.row_ptr.assign(n_ + 1, 0);
    std::size_t i = 0;
    while (i < t.size()) {
        std::size_t j = i;
        double v = 0.0;
        while (j < t.size() && t[j].r == t[i].r && t[j].c == t[i].c) v += t[j++].v;
        m.col.push_back(t[i].c);
        m.val.push_back(v);
        ++m.row_ptr[t[i].r + 1];
        i = j;
    }
    for (std::size_t r = 0; r < n_; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
    return m;
}

namespace {

void remove_mean(std::vector<double>& v) {
    double m = simd::sum(v.data(), v.size()) / static_cast<double>(v.size());
    simd::add_scalar(-m, v.data(), v.size());
}

}  // namespace

CgResult cg_solve_singular(const Csr& A, const std::vector<double>& b, double rel_tol,
                           std::size_t max_iter) {
    const std::size_t n = A.n;
    if (b.size() != n) throw std::invalid_argument("cg_solve_singular: size mismatch");

    std::vector<double> diag(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        double d = A.entry(r, r);
        if (!(d > 0.0)) throw std::runtime_error("cg_solve_singular: non-positive diagonal");
        diag[r] = d;
    }

    CgResult res;
    res.x.assign(n, 0.0);
    std::vector<double> r = b;
    remove_mean(r);
    double bnorm = std::sqrt(simd::dot(b.data(), b.data(), n));
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }

    std::vector<double> z(n), p(n), Ap(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = simd::dot(r.data(), z.data(), n);

    const double tol = rel_tol * bnorm;
    for (std::size_t it = 0; it < max_iter; ++it) {
        A.multiply(p.data(), Ap.data());
        double pAp = simd::dot(p.data(), Ap.data(), n);
        if (!(pAp > 0.0)) {
            // Search direction fell into the kernel; strip it and retry.
            remove_mean(p);
            A.multiply(p.data(), Ap.data());
            pAp = simd::dot(p.data(), Ap.data(), n);
            if (!(pAp > 0.0)) break;
        }
        double alpha = rz / pAp;
        simd::axpy(alpha, p.data(), res.x.data(), n);
        simd::axpy(-alpha, Ap.data(), r.data(), n);
        remove_mean(r);
        double rnorm = std::sqrt(simd::dot(r.data(), r.data(), n));
        res.iterations = it + 1;
        if (rnorm <= tol) {
            // Confirm against the true residual before declaring convergence.
            A.multiply(res.x.data(), Ap.data());
            for (std::size_t i = 0; i < n; ++i) Ap[i] = b[i] - Ap[i];
            remove_mean(Ap);
            double truenorm = std::sqrt(simd::dot(Ap.data(), Ap.data(), n));
            res.rel_residual = truenorm / bnorm;
            if (res.rel_residual <= rel_tol) {
                res.converged = true;
                return res;
            }
            r = Ap;
            rnorm = truenorm;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        double rz_new = simd::dot(r.data(), z.data(), n);
        simd::xpay(z.data(), rz_new / rz, p.data(), n);
        rz = rz_new;
        res.rel_residual = rnorm / bnorm;
    }
    return res;
}

}  // namespace prekopa
