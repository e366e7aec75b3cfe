#pragma once

// Thin wrappers around the LAPACK symmetric eigensolvers and LU solves used
// everywhere else. Single-threaded BLAS is forced on first use so results do
// not depend on the host's thread configuration.

#include <cblas.h>
#include <lapacke.h>

#include <cmath>
#include <mutex>
#include <vector>

#include "andlab/errors.hpp"

namespace andlab {
namespace linalg {

inline void pin_blas_threads() {
    static std::once_flag flag;
    std::call_once(flag, [] { openblas_set_num_threads(1); });
}

// Full spectrum of a symmetric tridiagonal matrix, ascending. Eigenvectors
// (column-major, n x n) are filled when z != nullptr.
inline void tridiag_eigen(std::vector<double> diag, std::vector<double> sub,
                          std::vector<double>& w, double* z) {
    pin_blas_threads();
    const auto n = static_cast<lapack_int>(diag.size());
    lapack_int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, z ? 'V' : 'N', n, diag.data(),
                                     sub.data(), z, n > 0 ? n : 1);
    if (info != 0) throw SolverFailure("tridiagonal eigensolver did not converge",
                                       static_cast<int>(info));
    w = std::move(diag);
}

// Full spectrum of a dense symmetric matrix (column-major input, destroyed).
// On 'V' the input is overwritten with the eigenvectors.
inline void dense_eigen(std::vector<double>& a, lapack_int n, std::vector<double>& w,
                        bool vectors) {
    pin_blas_threads();
    w.resize(static_cast<std::size_t>(n));
    lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', n,
                                     a.data(), n > 0 ? n : 1, w.data());
    if (info != 0) throw SolverFailure("dense symmetric eigensolver did not converge",
                                       static_cast<int>(info));
}

// Eigenpairs with eigenvalue in (vl, vu] of a symmetric tridiagonal matrix.
inline lapack_int tridiag_eigen_range(std::vector<double> diag, std::vector<double> sub,
                                      double vl, double vu, std::vector<double>& w,
                                      std::vector<double>& z) {
    pin_blas_threads();
    const auto n = static_cast<lapack_int>(diag.size());
    w.assign(static_cast<std::size_t>(n), 0.0);
    z.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n > 0 ? n : 1));
    lapack_int m = 0;
    lapack_int info =
        LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'V', n, diag.data(), sub.data(), vl, vu, 0,
                       0, 0.0, &m, w.data(), z.data(), n > 0 ? n : 1, isuppz.data());
    if (info != 0)
        throw SolverFailure("tridiagonal range eigensolver failed", static_cast<int>(info));
    return m;
}

inline lapack_int dense_eigen_range(std::vector<double> a, lapack_int n, double vl,
                                    double vu, std::vector<double>& w,
                                    std::vector<double>& z) {
    pin_blas_threads();
    w.assign(static_cast<std::size_t>(n), 0.0);
    z.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n > 0 ? n : 1));
    lapack_int m = 0;
    lapack_int info =
        LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'V', 'L', n, a.data(), n > 0 ? n : 1, vl,
                       vu, 0, 0, 0.0, &m, w.data(), z.data(), n > 0 ? n : 1, isuppz.data());
    if (info != 0)
        throw SolverFailure("dense range eigensolver failed", static_cast<int>(info));
    return m;
}

// LU factorization of a dense column-major matrix, kept for repeated solves.
class LuFactor {
public:
    LuFactor(std::vector<double> a, lapack_int n) : a_(std::move(a)), n_(n), ipiv_(static_cast<std::size_t>(n)) {
        pin_blas_threads();
        lapack_int info =
            LAPACKE_dgetrf(LAPACK_COL_MAJOR, n_, n_, a_.data(), n_ > 0 ? n_ : 1, ipiv_.data());
        if (info != 0)
            throw SolverFailure("LU factorization hit a zero pivot", static_cast<int>(info));
    }

    void solve_in_place(std::vector<double>& rhs) const {
        lapack_int info = LAPACKE_dgetrs(LAPACK_COL_MAJOR, 'N', n_, 1, a_.data(),
                                         n_ > 0 ? n_ : 1, ipiv_.data(), rhs.data(),
                                         n_ > 0 ? n_ : 1);
        if (info != 0) throw SolverFailure("LU solve failed", static_cast<int>(info));
    }

private:
    std::vector<double> a_;
    lapack_int n_;
    std::vector<lapack_int> ipiv_;
};

// Solve T u = rhs for T = tridiag(1, diag, 1), overwriting rhs.
inline void tridiag_solve(const std::vector<double>& diag, std::vector<double>& rhs) {
    pin_blas_threads();
    const auto n = static_cast<lapack_int>(diag.size());
    std::vector<double> d(diag);
    std::vector<double> dl(diag.size() > 1 ? diag.size() - 1 : 1, 1.0);
    std::vector<double> du(dl);
    lapack_int info = LAPACKE_dgtsv(LAPACK_COL_MAJOR, n, 1, dl.data(), d.data(), du.data(),
                                    rhs.data(), n > 0 ? n : 1);
    if (info != 0)
        throw SolverFailure("tridiagonal solve hit a zero pivot", static_cast<int>(info));
}

// max |(V^T V - I)_{ij}| for column-major V (n x m)
inline double gram_deviation(const double* v, lapack_int n, lapack_int m) {
    pin_blas_threads();
    std::vector<double> g(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
    cblas_dgemm(CblasColMajor, CblasTrans, CblasNoTrans, m, m, n, 1.0, v, n, v, n, 0.0,
                g.data(), m);
    double dev = 0.0;
    for (lapack_int j = 0; j < m; ++j)
        for (lapack_int i = 0; i < m; ++i) {
            const double target = i == j ? 1.0 : 0.0;
            dev = std::max(dev, std::abs(g[static_cast<std::size_t>(j) * m + i] - target));
        }
    return dev;
}

}  // namespace linalg
}  // namespace andlab
