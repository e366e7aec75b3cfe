// Independent numerical oracles for the test suite. Everything here avoids
// the library's LAPACK-backed paths on purpose: characteristic-polynomial
// bisection and cyclic Jacobi rotations for eigenvalues, Gauss-Jordan for
// dense inverses. Slow and simple beats fast and shared.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

// det(A - x I) via LU with partial pivoting on a scratch copy.
inline double charpoly_at(const std::vector<double>& a, int n, double x) {
    std::vector<double> m(a);
    for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i * n + i)] -= x;
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(m[static_cast<std::size_t>(c * n + r)]) >
                std::abs(m[static_cast<std::size_t>(c * n + piv)]))
                piv = r;
        if (m[static_cast<std::size_t>(c * n + piv)] == 0.0) return 0.0;
        if (piv != c) {
            det = -det;
            for (int cc = 0; cc < n; ++cc)
                std::swap(m[static_cast<std::size_t>(cc * n + piv)],
                          m[static_cast<std::size_t>(cc * n + c)]);
        }
        const double d = m[static_cast<std::size_t>(c * n + c)];
        det *= d;
        for (int r = c + 1; r < n; ++r) {
            const double f = m[static_cast<std::size_t>(c * n + r)] / d;
            for (int cc = c; cc < n; ++cc)
                m[static_cast<std::size_t>(cc * n + r)] -=
                    f * m[static_cast<std::size_t>(cc * n + c)];
        }
    }
    return det;
}

// All real roots of det(A - x I) for a symmetric matrix with simple,
// well-separated spectrum: scan a Gershgorin bracket for sign changes, then
// bisect each bracket down to tol. Throws if the scan does not isolate
// exactly n roots, so a degenerate input fails loudly instead of silently.
inline std::vector<double> charpoly_eigenvalues(const std::vector<double>& a, int n,
                                                double tol = 1e-12) {
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < n; ++i) {
        double radius = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) radius += std::abs(a[static_cast<std::size_t>(j * n + i)]);
        const double c = a[static_cast<std::size_t>(i * n + i)];
        lo = std::min(lo, c - radius);
        hi = std::max(hi, c + radius);
    }
    lo -= 1e-6;
    hi += 1e-6;
    const int grid = 1 << 14;
    std::vector<double> roots;
    double x0 = lo, f0 = charpoly_at(a, n, x0);
    for (int g = 1; g <= grid; ++g) {
        const double x1 = lo + (hi - lo) * g / grid;
        const double f1 = charpoly_at(a, n, x1);
        if ((f0 < 0.0 && f1 > 0.0) || (f0 > 0.0 && f1 < 0.0)) {
            double xa = x0, xb = x1, fa = f0;
            while (xb - xa > tol) {
                const double xm = 0.5 * (xa + xb);
                const double fm = charpoly_at(a, n, xm);
                if ((fa < 0.0) == (fm < 0.0)) {
                    xa = xm;
                    fa = fm;
                } else {
                    xb = xm;
                }
            }
            roots.push_back(0.5 * (xa + xb));
        } else if (f1 == 0.0) {
            roots.push_back(x1);
        }
        x0 = x1;
        f0 = f1;
    }
    if (static_cast<int>(roots.size()) != n)
        throw std::runtime_error("charpoly oracle isolated " +
                                 std::to_string(roots.size()) + " of " +
                                 std::to_string(n) + " roots");
    std::sort(roots.begin(), roots.end());
    return roots;
}

// Cyclic Jacobi rotations on a dense symmetric matrix; returns the sorted
// spectrum. Classic textbook loop, no LAPACK anywhere near it.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a, int n,
                                              int max_sweeps = 64) {
    auto at = [&](int r, int c) -> double& {
        return a[static_cast<std::size_t>(c * n + r)];
    };
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int r = 0; r < n; ++r)
            for (int c = r + 1; c < n; ++c) off += at(r, c) * at(r, c);
        if (std::sqrt(off) < 1e-15 * (1.0 + std::sqrt(off + 1.0))) break;
        if (off == 0.0) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (apq == 0.0) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = at(i, i);
    std::sort(w.begin(), w.end());
    return w;
}

// Gauss-Jordan inverse with partial pivoting; column-major in and out.
inline std::vector<double> dense_inverse(std::vector<double> a, int n) {
    std::vector<double> inv(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i * n + i)] = 1.0;
    auto A = [&](int r, int c) -> double& {
        return a[static_cast<std::size_t>(c * n + r)];
    };
    auto B = [&](int r, int c) -> double& {
        return inv[static_cast<std::size_t>(c * n + r)];
    };
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A(r, col)) > std::abs(A(piv, col))) piv = r;
        if (A(piv, col) == 0.0) throw std::runtime_error("oracle inverse: singular");
        if (piv != col)
            for (int c = 0; c < n; ++c) {
                std::swap(A(piv, c), A(col, c));
                std::swap(B(piv, c), B(col, c));
            }
        const double d = A(col, col);
        for (int c = 0; c < n; ++c) {
            A(col, c) /= d;
            B(col, c) /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = A(r, col);
            if (f == 0.0) continue;
            for (int c = 0; c < n; ++c) {
                A(r, c) -= f * A(col, c);
                B(r, c) -= f * B(col, c);
            }
        }
    }
    return inv;
}

}  // namespace oracle
