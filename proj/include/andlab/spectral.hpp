#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "andlab/errors.hpp"
#include "andlab/lattice.hpp"
#include "andlab/linalg.hpp"

namespace andlab {

inline constexpr double kDefaultTauSpec = 1e-12;  // relative gate for E off sigma(H)

// Full eigendecomposition of one finite-volume Hamiltonian. Eigenvalues are
// ascending with multiplicity; vectors (when present) are the matching
// orthonormal columns; residuals are ||H phi_j - E_j phi_j||_2 computed with
// the sparse apply, independent of the backend that produced the pairs.
struct SpectralData {
    std::vector<double> eigenvalues;
    std::vector<double> vectors;  // column-major n x n; empty for values-only
    std::vector<double> residuals;
    long long n = 0;
    bool has_vectors = false;

    const double* vector(long long j) const {
        return vectors.data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(n);
    }

    double spectral_radius() const {
        if (eigenvalues.empty()) return 0.0;
        return std::max(std::abs(eigenvalues.front()), std::abs(eigenvalues.back()));
    }

    double min_gap() const {
        if (n < 2) return std::numeric_limits<double>::infinity();
        double g = std::numeric_limits<double>::infinity();
        for (std::size_t j = 1; j < eigenvalues.size(); ++j)
            g = std::min(g, eigenvalues[j] - eigenvalues[j - 1]);
        return g;
    }

    double max_residual() const {
        double r = 0.0;
        for (double v : residuals) r = std::max(r, v);
        return r;
    }
};

namespace detail {

inline std::vector<double> tridiag_sub(const HamiltonianMatrix& h) {
    // d = 1 boxes enumerate consecutive sites, so every hop is (i, i+1);
    // padded to length >= 1 so single-site boxes never hand LAPACK a null array
    return std::vector<double>(h.diag.size() > 1 ? h.diag.size() - 1 : 1, 1.0);
}

inline double pair_residual(const HamiltonianMatrix& h, double e, const double* phi) {
    const auto n = static_cast<std::size_t>(h.size());
    std::vector<double> y(n);
    h.apply(phi, y.data());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - e * phi[i];
        s += r * r;
    }
    return std::sqrt(s);
}

}  // namespace detail

inline std::vector<double> eigenvalues_of(const HamiltonianMatrix& h) {
    std::vector<double> w;
    if (h.tridiagonal) {
        linalg::tridiag_eigen(h.diag, detail::tridiag_sub(h), w, nullptr);
    } else {
        std::vector<double> a = h.dense();
        linalg::dense_eigen(a, static_cast<lapack_int>(h.size()), w, false);
    }
    return w;
}

inline SpectralData eigendecompose(const HamiltonianMatrix& h, bool vectors = true) {
    SpectralData s;
    s.n = h.size();
    s.has_vectors = vectors;
    if (!vectors) {
        s.eigenvalues = eigenvalues_of(h);
        return s;
    }
    if (h.tridiagonal) {
        s.vectors.assign(static_cast<std::size_t>(s.n) * static_cast<std::size_t>(s.n), 0.0);
        linalg::tridiag_eigen(h.diag, detail::tridiag_sub(h), s.eigenvalues,
                              s.vectors.data());
    } else {
        s.vectors = h.dense();
        linalg::dense_eigen(s.vectors, static_cast<lapack_int>(s.n), s.eigenvalues, true);
    }
    s.residuals.resize(static_cast<std::size_t>(s.n));
    for (long long j = 0; j < s.n; ++j)
        s.residuals[static_cast<std::size_t>(j)] =
            detail::pair_residual(h, s.eigenvalues[static_cast<std::size_t>(j)], s.vector(j));
    return s;
}

struct Eigenpair {
    double value = 0.0;
    std::vector<double> vector;
    double residual = 0.0;
};

// Eigenpairs with eigenvalue strictly inside j, cheaper than a full solve when
// the window holds few states.
inline std::vector<Eigenpair> eigenpairs_in_interval(const HamiltonianMatrix& h,
                                                     const Interval& j) {
    std::vector<double> w, z;
    lapack_int m = 0;
    const auto n = static_cast<std::size_t>(h.size());
    if (h.tridiagonal) {
        m = linalg::tridiag_eigen_range(h.diag, detail::tridiag_sub(h), j.a, j.b, w, z);
    } else {
        m = linalg::dense_eigen_range(h.dense(), static_cast<lapack_int>(h.size()), j.a,
                                      j.b, w, z);
    }
    std::vector<Eigenpair> out;
    for (lapack_int i = 0; i < m; ++i) {
        if (!j.contains(w[static_cast<std::size_t>(i)])) continue;  // backend range is (a, b]
        Eigenpair p;
        p.value = w[static_cast<std::size_t>(i)];
        p.vector.assign(z.begin() + static_cast<long>(i) * static_cast<long>(n),
                        z.begin() + (static_cast<long>(i) + 1) * static_cast<long>(n));
        p.residual = detail::pair_residual(h, p.value, p.vector.data());
        out.push_back(std::move(p));
    }
    return out;
}

// number of eigenvalues strictly inside the open interval, multiplicity counted
inline long long count_in_interval(const std::vector<double>& sorted_eigs,
                                   const Interval& j) {
    auto lo = std::upper_bound(sorted_eigs.begin(), sorted_eigs.end(), j.a);
    auto hi = std::lower_bound(sorted_eigs.begin(), sorted_eigs.end(), j.b);
    return hi > lo ? hi - lo : 0;
}

inline long long count_in_interval(const SpectralData& s, const Interval& j) {
    return count_in_interval(s.eigenvalues, j);
}

inline double min_gap(const SpectralData& s) { return s.min_gap(); }

inline double distance_to_spectrum(const std::vector<double>& sorted_eigs, double e) {
    if (sorted_eigs.empty()) return std::numeric_limits<double>::infinity();
    auto it = std::lower_bound(sorted_eigs.begin(), sorted_eigs.end(), e);
    double d = std::numeric_limits<double>::infinity();
    if (it != sorted_eigs.end()) d = std::min(d, std::abs(*it - e));
    if (it != sorted_eigs.begin()) d = std::min(d, std::abs(*(it - 1) - e));
    return d;
}

struct GreensValue {
    double energy = 0.0;
    Site source;  // x
    Site target;  // y
    double value = 0.0;
    double dist_to_spectrum = 0.0;
};

namespace detail {

// Solve (H - E) u = delta_idx by LU with one refinement pass. The refinement
// keeps the residual near machine level even when E sits close to the
// spectrum, which the regularity checks probe deliberately.
inline std::vector<double> resolvent_column(const HamiltonianMatrix& h, double e,
                                            long long idx) {
    const auto n = static_cast<std::size_t>(h.size());
    std::vector<double> rhs(n, 0.0);
    rhs[static_cast<std::size_t>(idx)] = 1.0;
    std::vector<double> u = rhs;
    std::vector<double> shifted(h.diag);
    for (double& v : shifted) v -= e;
    if (h.tridiagonal) {
        linalg::tridiag_solve(shifted, u);
        std::vector<double> r(n);
        h.apply(u.data(), r.data());
        for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - (r[i] - e * u[i]);
        linalg::tridiag_solve(shifted, r);
        for (std::size_t i = 0; i < n; ++i) u[i] += r[i];
        return u;
    }
    std::vector<double> a = h.dense();
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] -= e;
    linalg::LuFactor lu(std::move(a), static_cast<lapack_int>(h.size()));
    lu.solve_in_place(u);
    // one step of iterative refinement: u += (H-E)^-1 (rhs - (H-E) u)
    std::vector<double> r(n);
    h.apply(u.data(), r.data());
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - (r[i] - e * u[i]);
    lu.solve_in_place(r);
    for (std::size_t i = 0; i < n; ++i) u[i] += r[i];
    return u;
}

// Gate shared by the resolvent entry points: E must keep a relative distance
// tau_rel * spectral_radius from sigma(H).
inline double resolvent_gate(const std::vector<double>& eigs, double e, double tau_rel) {
    const double dist = distance_to_spectrum(eigs, e);
    const double radius =
        eigs.empty() ? 0.0 : std::max(std::abs(eigs.front()), std::abs(eigs.back()));
    if (dist <= tau_rel * radius || dist == 0.0) throw ResolventSingular(dist);
    return dist;
}

}  // namespace detail

// G(E; x, y) via the linear system (H - E) u = delta_y, reading off u(x).
// Pass precomputed eigenvalues to skip the values-only solve.
inline GreensValue greens_element(const HamiltonianMatrix& h, double e, const Site& x,
                                  const Site& y, double tau_rel = kDefaultTauSpec,
                                  const std::vector<double>* eigs = nullptr) {
    std::vector<double> own;
    if (!eigs) {
        own = eigenvalues_of(h);
        eigs = &own;
    }
    const double dist = detail::resolvent_gate(*eigs, e, tau_rel);
    const std::vector<double> u = detail::resolvent_column(h, e, h.box.index_of(y));
    GreensValue g;
    g.energy = e;
    g.source = x;
    g.target = y;
    g.value = u[static_cast<std::size_t>(h.box.index_of(x))];
    g.dist_to_spectrum = dist;
    return g;
}

// All G(E; x, y) for y on the box boundary from a single factorization:
// one solve with right-hand side delta_x, read at the boundary (G is
// symmetric for real E and symmetric H).
inline std::vector<GreensValue> greens_to_boundary(const HamiltonianMatrix& h, double e,
                                                   const Site& x,
                                                   double tau_rel = kDefaultTauSpec,
                                                   const std::vector<double>* eigs = nullptr) {
    std::vector<double> own;
    if (!eigs) {
        own = eigenvalues_of(h);
        eigs = &own;
    }
    const double dist = detail::resolvent_gate(*eigs, e, tau_rel);
    const std::vector<double> u = detail::resolvent_column(h, e, h.box.index_of(x));
    std::vector<GreensValue> out;
    for (long long b : h.box.boundary_indices()) {
        GreensValue g;
        g.energy = e;
        g.source = x;
        g.target = h.box.site_at(b);
        g.value = u[static_cast<std::size_t>(b)];
        g.dist_to_spectrum = dist;
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace andlab
