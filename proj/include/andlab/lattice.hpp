#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "andlab/errors.hpp"
#include "andlab/rng.hpp"

namespace andlab {

using Site = std::vector<int>;

inline std::string site_string(const Site& s) {
    std::ostringstream os;
    os << '(';
    for (std::size_t j = 0; j < s.size(); ++j) os << (j ? "," : "") << s[j];
    os << ')';
    return os.str();
}

// sup-norm distance between sites, the metric that matches box geometry
inline int linf_distance(const Site& a, const Site& b) {
    int m = 0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

inline long long default_site_cap() { return 4'000'000; }

// A finite axis-aligned box of lattice sites with a designated center.
// Boxes built by make_box are center-symmetric with odd side length 2r+1;
// the corner constructor admits general rectangles (sub-boxes, test fixtures).
// Site enumeration is lexicographic in the coordinates and therefore
// identical across runs.
class Box {
public:
    Box() = default;

    static Box centered(int d, Site center, long long side,
                        long long cap = default_site_cap()) {
        if (d < 1) throw Error("box dimension must be >= 1");
        if (side < 1) throw Error("box side length must be >= 1");
        const long long r = side / 2;  // radius floor(L/2), actual side 2r+1
        Site lo(center), hi(center);
        for (int j = 0; j < d; ++j) {
            lo[static_cast<std::size_t>(j)] -= static_cast<int>(r);
            hi[static_cast<std::size_t>(j)] += static_cast<int>(r);
        }
        return Box(d, std::move(lo), std::move(hi), std::move(center), cap);
    }

    static Box corners(int d, Site lo, Site hi, Site center,
                       long long cap = default_site_cap()) {
        return Box(d, std::move(lo), std::move(hi), std::move(center), cap);
    }

    int dim() const { return d_; }
    const Site& center() const { return center_; }
    const Site& lo() const { return lo_; }
    const Site& hi() const { return hi_; }

    // max extent over coordinates; equals 2r+1 for centered boxes
    long long side() const {
        long long s = 1;
        for (int j = 0; j < d_; ++j)
            s = std::max(s, static_cast<long long>(hi_[static_cast<std::size_t>(j)]) -
                                lo_[static_cast<std::size_t>(j)] + 1);
        return s;
    }

    // radius of a centered box: (side - 1) / 2
    long long radius() const { return (side() - 1) / 2; }

    long long size() const { return n_; }

    bool contains(const Site& y) const {
        for (int j = 0; j < d_; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            if (y[ju] < lo_[ju] || y[ju] > hi_[ju]) return false;
        }
        return true;
    }

    // lexicographic rank of a site within the box; caller must check contains()
    long long index_of(const Site& y) const {
        long long idx = 0;
        for (int j = 0; j < d_; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            idx = idx * ext_[ju] + (y[ju] - lo_[ju]);
        }
        return idx;
    }

    Site site_at(long long idx) const {
        Site y(static_cast<std::size_t>(d_));
        for (int j = d_ - 1; j >= 0; --j) {
            const auto ju = static_cast<std::size_t>(j);
            y[ju] = lo_[ju] + static_cast<int>(idx % ext_[ju]);
            idx /= ext_[ju];
        }
        return y;
    }

    long long center_index() const { return index_of(center_); }

    std::vector<Site> sites() const {
        std::vector<Site> out;
        out.reserve(static_cast<std::size_t>(n_));
        for (long long i = 0; i < n_; ++i) out.push_back(site_at(i));
        return out;
    }

    // boundary = sites with a nearest neighbor outside the box, i.e. some
    // coordinate at lo or hi; enumerated in site order
    bool is_boundary(long long idx) const {
        const Site y = site_at(idx);
        for (int j = 0; j < d_; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            if (y[ju] == lo_[ju] || y[ju] == hi_[ju]) return true;
        }
        return false;
    }

    std::vector<long long> boundary_indices() const {
        std::vector<long long> out;
        for (long long i = 0; i < n_; ++i)
            if (is_boundary(i)) out.push_back(i);
        return out;
    }

    std::vector<Site> boundary_sites() const {
        std::vector<Site> out;
        for (long long i : boundary_indices()) out.push_back(site_at(i));
        return out;
    }

private:
    Box(int d, Site lo, Site hi, Site center, long long cap)
        : d_(d), lo_(std::move(lo)), hi_(std::move(hi)), center_(std::move(center)) {
        if (static_cast<int>(lo_.size()) != d_ || static_cast<int>(hi_.size()) != d_ ||
            static_cast<int>(center_.size()) != d_)
            throw Error("box coordinate arity does not match dimension");
        n_ = 1;
        long double total = 1.0L;
        ext_.resize(static_cast<std::size_t>(d_));
        for (int j = 0; j < d_; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            if (hi_[ju] < lo_[ju]) throw Error("box has empty extent");
            ext_[ju] = static_cast<long long>(hi_[ju]) - lo_[ju] + 1;
            total *= static_cast<long double>(ext_[ju]);
            if (total > static_cast<long double>(cap))
                throw BoxTooLarge(static_cast<long long>(std::min(total, 9e18L)), cap);
            n_ *= ext_[ju];
        }
        if (!contains(center_)) throw Error("box center lies outside the box");
    }

    int d_ = 0;
    Site lo_, hi_, center_;
    std::vector<long long> ext_;
    long long n_ = 0;
};

inline Box make_box(int d, const Site& center, long long side,
                    long long cap = default_site_cap()) {
    return Box::centered(d, center, side, cap);
}

enum class DisorderLaw { uniform };

// Single-site disorder law. Only the uniform family is built in; anything with
// a bounded density fits the same slots (support endpoints, sup of density).
struct PotentialSpec {
    DisorderLaw law = DisorderLaw::uniform;
    double a = 0.0;  // support [a, b]
    double b = 1.0;
    double coupling = 1.0;  // lambda >= 0; 0 turns disorder off entirely

    double density_sup() const { return 1.0 / (b - a); }

    void validate() const {
        if (!(b > a)) throw Error("potential support requires b > a");
        if (coupling < 0.0) throw Error("coupling constant must be nonnegative");
    }
};

// An i.i.d. draw of the potential over the sites of one box. Values are
// generated in site order from a SplitMix64 stream, so (spec, seed, box)
// reproduces the realization exactly.
struct PotentialRealization {
    Box box;
    std::vector<double> values;  // aligned with box site order
    std::uint64_t seed = 0;

    double value_at(const Site& y) const {
        if (!box.contains(y)) throw IncompleteRealization(site_string(y));
        return values[static_cast<std::size_t>(box.index_of(y))];
    }
};

inline PotentialRealization sample_potential(const Box& box, const PotentialSpec& spec,
                                             std::uint64_t seed) {
    spec.validate();
    PotentialRealization r;
    r.box = box;
    r.seed = seed;
    r.values.resize(static_cast<std::size_t>(box.size()));
    Rng rng(seed);
    for (auto& v : r.values) v = rng.uniform(spec.a, spec.b);
    return r;
}

// H restricted to a box with Dirichlet truncation: hopping 1 between
// l1-adjacent sites inside the box, diagonal lambda * V(y). Stored as the
// diagonal plus the list of (i, j) hops with i < j; all hop values are 1.
struct HamiltonianMatrix {
    Box box;
    std::vector<double> diag;
    std::vector<std::pair<long long, long long>> hops;
    double coupling = 0.0;
    bool tridiagonal = false;  // d = 1 fast path marker

    long long size() const { return box.size(); }

    // y = H x
    void apply(const double* x, double* y) const {
        const std::size_t n = diag.size();
        for (std::size_t i = 0; i < n; ++i) y[i] = diag[i] * x[i];
        for (const auto& [i, j] : hops) {
            y[static_cast<std::size_t>(i)] += x[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(j)] += x[static_cast<std::size_t>(i)];
        }
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y(x.size());
        apply(x.data(), y.data());
        return y;
    }

    // column-major dense copy
    std::vector<double> dense() const {
        const auto n = static_cast<std::size_t>(size());
        std::vector<double> a(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) a[i * n + i] = diag[i];
        for (const auto& [i, j] : hops) {
            a[static_cast<std::size_t>(j) * n + static_cast<std::size_t>(i)] = 1.0;
            a[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] = 1.0;
        }
        return a;
    }
};

inline HamiltonianMatrix assemble_hamiltonian(const Box& box,
                                              const PotentialRealization& v,
                                              double coupling) {
    HamiltonianMatrix h;
    h.box = box;
    h.coupling = coupling;
    const long long n = box.size();
    h.diag.resize(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i)
        h.diag[static_cast<std::size_t>(i)] = coupling * v.value_at(box.site_at(i));
    // enumerate each hop once from the lower-index endpoint via +e_j neighbors
    for (long long i = 0; i < n; ++i) {
        Site y = box.site_at(i);
        for (int j = 0; j < box.dim(); ++j) {
            ++y[static_cast<std::size_t>(j)];
            if (box.contains(y)) {
                const long long k = box.index_of(y);
                h.hops.emplace_back(std::min(i, k), std::max(i, k));
            }
            --y[static_cast<std::size_t>(j)];
        }
    }
    std::sort(h.hops.begin(), h.hops.end());
    h.tridiagonal = box.dim() == 1;
    return h;
}

struct Interval {
    double a = 0.0;
    double b = 0.0;
    double width() const { return b - a; }
    bool contains(double e) const { return a < e && e < b; }
    bool covers(const Interval& j) const { return a <= j.a && j.b <= b; }
};

// sigma(H) support at finite coupling: [-2d, 2d] + lambda * supp(rho)
inline Interval spectrum_support(const PotentialSpec& spec, int d) {
    spec.validate();
    return {-2.0 * d + spec.coupling * spec.a, 2.0 * d + spec.coupling * spec.b};
}

// Multiscale length schedule L_k, each the smallest odd integer >= L_{k-1}^alpha.
struct ScaleSchedule {
    long long l0 = 0;
    double alpha = 0.0;
    double msa_p = 0.0;  // exponent p > 2d in the target 1 - L^-2p
    std::vector<long long> lengths;

    long long length(int k) const {
        if (k < 0 || k >= static_cast<int>(lengths.size()))
            throw Error("scale index " + std::to_string(k) + " outside schedule");
        return lengths[static_cast<std::size_t>(k)];
    }
    int max_index() const { return static_cast<int>(lengths.size()) - 1; }
};

inline ScaleSchedule scale_schedule(long long l0, double alpha, int k_max,
                                    double msa_p = 0.0) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw InvalidExponent(alpha);
    if (l0 < 3 || l0 % 2 == 0) throw Error("base length must be odd and >= 3");
    if (k_max < 1) throw Error("schedule needs k_max >= 1");
    ScaleSchedule s;
    s.l0 = l0;
    s.alpha = alpha;
    s.msa_p = msa_p;
    s.lengths.push_back(l0);
    for (int k = 1; k <= k_max; ++k) {
        const double target = std::pow(static_cast<double>(s.lengths.back()), alpha);
        if (target > 1e15)  // far past any buildable box; cast below would overflow
            throw Error("schedule scale " + std::to_string(k) + " overflows");
        auto next = static_cast<long long>(std::ceil(target - 1e-9));
        if (next % 2 == 0) ++next;
        if (next <= s.lengths.back()) next = s.lengths.back() + 2;
        s.lengths.push_back(next);
    }
    return s;
}

}  // namespace andlab
