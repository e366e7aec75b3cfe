#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "andlab/errors.hpp"
#include "andlab/lattice.hpp"
#include "andlab/spectral.hpp"

namespace andlab {

inline constexpr double kDefaultTauCenter = 1e-10;  // relative tie tolerance
inline constexpr double kDecayFitFloor = 1e-14;     // amplitudes below are log-underflow

// Sites where |phi| attains its max up to the relative tolerance, in site
// (lexicographic) order. Deliberately scale-free: X(c phi) = X(phi).
inline std::vector<Site> localization_centers(const Box& box,
                                              const std::vector<double>& phi,
                                              double tau_center = kDefaultTauCenter) {
    double peak = 0.0;
    for (double v : phi) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) throw NoCenter();
    const double cut = (1.0 - tau_center) * peak;
    std::vector<Site> centers;
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (std::abs(phi[i]) >= cut) centers.push_back(box.site_at(static_cast<long long>(i)));
    return centers;
}

// lexicographic minimum of the center set = first in site order
inline Site designated_center(const Box& box, const std::vector<double>& phi,
                              double tau_center = kDefaultTauCenter) {
    return localization_centers(box, phi, tau_center).front();
}

inline bool is_localized_in(const Box& domain, const std::vector<double>& phi,
                            const Box& target, double tau_center = kDefaultTauCenter) {
    for (const Site& x : localization_centers(domain, phi, tau_center))
        if (target.contains(x)) return true;
    return false;
}

// l2 mass of phi outside the probe box: ||(1 - chi_probe) phi||_2
inline double tail_mass(const Box& domain, const std::vector<double>& phi,
                        const Box& probe) {
    double s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (!probe.contains(domain.site_at(static_cast<long long>(i))))
            s += phi[i] * phi[i];
    }
    return std::sqrt(s);
}

struct DecayFit {
    double gamma_hat = 0.0;  // -2 * slope of log|phi| against linf distance
    double residual = 0.0;   // rms residual of the linear fit
    long long sites_used = 0;
};

// Least-squares exponential decay rate of |phi| away from the given center.
// The factor 2 puts gamma_hat on the e^{-gamma L / 2} scale used by the
// regularity threshold.
inline DecayFit decay_rate_fit(const Box& domain, const std::vector<double>& phi,
                               const Site& center) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double a = std::abs(phi[i]);
        if (a <= kDecayFitFloor) continue;
        xs.push_back(static_cast<double>(
            linf_distance(domain.site_at(static_cast<long long>(i)), center)));
        ys.push_back(std::log(a));
    }
    if (xs.size() < 3) throw InsufficientSupport(static_cast<int>(xs.size()));
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw InsufficientSupport(static_cast<int>(xs.size()));
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (slope * xs[i] + intercept);
        ss += r * r;
    }
    DecayFit f;
    f.gamma_hat = -2.0 * slope;
    f.residual = std::sqrt(ss / n);
    f.sites_used = static_cast<long long>(xs.size());
    return f;
}

// Everything recorded per retained eigenpair of an ambient-box solve.
struct LocalizationRecord {
    long long pair_index = 0;
    double energy = 0.0;
    std::vector<Site> centers;
    Site center;  // designated: lexicographic minimum
    double max_amplitude = 0.0;
    std::vector<std::pair<long long, double>> tail_masses;  // (probe side, mass)
    double gamma_hat = 0.0;
    double fit_residual = 0.0;
    bool near_degenerate = false;  // a neighboring eigenvalue within 1e-12
};

// Residual certificate comparing an ambient eigenpair against the spectrum of
// a probe-box restriction. dist(sigma(H_probe), E) <= residual_bound is the
// spectral-theorem inequality the witness asserts numerically.
struct ApproximationWitness {
    double energy = 0.0;
    Box probe;
    double tail = 0.0;            // ||(1 - chi_probe) phi||
    double spectrum_dist = 0.0;   // dist(sigma(H_probe), E)
    double residual_bound = 0.0;  // ||(H_probe - E) chi phi|| / ||chi phi||
    std::optional<double> epsilon_bound;  // C2 e^{-gamma' L / 2} when supplied

    bool holds(double slack = 1e-10) const {
        return spectrum_dist <= residual_bound + slack;
    }
};

inline ApproximationWitness finite_volume_witness(
    const Box& domain, const std::vector<double>& phi, double e,
    const HamiltonianMatrix& h_probe, const std::vector<double>& probe_eigenvalues,
    std::optional<double> epsilon_bound = std::nullopt) {
    const Box& probe = h_probe.box;
    const auto n = static_cast<std::size_t>(probe.size());
    std::vector<double> psi(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Site y = probe.site_at(static_cast<long long>(i));
        if (!domain.contains(y))
            throw Error("probe box leaves the eigenfunction domain at site " +
                        site_string(y));
        psi[i] = phi[static_cast<std::size_t>(domain.index_of(y))];
    }
    double norm2 = 0.0;
    for (double v : psi) norm2 += v * v;
    if (norm2 == 0.0) throw Error("eigenfunction lives outside probe box");
    std::vector<double> hpsi(n);
    h_probe.apply(psi.data(), hpsi.data());
    double rr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = hpsi[i] - e * psi[i];
        rr += r * r;
    }
    ApproximationWitness w;
    w.energy = e;
    w.probe = probe;
    w.tail = tail_mass(domain, phi, probe);
    w.spectrum_dist = distance_to_spectrum(probe_eigenvalues, e);
    w.residual_bound = std::sqrt(rr / norm2);
    w.epsilon_bound = epsilon_bound;
    return w;
}

}  // namespace andlab
