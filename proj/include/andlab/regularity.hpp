#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "andlab/errors.hpp"
#include "andlab/lattice.hpp"
#include "andlab/spectral.hpp"

namespace andlab {

inline constexpr double kDefaultGamma = 0.5;
inline constexpr double kDefaultGammaPrime = 0.25;
inline constexpr double kDefaultC1 = 1.0;
inline constexpr double kDefaultC2 = 1.0;

// eps_L = C2 e^{-gamma' L / 2}, the energy slack a scale-L box resolves
struct EpsilonScale {
    double c2 = kDefaultC2;
    double gamma_prime = kDefaultGammaPrime;

    double value(long long length) const {
        return c2 * std::exp(-gamma_prime * static_cast<double>(length) / 2.0);
    }
};

inline double epsilon_of_scale(long long length, double gamma_prime = kDefaultGammaPrime,
                               double c2 = kDefaultC2) {
    return EpsilonScale{c2, gamma_prime}.value(length);
}

enum class RegularityFailure { none, spectrum_hit, boundary_too_large };

inline const char* to_string(RegularityFailure f) {
    switch (f) {
        case RegularityFailure::none: return "none";
        case RegularityFailure::spectrum_hit: return "spectrum-hit";
        case RegularityFailure::boundary_too_large: return "boundary-too-large";
    }
    return "none";
}

struct RegularityVerdict {
    bool regular = false;
    RegularityFailure failure = RegularityFailure::none;
    double max_boundary_green = 0.0;  // 0 when the resolvent was never formed
    double threshold = 0.0;           // e^{-gamma L / 2}
    double dist_to_spectrum = 0.0;
};

// A box is (gamma, E)-regular when E clears the spectral gate and every
// boundary Green's function element sits under e^{-gamma L / 2}. The center
// site is the box center.
inline RegularityVerdict check_regular(const HamiltonianMatrix& h, double e,
                                       double gamma = kDefaultGamma,
                                       double tau_rel = kDefaultTauSpec,
                                       const std::vector<double>* eigs = nullptr) {
    RegularityVerdict v;
    v.threshold = std::exp(-gamma * static_cast<double>(h.box.side()) / 2.0);
    std::vector<GreensValue> g;
    try {
        g = greens_to_boundary(h, e, h.box.center(), tau_rel, eigs);
    } catch (const ResolventSingular& rs) {
        v.failure = RegularityFailure::spectrum_hit;
        v.dist_to_spectrum = rs.spectrum_distance;
        return v;
    }
    double worst = 0.0;
    for (const GreensValue& gv : g) worst = std::max(worst, std::abs(gv.value));
    v.max_boundary_green = worst;
    v.dist_to_spectrum = g.empty() ? 0.0 : g.front().dist_to_spectrum;
    if (worst <= v.threshold) {
        v.regular = true;
    } else {
        v.failure = RegularityFailure::boundary_too_large;
    }
    return v;
}

// Evenly spaced midpoint grid over the interval; endpoints are excluded so the
// grid never lands on the deterministic spectral edges.
inline std::vector<double> energy_grid(const Interval& interval, int points) {
    if (points < 1) throw Error("energy grid needs at least one point");
    std::vector<double> g(static_cast<std::size_t>(points));
    const double h = interval.width() / static_cast<double>(points);
    for (int i = 0; i < points; ++i)
        g[static_cast<std::size_t>(i)] = interval.a + (static_cast<double>(i) + 0.5) * h;
    return g;
}

// One realization of the multiscale event at scale L: for every grid energy at
// least one of the two boxes is (gamma, E)-regular. The two restrictions must
// be disjoint, which the separation |x - y|_inf > L guarantees for side-L
// boxes around x and y.
inline bool msa_event_holds(const HamiltonianMatrix& h_x, const HamiltonianMatrix& h_y,
                            const std::vector<double>& energies,
                            double gamma = kDefaultGamma,
                            double tau_rel = kDefaultTauSpec) {
    if (h_x.box.dim() != h_y.box.dim())
        throw Error("msa event boxes must share a dimension");
    const long long sep = linf_distance(h_x.box.center(), h_y.box.center());
    const long long l = std::max(h_x.box.side(), h_y.box.side());
    if (sep <= l)
        throw Error("msa event needs |x - y|_inf > L, got separation " +
                    std::to_string(sep) + " at scale " + std::to_string(l));
    const std::vector<double> wx = eigenvalues_of(h_x);
    const std::vector<double> wy = eigenvalues_of(h_y);
    for (double e : energies) {
        if (check_regular(h_x, e, gamma, tau_rel, &wx).regular) continue;
        if (check_regular(h_y, e, gamma, tau_rel, &wy).regular) continue;
        return false;
    }
    return true;
}

// target success probability 1 - L^{-2p} at scale L
inline double msa_target(long long length, double msa_p) {
    return 1.0 - std::pow(static_cast<double>(length), -2.0 * msa_p);
}

}  // namespace andlab
