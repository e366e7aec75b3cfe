#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "andlab/errors.hpp"
#include "andlab/lattice.hpp"
#include "andlab/localization.hpp"
#include "andlab/parallel.hpp"
#include "andlab/regularity.hpp"
#include "andlab/rng.hpp"
#include "andlab/spectral.hpp"
#include "andlab/stats.hpp"

namespace andlab {

inline constexpr long long kMinEnsemble = 100;
inline constexpr double kBoundSlackSe = 4.0;     // p_hat - 4 SE <= bound
inline constexpr double kNearDegenerateGap = 1e-12;
inline constexpr int kDefaultSpacingWindows = 8;
inline constexpr int kDefaultHistogramBins = 40;
inline constexpr long long kMinSpacings = 10000;

struct StatsSummary {
    std::string experiment;
    std::string bound_name;  // empty when the experiment carries no bound
    int scale_index = -1;    // k for per-scale experiments
    long long scale_length = 0;
    long long box_sites = 0;
    double coupling = 0.0;
    Interval window{0.0, 0.0};  // J or I
    long long trials = 0;
    long long hits = 0;
    double p_hat = 0.0;
    double se = 0.0;
    WilsonInterval wilson{};
    double bound_raw = 0.0;
    double bound = 0.0;  // reporting value, capped at 1
    bool bound_capped = false;
    bool bound_informative = false;  // raw <= 1, so the check has content
    bool bound_satisfied = true;     // p_hat - 4 SE <= capped bound
    std::vector<std::string> warnings;
};

inline StatsSummary summarize_event(const std::string& experiment,
                                    const std::string& bound_name, long long hits,
                                    long long trials, double bound_raw) {
    if (trials < 1) throw Error("summary needs at least one trial");
    StatsSummary s;
    s.experiment = experiment;
    s.bound_name = bound_name;
    s.trials = trials;
    s.hits = hits;
    s.p_hat = static_cast<double>(hits) / static_cast<double>(trials);
    s.se = standard_error(hits, trials);
    s.wilson = wilson95(hits, trials);
    s.bound_raw = bound_raw;
    s.bound = std::min(1.0, bound_raw);
    s.bound_capped = bound_raw > 1.0;
    s.bound_informative = !bound_name.empty() && bound_raw <= 1.0;
    s.bound_satisfied =
        bound_name.empty() || (s.p_hat - kBoundSlackSe * s.se <= s.bound);
    return s;
}

// ---------------------------------------------------------------------------
// Eigenvalue counting ensemble shared by the Wegner and Minami experiments.
// The same counts serve both events, so both estimates ride one set of solves.

struct CountEnsemble {
    Box box;
    PotentialSpec spec;
    Interval window{0.0, 0.0};
    std::uint64_t master_seed = 0;
    std::vector<int> counts;  // indexed by trial

    long long events_at_least(int threshold) const {
        long long h = 0;
        for (int c : counts)
            if (c >= threshold) ++h;
        return h;
    }
};

// One trial of the counting ensemble; also the unit the runner streams.
inline int window_count_trial(const Box& box, const PotentialSpec& spec,
                              const Interval& j, long long trial,
                              std::uint64_t master_seed) {
    const PotentialRealization v = sample_potential(box, spec, trial_seed(master_seed, trial));
    const HamiltonianMatrix h = assemble_hamiltonian(box, v, spec.coupling);
    return static_cast<int>(count_in_interval(eigenvalues_of(h), j));
}

inline CountEnsemble count_eigenvalues_in(const Box& box, const PotentialSpec& spec,
                                          const Interval& j, long long trials,
                                          std::uint64_t seed, int workers = 1) {
    spec.validate();
    if (trials < 1) throw Error("ensemble needs at least one trial");
    CountEnsemble e;
    e.box = box;
    e.spec = spec;
    e.window = j;
    e.master_seed = seed;
    e.counts.resize(static_cast<std::size_t>(trials));
    run_indexed(trials, workers, [&](long long i) {
        e.counts[static_cast<std::size_t>(i)] = window_count_trial(box, spec, j, i, seed);
    });
    return e;
}

inline void require_powered(long long trials, bool force) {
    if (trials < kMinEnsemble && !force) throw UnderpoweredEnsemble(trials);
}

inline void warn_support(StatsSummary& s, const PotentialSpec& spec, int d,
                         const Interval& j) {
    if (!spectrum_support(spec, d).covers(j))
        s.warnings.push_back("window leaves the spectrum support; expect p = 0 tails");
}

// P(at least one eigenvalue in J) against rho_sup |box| |J|
inline StatsSummary wegner_from_counts(const CountEnsemble& e) {
    const double raw = e.spec.density_sup() * static_cast<double>(e.box.size()) *
                       e.window.width();
    StatsSummary s = summarize_event("wegner", "wegner",
                                     e.events_at_least(1),
                                     static_cast<long long>(e.counts.size()), raw);
    s.box_sites = e.box.size();
    s.coupling = e.spec.coupling;
    s.window = e.window;
    warn_support(s, e.spec, e.box.dim(), e.window);
    return s;
}

// P(at least two eigenvalues in J) against pi^2 rho_sup^2 |box|^2 |J|^2
inline StatsSummary minami_from_counts(const CountEnsemble& e) {
    const double lin = e.spec.density_sup() * static_cast<double>(e.box.size()) *
                       e.window.width();
    const double raw = std::numbers::pi * std::numbers::pi * lin * lin;
    StatsSummary s = summarize_event("minami", "minami",
                                     e.events_at_least(2),
                                     static_cast<long long>(e.counts.size()), raw);
    s.box_sites = e.box.size();
    s.coupling = e.spec.coupling;
    s.window = e.window;
    warn_support(s, e.spec, e.box.dim(), e.window);
    return s;
}

inline StatsSummary run_wegner(const Box& box, const PotentialSpec& spec,
                               const Interval& j, long long trials,
                               std::uint64_t seed, int workers = 1,
                               bool force = false) {
    require_powered(trials, force);
    return wegner_from_counts(count_eigenvalues_in(box, spec, j, trials, seed, workers));
}

inline StatsSummary run_minami(const Box& box, const PotentialSpec& spec,
                               const Interval& j, long long trials,
                               std::uint64_t seed, int workers = 1,
                               bool force = false) {
    require_powered(trials, force);
    return minami_from_counts(count_eigenvalues_in(box, spec, j, trials, seed, workers));
}

// ---------------------------------------------------------------------------
// Half-overlapping interval cover: elements of width 2d whose left ends step
// by d, so the left end of J(i+1) is the midpoint of J(i) and any subinterval
// of width <= d fits inside some element.

struct IntervalCover {
    Interval host{0.0, 0.0};
    double d = 0.0;
    std::vector<double> lefts;  // element i (1-based) spans [lefts[i-1], +2d]
    bool degenerate = false;    // d >= |host|: single element overshoots

    long long size() const { return static_cast<long long>(lefts.size()); }

    Interval element(long long i) const {  // 1-based, matching the construction
        const double l = lefts.at(static_cast<std::size_t>(i - 1));
        return {l, l + 2.0 * d};
    }

    // Smallest element fully containing [sub.a, sub.b] (closed), or 0.
    long long locate(const Interval& sub) const {
        long long i = static_cast<long long>(
                          std::floor((sub.a - host.a) / d)) + 1;
        i = std::max<long long>(1, std::min(i, size()));
        for (long long c : {i, i - 1}) {
            if (c < 1 || c > size()) continue;
            const Interval e = element(c);
            if (e.a <= sub.a && sub.b <= e.b) return c;
        }
        return 0;
    }

    bool pair_covered(double e1, double e2) const {
        if (e2 < e1) std::swap(e1, e2);
        return locate(Interval{e1, e2}) != 0;
    }
};

inline IntervalCover cover_intervals(const Interval& host, double d) {
    if (host.width() <= 0.0) throw Error("cover host interval must have positive width");
    if (d <= 0.0) throw Error("cover width parameter must be positive");
    IntervalCover c;
    c.host = host;
    c.d = d;
    c.degenerate = d >= host.width();
    const double w = host.width();
    long long n = 1;
    if (w > 2.0 * d) {
        // smallest n with (n - 1) d + 2 d >= w, robust to fp at exact multiples
        n = 1 + static_cast<long long>(std::ceil((w - 2.0 * d) / d - 1e-9));
        while (host.a + static_cast<double>(n - 1) * d + 2.0 * d <
               host.b - 1e-12 * w)
            ++n;  // fp fallback; never taken for sane widths
    }
    c.lefts.resize(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i)
        c.lefts[static_cast<std::size_t>(i)] = host.a + static_cast<double>(i) * d;
    return c;
}

// ---------------------------------------------------------------------------
// Thinness experiment: at each scale k, frequency of an ambient eigenvalue in
// the window J_k around E whose localization centers meet the scale-k box.
// Window width d_k = |box_k|^{-1} k^{-2}; ambient side 3 L_{k+1}.

struct ThinHit {
    int k = 0;
    long long trial = 0;
    double energy = 0.0;
    Site center;  // designated (lexicographic minimum)
    long long n_centers = 0;
    double tail3 = 0.0;  // l2 mass outside the side-3L_k comparison box
    double gamma_hat = 0.0;
    double fit_residual = 0.0;
    bool fit_ok = false;
    bool near_degenerate = false;
};

struct ThinScale {
    int k = 0;
    long long length = 0;
    long long ambient_side = 0;
    double d_k = 0.0;
    Interval window{0.0, 0.0};
    StatsSummary summary;
    std::vector<int> counts;  // per-trial count of qualifying eigenpairs
    std::vector<ThinHit> hits;
};

struct ThinResult {
    double energy = 0.0;
    std::vector<ThinScale> scales;
};

struct ThinOptions {
    double gamma_prime = kDefaultGammaPrime;
    double c1 = kDefaultC1;
    double c2 = kDefaultC2;
    long long site_cap = default_site_cap();
};

// Occupation bound for the widened thin window: a density term over the
// side-3L comparison box plus the scale-analysis failure weight L^{2da - 2p}.
inline double thin_window_bound(const PotentialSpec& spec, int d, double window_width,
                                long long length, double alpha, double msa_p,
                                const ThinOptions& opt) {
    const double eps = opt.c2 *
        std::exp(-opt.gamma_prime * static_cast<double>(length) / 2.0);
    const double sites3 = std::pow(3.0 * static_cast<double>(length), d);
    const double wegner_part =
        spec.density_sup() * (window_width + 2.0 * eps) * sites3;
    const double msa_part =
        opt.c1 * std::pow(static_cast<double>(length), 2.0 * d * alpha - 2.0 * msa_p);
    return wegner_part + msa_part;
}

// Geometry and seeding of one thin-centers scale; shared by the ensemble
// driver below and the streaming runner.
struct ThinScaleSetup {
    int k = 0;
    long long length = 0;
    long long ambient_side = 0;
    Box ambient;
    Box target;
    Box compare;  // side 3 L_k, for the tail-mass column
    double d_k = 0.0;
    Interval window{0.0, 0.0};
    std::uint64_t scale_master = 0;
};

inline ThinScaleSetup thin_scale_setup(const ScaleSchedule& schedule, int k,
                                       double energy, std::uint64_t seed,
                                       const ThinOptions& opt = {}, int d = 1) {
    ThinScaleSetup s;
    s.k = k;
    s.length = schedule.length(k);
    s.ambient_side = 3 * schedule.length(k + 1);
    const Site origin(static_cast<std::size_t>(d), 0);
    try {
        s.ambient = Box::centered(d, origin, s.ambient_side, opt.site_cap);
    } catch (const BoxTooLarge&) {
        throw Error("scale too large for desk run: ambient side " +
                    std::to_string(s.ambient_side) + " exceeds the site cap");
    }
    s.target = Box::centered(d, origin, s.length);
    s.compare = Box::centered(d, origin, 3 * s.length);
    s.d_k = 1.0 / (static_cast<double>(s.target.size()) * static_cast<double>(k) *
                   static_cast<double>(k));
    s.window = {energy - s.d_k / 2.0, energy + s.d_k / 2.0};
    s.scale_master = stream_seed(seed, static_cast<std::uint64_t>(k));
    return s;
}

struct ThinTrialOut {
    int count = 0;
    std::vector<ThinHit> hits;
};

inline ThinTrialOut thin_trial(const ThinScaleSetup& s, const PotentialSpec& spec,
                               long long trial) {
    const PotentialRealization v =
        sample_potential(s.ambient, spec, trial_seed(s.scale_master, trial));
    const HamiltonianMatrix h = assemble_hamiltonian(s.ambient, v, spec.coupling);
    const std::vector<Eigenpair> pairs = eigenpairs_in_interval(h, s.window);
    ThinTrialOut out;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const std::vector<Site> centers =
            localization_centers(s.ambient, pairs[p].vector);
        bool meets = false;
        for (const Site& c : centers)
            if (s.target.contains(c)) { meets = true; break; }
        if (!meets) continue;
        ThinHit hit;
        hit.k = s.k;
        hit.trial = trial;
        hit.energy = pairs[p].value;
        hit.center = centers.front();
        hit.n_centers = static_cast<long long>(centers.size());
        hit.tail3 = tail_mass(s.ambient, pairs[p].vector, s.compare);
        try {
            const DecayFit f = decay_rate_fit(s.ambient, pairs[p].vector, hit.center);
            hit.gamma_hat = f.gamma_hat;
            hit.fit_residual = f.residual;
            hit.fit_ok = true;
        } catch (const InsufficientSupport&) {
            hit.fit_ok = false;
        }
        hit.near_degenerate =
            (p > 0 && pairs[p].value - pairs[p - 1].value < kNearDegenerateGap) ||
            (p + 1 < pairs.size() &&
             pairs[p + 1].value - pairs[p].value < kNearDegenerateGap);
        out.hits.push_back(std::move(hit));
    }
    out.count = static_cast<int>(out.hits.size());
    return out;
}

inline ThinScale reduce_thin_scale(const ThinScaleSetup& s, const PotentialSpec& spec,
                                   const ScaleSchedule& schedule,
                                   std::vector<ThinTrialOut> per_trial, int d,
                                   const ThinOptions& opt) {
    const double p_exp = schedule.msa_p > 0.0 ? schedule.msa_p : 2.0 * d + 1.0;
    ThinScale scale;
    scale.k = s.k;
    scale.length = s.length;
    scale.ambient_side = s.ambient_side;
    scale.d_k = s.d_k;
    scale.window = s.window;
    scale.counts.reserve(per_trial.size());
    long long hits = 0;
    for (auto& t : per_trial) {  // index order keeps aggregates deterministic
        scale.counts.push_back(t.count);
        if (t.count > 0) ++hits;
        for (auto& hh : t.hits) scale.hits.push_back(std::move(hh));
    }
    const double raw =
        thin_window_bound(spec, d, s.d_k, s.length, schedule.alpha, p_exp, opt);
    scale.summary = summarize_event("thin", "thin-window", hits,
                                    static_cast<long long>(per_trial.size()), raw);
    scale.summary.scale_index = s.k;
    scale.summary.scale_length = s.length;
    scale.summary.box_sites = s.ambient.size();
    scale.summary.coupling = spec.coupling;
    scale.summary.window = s.window;
    return scale;
}

inline ThinResult run_thin_centers(const ScaleSchedule& schedule,
                                   const PotentialSpec& spec, double energy,
                                   int k_lo, int k_hi, long long trials,
                                   std::uint64_t seed, int workers = 1,
                                   const ThinOptions& opt = {}, int d = 1) {
    spec.validate();
    if (k_lo < 1 || k_hi < k_lo) throw Error("thinness needs 1 <= k_lo <= k_hi");
    if (k_hi + 1 > schedule.max_index())
        throw Error("schedule too short: ambient needs scale " +
                    std::to_string(k_hi + 1));
    if (trials < 1) throw Error("ensemble needs at least one trial");
    ThinResult result;
    result.energy = energy;
    for (int k = k_lo; k <= k_hi; ++k) {
        const ThinScaleSetup setup = thin_scale_setup(schedule, k, energy, seed, opt, d);
        std::vector<ThinTrialOut> per_trial(static_cast<std::size_t>(trials));
        run_indexed(trials, workers, [&](long long i) {
            per_trial[static_cast<std::size_t>(i)] = thin_trial(setup, spec, i);
        });
        result.scales.push_back(
            reduce_thin_scale(setup, spec, schedule, std::move(per_trial), d, opt));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Repulsion experiment: one ambient ensemble; per scale k, the double
// occupancy event "some cover element J(i, d_k) of I holds >= 2 eigenvalues
// localized in the scale-k box", d_k = |box_k|^{-2} k^{-2}; plus the
// gap / center-distance scatter over all eigenpair pairs inside I.

struct RepulsionPair {
    double gap = 0.0;
    long long distance = 0;  // min linf distance between the two center sets
};

struct RepulsionTrial {
    long long trial = 0;
    long long in_window = 0;               // eigenvalues inside I
    std::vector<char> event;               // per scale slot
    std::vector<long long> localized;      // per scale slot
    std::vector<RepulsionPair> pairs;
};

struct RepulsionScale {
    int k = 0;
    long long length = 0;
    double d_k = 0.0;
    long long cover_size = 0;
    StatsSummary summary;
};

struct RepulsionResult {
    Interval window{0.0, 0.0};
    long long ambient_side = 0;
    std::vector<RepulsionScale> scales;
    std::vector<RepulsionTrial> trials;

    std::vector<RepulsionPair> all_pairs() const {
        std::vector<RepulsionPair> out;
        for (const auto& t : trials)
            out.insert(out.end(), t.pairs.begin(), t.pairs.end());
        return out;
    }
};

inline long long min_center_distance(const std::vector<Site>& xs,
                                     const std::vector<Site>& ys) {
    long long best = -1;
    for (const Site& x : xs)
        for (const Site& y : ys) {
            const long long v = linf_distance(x, y);
            if (best < 0 || v < best) best = v;
        }
    return best;
}

// Gap / center-distance geometry of the scatter: the smallest-decile gaps
// (gap <= the n/10-th order statistic) against the full population. Repulsion
// predicts the small-gap pairs are not closer in space than typical.
struct ScatterSummary {
    long long pairs = 0;
    double gap_decile_cut = 0.0;
    double median_distance_all = 0.0;
    double median_distance_small_gap = 0.0;
    long long small_gap_pairs = 0;
};

inline ScatterSummary scatter_summary(const std::vector<RepulsionPair>& pairs) {
    if (pairs.empty()) throw InsufficientData("scatter needs at least one pair");
    std::vector<double> gaps;
    gaps.reserve(pairs.size());
    for (const RepulsionPair& p : pairs) gaps.push_back(p.gap);
    std::sort(gaps.begin(), gaps.end());
    ScatterSummary s;
    s.pairs = static_cast<long long>(pairs.size());
    s.gap_decile_cut = gaps[gaps.size() / 10];
    std::vector<double> dist_all, dist_small;
    dist_all.reserve(pairs.size());
    for (const RepulsionPair& p : pairs) {
        dist_all.push_back(static_cast<double>(p.distance));
        if (p.gap <= s.gap_decile_cut)
            dist_small.push_back(static_cast<double>(p.distance));
    }
    s.small_gap_pairs = static_cast<long long>(dist_small.size());
    s.median_distance_all = median_of(std::move(dist_all));
    s.median_distance_small_gap = median_of(std::move(dist_small));
    return s;
}

// Shared ambient geometry for the repulsion ensemble: one box, a target and a
// cover per scale. Shared by the ensemble driver and the streaming runner.
struct RepulsionSetup {
    int k_lo = 0;
    int k_hi = 0;
    Box ambient;
    std::vector<long long> lengths;  // per scale slot
    std::vector<Box> targets;
    std::vector<double> dks;
    std::vector<IntervalCover> covers;

    int n_scales() const { return k_hi - k_lo + 1; }
};

inline RepulsionSetup repulsion_setup(const ScaleSchedule& schedule,
                                      const Interval& window, int k_lo, int k_hi,
                                      long long ambient_side, int d = 1) {
    if (k_lo < 1 || k_hi < k_lo) throw Error("repulsion needs 1 <= k_lo <= k_hi");
    if (k_hi + 1 > schedule.max_index())
        throw Error("schedule too short: ambient floor needs scale " +
                    std::to_string(k_hi + 1));
    if (ambient_side < 3 * schedule.length(k_hi + 1))
        throw Error("ambient side must be at least 3 L_{k+1} = " +
                    std::to_string(3 * schedule.length(k_hi + 1)));
    if (window.width() <= 0.0) throw Error("repulsion window must have positive width");
    RepulsionSetup s;
    s.k_lo = k_lo;
    s.k_hi = k_hi;
    const Site origin(static_cast<std::size_t>(d), 0);
    s.ambient = Box::centered(d, origin, ambient_side);
    for (int k = k_lo; k <= k_hi; ++k) {
        const Box target = Box::centered(d, origin, schedule.length(k));
        const double sites = static_cast<double>(target.size());
        const double dk = 1.0 / (sites * sites * static_cast<double>(k) *
                                 static_cast<double>(k));
        s.lengths.push_back(schedule.length(k));
        s.targets.push_back(target);
        s.dks.push_back(dk);
        s.covers.push_back(cover_intervals(window, dk));
    }
    return s;
}

inline RepulsionTrial repulsion_trial(const RepulsionSetup& setup,
                                      const PotentialSpec& spec,
                                      const Interval& window, long long trial,
                                      std::uint64_t master_seed) {
    const PotentialRealization v =
        sample_potential(setup.ambient, spec, trial_seed(master_seed, trial));
    const HamiltonianMatrix h = assemble_hamiltonian(setup.ambient, v, spec.coupling);
    const std::vector<Eigenpair> pairs = eigenpairs_in_interval(h, window);
    const std::size_t m = pairs.size();
    std::vector<std::vector<Site>> centers(m);
    for (std::size_t p = 0; p < m; ++p)
        centers[p] = localization_centers(setup.ambient, pairs[p].vector);

    const int n_scales = setup.n_scales();
    RepulsionTrial t;
    t.trial = trial;
    t.in_window = static_cast<long long>(m);
    t.event.assign(static_cast<std::size_t>(n_scales), 0);
    t.localized.assign(static_cast<std::size_t>(n_scales), 0);
    for (int s = 0; s < n_scales; ++s) {
        std::vector<double> local_e;  // ascending, range query order
        for (std::size_t p = 0; p < m; ++p) {
            for (const Site& c : centers[p])
                if (setup.targets[static_cast<std::size_t>(s)].contains(c)) {
                    local_e.push_back(pairs[p].value);
                    break;
                }
        }
        t.localized[static_cast<std::size_t>(s)] =
            static_cast<long long>(local_e.size());
        for (std::size_t q = 0; q + 1 < local_e.size(); ++q) {
            if (setup.covers[static_cast<std::size_t>(s)].pair_covered(local_e[q],
                                                                      local_e[q + 1])) {
                t.event[static_cast<std::size_t>(s)] = 1;
                break;
            }
        }
    }
    for (std::size_t p = 0; p < m; ++p)
        for (std::size_t q = p + 1; q < m; ++q)
            t.pairs.push_back({pairs[q].value - pairs[p].value,
                               min_center_distance(centers[p], centers[q])});
    return t;
}

inline std::vector<RepulsionScale> reduce_repulsion_scales(
    const RepulsionSetup& setup, const PotentialSpec& spec, const Interval& window,
    const std::vector<RepulsionTrial>& trials, int d = 1) {
    std::vector<RepulsionScale> out;
    for (int s = 0; s < setup.n_scales(); ++s) {
        const int k = setup.k_lo + s;
        const double dk = setup.dks[static_cast<std::size_t>(s)];
        const double rho = spec.density_sup();
        const double sites3 = std::pow(
            3.0 * static_cast<double>(setup.lengths[static_cast<std::size_t>(s)]), d);
        const double raw = std::numbers::pi * std::numbers::pi * rho * rho *
                           (3.0 * dk) * (3.0 * dk) * (window.width() / dk) *
                           sites3 * sites3;
        long long hits = 0;
        for (const auto& t : trials)
            if (t.event[static_cast<std::size_t>(s)]) ++hits;
        RepulsionScale scale;
        scale.k = k;
        scale.length = setup.lengths[static_cast<std::size_t>(s)];
        scale.d_k = dk;
        scale.cover_size = setup.covers[static_cast<std::size_t>(s)].size();
        scale.summary = summarize_event("repulsion", "center-repulsion", hits,
                                        static_cast<long long>(trials.size()), raw);
        scale.summary.scale_index = k;
        scale.summary.scale_length = scale.length;
        scale.summary.box_sites = setup.ambient.size();
        scale.summary.coupling = spec.coupling;
        scale.summary.window = window;
        out.push_back(std::move(scale));
    }
    return out;
}

inline RepulsionResult run_repulsion(const ScaleSchedule& schedule,
                                     const PotentialSpec& spec, const Interval& window,
                                     int k_lo, int k_hi, long long ambient_side,
                                     long long trials, std::uint64_t seed,
                                     int workers = 1, int d = 1) {
    spec.validate();
    if (trials < 1) throw Error("ensemble needs at least one trial");
    const RepulsionSetup setup =
        repulsion_setup(schedule, window, k_lo, k_hi, ambient_side, d);

    RepulsionResult result;
    result.window = window;
    result.ambient_side = ambient_side;
    result.trials.resize(static_cast<std::size_t>(trials));
    run_indexed(trials, workers, [&](long long i) {
        result.trials[static_cast<std::size_t>(i)] =
            repulsion_trial(setup, spec, window, i, seed);
    });
    result.scales = reduce_repulsion_scales(setup, spec, window, result.trials, d);
    return result;
}

// ---------------------------------------------------------------------------
// Multiscale event frequency: over independent realizations on one ambient
// box, the fraction where for every grid energy at least one of the two
// disjoint scale-k boxes is (gamma, E)-regular.

struct MsaEstimate {
    int k = 0;
    long long length = 0;
    long long trials = 0;
    long long hits = 0;
    double frequency = 0.0;
    WilsonInterval wilson{};
    double target = 0.0;  // 1 - L^{-2p}
    std::vector<char> outcomes;  // per-trial event indicator, indexed by trial id
};

// Two disjoint scale-k boxes sampled from one realization on a common ambient
// box, so the per-site variables the two boxes see are the same draw.
struct MsaGeometry {
    long long length = 0;
    Box ambient;
    Box box_x;
    Box box_y;
};

inline MsaGeometry msa_geometry(const ScaleSchedule& schedule, int k, Site x = {},
                                Site y = {}) {
    const long long l = schedule.length(k);
    const int d = x.empty() ? 1 : static_cast<int>(x.size());
    if (x.empty()) x.assign(static_cast<std::size_t>(d), 0);
    if (y.empty()) {
        y = x;
        y[0] += static_cast<int>(l) + 1;
    }
    if (linf_distance(x, y) <= l)
        throw Error("msa event needs |x - y|_inf > L_k = " + std::to_string(l));
    const long long r = (l - 1) / 2;
    Site lo(x), hi(x), mid(x);
    for (int j = 0; j < d; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        lo[ju] = std::min(x[ju], y[ju]) - static_cast<int>(r);
        hi[ju] = std::max(x[ju], y[ju]) + static_cast<int>(r);
        mid[ju] = (lo[ju] + hi[ju]) / 2;
    }
    MsaGeometry g;
    g.length = l;
    g.ambient = Box::corners(d, lo, hi, mid);
    g.box_x = Box::centered(d, x, l);
    g.box_y = Box::centered(d, y, l);
    return g;
}

inline bool msa_trial(const MsaGeometry& g, const PotentialSpec& spec,
                      const std::vector<double>& energies, double gamma,
                      long long trial, std::uint64_t master_seed,
                      double tau_rel = kDefaultTauSpec) {
    const PotentialRealization v =
        sample_potential(g.ambient, spec, trial_seed(master_seed, trial));
    const HamiltonianMatrix hx = assemble_hamiltonian(g.box_x, v, spec.coupling);
    const HamiltonianMatrix hy = assemble_hamiltonian(g.box_y, v, spec.coupling);
    return msa_event_holds(hx, hy, energies, gamma, tau_rel);
}

inline MsaEstimate msa_event_frequency(const ScaleSchedule& schedule, int k,
                                       const PotentialSpec& spec,
                                       const std::vector<double>& energies,
                                       double gamma, long long trials,
                                       std::uint64_t seed, int workers = 1,
                                       Site x = {}, Site y = {},
                                       double tau_rel = kDefaultTauSpec) {
    spec.validate();
    if (trials < 1) throw Error("empty ensemble: need at least one trial");
    if (energies.empty()) throw Error("msa event needs at least one energy");
    const MsaGeometry g = msa_geometry(schedule, k, std::move(x), std::move(y));
    const long long l = g.length;
    const int d = g.ambient.dim();

    std::vector<char> ok(static_cast<std::size_t>(trials), 0);
    run_indexed(trials, workers, [&](long long i) {
        ok[static_cast<std::size_t>(i)] =
            msa_trial(g, spec, energies, gamma, i, seed, tau_rel) ? 1 : 0;
    });

    MsaEstimate est;
    est.k = k;
    est.length = l;
    est.trials = trials;
    est.outcomes = std::move(ok);
    for (char c : est.outcomes)
        if (c) ++est.hits;
    est.frequency = static_cast<double>(est.hits) / static_cast<double>(trials);
    est.wilson = wilson95(est.hits, trials);
    const double p_exp = schedule.msa_p > 0.0 ? schedule.msa_p : 2.0 * d + 1.0;
    est.target = msa_target(l, p_exp);
    return est;
}

inline std::vector<MsaEstimate> run_msa(const ScaleSchedule& schedule,
                                        const PotentialSpec& spec, int k_lo, int k_hi,
                                        const std::vector<double>& energies,
                                        double gamma, long long trials,
                                        std::uint64_t seed, int workers = 1,
                                        double tau_rel = kDefaultTauSpec) {
    if (k_lo < 0 || k_hi < k_lo || k_hi > schedule.max_index())
        throw Error("msa scale range outside the schedule");
    std::vector<MsaEstimate> out;
    for (int k = k_lo; k <= k_hi; ++k)
        out.push_back(msa_event_frequency(schedule, k, spec, energies, gamma, trials,
                                          stream_seed(seed, static_cast<std::uint64_t>(k)),
                                          workers, {}, {}, tau_rel));
    return out;
}

// ---------------------------------------------------------------------------
// Single-box regularity ensemble. Rows carry the gamma-independent data
// (spectral gate outcome plus the worst boundary Green's element), so one set
// of solves prices the verdict at every requested gamma.

struct RegularityTrialRow {
    long long trial = 0;
    std::uint64_t seed = 0;
    bool spectrum_hit = false;
    double dist_to_spectrum = 0.0;
    double max_boundary_green = 0.0;

    bool regular_at(double gamma, long long side) const {
        return !spectrum_hit &&
               max_boundary_green <=
                   std::exp(-gamma * static_cast<double>(side) / 2.0);
    }
};

struct RegularityResult {
    long long side = 0;
    double energy = 0.0;
    std::vector<double> gammas;
    std::vector<StatsSummary> per_gamma;
    std::vector<RegularityTrialRow> rows;
};

inline RegularityTrialRow regularity_trial(const Box& box, const PotentialSpec& spec,
                                           double energy, long long trial,
                                           std::uint64_t master_seed,
                                           double tau_rel = kDefaultTauSpec) {
    const std::uint64_t s = trial_seed(master_seed, trial);
    const PotentialRealization v = sample_potential(box, spec, s);
    const HamiltonianMatrix h = assemble_hamiltonian(box, v, spec.coupling);
    RegularityTrialRow row;
    row.trial = trial;
    row.seed = s;
    try {
        const std::vector<GreensValue> g =
            greens_to_boundary(h, energy, box.center(), tau_rel);
        for (const GreensValue& gv : g)
            row.max_boundary_green = std::max(row.max_boundary_green, std::abs(gv.value));
        row.dist_to_spectrum = g.empty() ? 0.0 : g.front().dist_to_spectrum;
    } catch (const ResolventSingular& rs) {
        row.spectrum_hit = true;
        row.dist_to_spectrum = rs.spectrum_distance;
    }
    return row;
}

inline RegularityResult run_regularity(const Box& box, const PotentialSpec& spec,
                                       double energy, std::vector<double> gammas,
                                       long long trials, std::uint64_t seed,
                                       int workers = 1,
                                       double tau_rel = kDefaultTauSpec) {
    spec.validate();
    if (trials < 1) throw Error("ensemble needs at least one trial");
    if (gammas.empty()) throw Error("regularity ensemble needs at least one gamma");
    RegularityResult result;
    result.side = box.side();
    result.energy = energy;
    result.gammas = gammas;
    result.rows.resize(static_cast<std::size_t>(trials));
    run_indexed(trials, workers, [&](long long i) {
        result.rows[static_cast<std::size_t>(i)] =
            regularity_trial(box, spec, energy, i, seed, tau_rel);
    });
    for (double g : gammas) {
        long long hits = 0;
        for (const auto& row : result.rows)
            if (row.regular_at(g, result.side)) ++hits;
        StatsSummary s = summarize_event("regularity", "", hits, trials, 0.0);
        s.scale_length = result.side;
        s.box_sites = box.size();
        s.coupling = spec.coupling;
        s.window = {energy, energy};
        result.per_gamma.push_back(std::move(s));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Level spacing statistics with window-local unfolding: I is split into equal
// windows, and each spacing is normalized by the mean spacing of its own
// window in its own trial, so a Poisson-like spectrum lands on Exp(1).

struct SpacingStats {
    long long spacings = 0;
    int windows = 0;
    double ks_exp1 = 0.0;
    double mle_rate = 0.0;  // 1 by construction up to fp; reported for the record
    Histogram hist;
};

inline SpacingStats spacing_statistics(const std::vector<std::vector<double>>& trials,
                                       const Interval& window,
                                       int windows = kDefaultSpacingWindows,
                                       int bins = kDefaultHistogramBins,
                                       long long min_spacings = kMinSpacings) {
    if (windows < 1) throw Error("spacing statistics needs at least one window");
    if (window.width() <= 0.0) throw Error("spacing window must have positive width");
    std::vector<double> unfolded;
    for (const std::vector<double>& eigs : trials) {
        for (int w = 0; w < windows; ++w) {
            const double wa = window.a + window.width() * w / windows;
            const double wb = window.a + window.width() * (w + 1) / windows;
            const auto first = std::lower_bound(eigs.begin(), eigs.end(), wa);
            const auto last = std::lower_bound(eigs.begin(), eigs.end(), wb);
            const long long m = last - first;
            if (m < 2) continue;
            const double mean = (*(last - 1) - *first) / static_cast<double>(m - 1);
            if (mean <= 0.0) continue;
            for (auto it = first + 1; it != last; ++it)
                unfolded.push_back((*it - *(it - 1)) / mean);
        }
    }
    if (static_cast<long long>(unfolded.size()) < min_spacings)
        throw InsufficientData(std::to_string(unfolded.size()) + " spacings, need " +
                               std::to_string(min_spacings));
    SpacingStats s;
    s.spacings = static_cast<long long>(unfolded.size());
    s.windows = windows;
    s.ks_exp1 = ks_distance_exp1(unfolded);
    s.mle_rate = exp_mle_rate(unfolded);
    s.hist = histogram(unfolded, bins);
    return s;
}

struct SpacingRun {
    Interval window{0.0, 0.0};
    std::vector<long long> counts;  // eigenvalues inside the window per trial
    SpacingStats stats;
};

// Central half of the spectrum support, the window used when none is given.
inline Interval default_spacing_window(const PotentialSpec& spec, int d) {
    const Interval support = spectrum_support(spec, d);
    const double mid = (support.a + support.b) / 2.0;
    return {mid - support.width() / 4.0, mid + support.width() / 4.0};
}

// The ascending window restriction of one realization's spectrum.
inline std::vector<double> window_spectrum_trial(const Box& box,
                                                 const PotentialSpec& spec,
                                                 const Interval& window,
                                                 long long trial,
                                                 std::uint64_t master_seed) {
    const PotentialRealization v =
        sample_potential(box, spec, trial_seed(master_seed, trial));
    const HamiltonianMatrix h = assemble_hamiltonian(box, v, spec.coupling);
    const std::vector<double> eigs = eigenvalues_of(h);
    std::vector<double> inside;
    for (double e : eigs)
        if (window.contains(e)) inside.push_back(e);
    return inside;
}

// window with zero width means "central half of the spectrum support"
inline SpacingRun run_spacing(const Box& box, const PotentialSpec& spec,
                              Interval window, long long trials, std::uint64_t seed,
                              int workers = 1, int windows = kDefaultSpacingWindows,
                              int bins = kDefaultHistogramBins,
                              long long min_spacings = kMinSpacings) {
    spec.validate();
    if (trials < 1) throw Error("ensemble needs at least one trial");
    if (window.width() <= 0.0) window = default_spacing_window(spec, box.dim());
    std::vector<std::vector<double>> spectra(static_cast<std::size_t>(trials));
    run_indexed(trials, workers, [&](long long i) {
        spectra[static_cast<std::size_t>(i)] =
            window_spectrum_trial(box, spec, window, i, seed);
    });
    SpacingRun run;
    run.window = window;
    for (const auto& sp : spectra)
        run.counts.push_back(static_cast<long long>(sp.size()));
    run.stats = spacing_statistics(spectra, window, windows, bins, min_spacings);
    return run;
}

// ---------------------------------------------------------------------------
// Simplicity: consecutive-gap census across an ensemble.

struct SimplicityStats {
    long long trials = 0;
    double threshold = 0.0;
    double min_gap = 0.0;       // minimum over all trials, +inf if no pairs
    long long gaps_below = 0;   // consecutive gaps strictly below the threshold
    std::vector<double> per_trial_min;
};

struct GapCensusTrial {
    double min_gap = std::numeric_limits<double>::infinity();
    long long below = 0;
};

inline GapCensusTrial gap_census_trial(const Box& box, const PotentialSpec& spec,
                                       double threshold, long long trial,
                                       std::uint64_t master_seed) {
    const PotentialRealization v =
        sample_potential(box, spec, trial_seed(master_seed, trial));
    const HamiltonianMatrix h = assemble_hamiltonian(box, v, spec.coupling);
    const std::vector<double> eigs = eigenvalues_of(h);
    GapCensusTrial out;
    for (std::size_t j = 1; j < eigs.size(); ++j) {
        const double g = eigs[j] - eigs[j - 1];
        out.min_gap = std::min(out.min_gap, g);
        if (g < threshold) ++out.below;
    }
    return out;
}

inline SimplicityStats run_simplicity(const Box& box, const PotentialSpec& spec,
                                      long long trials, std::uint64_t seed,
                                      double threshold = kNearDegenerateGap,
                                      int workers = 1) {
    spec.validate();
    if (trials < 1) throw Error("ensemble needs at least one trial");
    std::vector<GapCensusTrial> per(static_cast<std::size_t>(trials));
    run_indexed(trials, workers, [&](long long i) {
        per[static_cast<std::size_t>(i)] = gap_census_trial(box, spec, threshold, i, seed);
    });
    SimplicityStats s;
    s.trials = trials;
    s.threshold = threshold;
    s.min_gap = std::numeric_limits<double>::infinity();
    for (const auto& t : per) {
        s.min_gap = std::min(s.min_gap, t.min_gap);
        s.gaps_below += t.below;
        s.per_trial_min.push_back(t.min_gap);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Spectrum snapshot, with the exact free-lattice oracle when disorder is off.

inline std::vector<double> free_eigenvalues_1d(long long n) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (long long j = 1; j <= n; ++j)
        w[static_cast<std::size_t>(j - 1)] =
            2.0 * std::cos(std::numbers::pi * static_cast<double>(j) /
                           static_cast<double>(n + 1));
    std::sort(w.begin(), w.end());
    return w;
}

struct SpectrumSummary {
    long long sites = 0;
    int dimension = 0;
    double coupling = 0.0;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    double min_gap = 0.0;
    bool free_oracle = false;     // d=1, coupling 0: analytic comparison ran
    double max_dev_free = 0.0;    // vs 2 cos(j pi / (n+1))
    std::vector<double> eigenvalues;
};

inline SpectrumSummary run_spectrum(const Box& box, const PotentialSpec& spec,
                                    std::uint64_t seed) {
    spec.validate();
    const PotentialRealization v = sample_potential(box, spec, seed);
    const HamiltonianMatrix h = assemble_hamiltonian(box, v, spec.coupling);
    const std::vector<double> eigs = eigenvalues_of(h);
    SpectrumSummary s;
    s.sites = box.size();
    s.dimension = box.dim();
    s.coupling = spec.coupling;
    s.min_eigenvalue = eigs.front();
    s.max_eigenvalue = eigs.back();
    s.min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < eigs.size(); ++j)
        s.min_gap = std::min(s.min_gap, eigs[j] - eigs[j - 1]);
    if (box.dim() == 1 && spec.coupling == 0.0) {
        s.free_oracle = true;
        const std::vector<double> oracle = free_eigenvalues_1d(box.size());
        for (std::size_t j = 0; j < eigs.size(); ++j)
            s.max_dev_free = std::max(s.max_dev_free, std::abs(eigs[j] - oracle[j]));
    }
    s.eigenvalues = eigs;
    return s;
}

}  // namespace andlab
