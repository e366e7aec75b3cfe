// Acceptance gate: thirteen pinned criteria, one verdict line each. Every
// tolerance and ensemble parameter is fixed here on purpose; a change in any
// of them is a change in what this binary certifies.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "andlab/config.hpp"
#include "andlab/experiments.hpp"
#include "andlab/lattice.hpp"
#include "andlab/localization.hpp"
#include "andlab/regularity.hpp"
#include "andlab/runner.hpp"
#include "andlab/spectral.hpp"
#include "oracles.hpp"

using namespace andlab;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

double now_s() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", x);
    return buf;
}

PotentialSpec uniform01(double coupling) {
    PotentialSpec s;
    s.coupling = coupling;
    return s;
}

// --- criterion 1: analytic spectrum oracle --------------------------------
Verdict c1_spectrum_oracle() {
    const double t0 = now_s();
    Box box = Box::centered(1, Site{0}, 101);  // 101 sites: radius 50
    auto h = assemble_hamiltonian(box, sample_potential(box, uniform01(0.0), 1), 0.0);
    auto w = eigenvalues_of(h);
    auto w0 = free_eigenvalues_1d(101);
    double dev = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        dev = std::max(dev, std::abs(w[i] - w0[i]));
    const double dt = now_s() - t0;
    Verdict v;
    v.pass = dev < 1e-10 && dt < 1.0;
    v.detail = "max dev " + fmt(dev) + " vs closed form, " + fmt(dt) + " s";
    return v;
}

// --- criterion 2: eigendecomposition certificates -------------------------
Verdict c2_certificates() {
    double worst_residual = 0.0, worst_gram = 0.0;
    auto check = [&](const Box& box, std::uint64_t master) {
        for (int t = 0; t < 100; ++t) {
            auto h = assemble_hamiltonian(
                box, sample_potential(box, uniform01(1.0), trial_seed(master, t)), 1.0);
            auto s = eigendecompose(h);
            worst_residual =
                std::max(worst_residual, s.max_residual() / s.spectral_radius());
            const auto n = static_cast<std::size_t>(s.n);
            for (std::size_t i = 0; i < n; ++i) {
                const double* vi = s.vector(static_cast<long long>(i));
                for (std::size_t j = i; j < n; ++j) {
                    const double* vj = s.vector(static_cast<long long>(j));
                    double dot = 0.0;
                    for (std::size_t k = 0; k < n; ++k) dot += vi[k] * vj[k];
                    worst_gram =
                        std::max(worst_gram, std::abs(dot - (i == j ? 1.0 : 0.0)));
                }
            }
        }
    };
    check(Box::centered(1, Site{0}, 401), 2);
    check(Box::centered(2, Site{0, 0}, 21), 3);
    Verdict v;
    v.pass = worst_residual < 1e-10 && worst_gram < 1e-10;
    v.detail = "200 systems, worst relative residual " + fmt(worst_residual) +
               ", worst Gram deviation " + fmt(worst_gram);
    return v;
}

// --- criteria 3 and 4 share one set of counting ensembles -----------------
struct CountingBattery {
    std::vector<double> widths{0.02, 0.01, 0.005};
    std::vector<CountEnsemble> ensembles;
};

const CountingBattery& counting_battery() {
    static CountingBattery b = [] {
        CountingBattery out;
        Box box = Box::centered(1, Site{0}, 51);
        std::uint64_t seed = 101;
        for (double w : out.widths)
            out.ensembles.push_back(count_eigenvalues_in(
                box, uniform01(1.0), Interval{0.5 - w / 2.0, 0.5 + w / 2.0}, 20000,
                seed++));
        return out;
    }();
    return b;
}

Verdict c3_first_moment() {
    const auto& b = counting_battery();
    Verdict v;
    v.pass = true;
    for (std::size_t i = 0; i < b.widths.size(); ++i) {
        auto s = wegner_from_counts(b.ensembles[i]);
        if (!(s.p_hat - 4.0 * s.se <= s.bound)) v.pass = false;
        v.detail += (i ? "; " : "") + std::string("|J|=") + fmt(b.widths[i]) +
                    ": p " + fmt(s.p_hat) + " vs bound " + fmt(s.bound_raw);
    }
    return v;
}

Verdict c4_second_moment() {
    const auto& b = counting_battery();
    std::vector<StatsSummary> ss;
    Verdict v;
    v.pass = true;
    for (const auto& e : b.ensembles) {
        auto s = minami_from_counts(e);
        if (!(s.p_hat - 4.0 * s.se <= s.bound)) v.pass = false;
        ss.push_back(s);
        v.detail += "p2 " + fmt(s.p_hat) + " vs bound " + fmt(s.bound_raw) + "; ";
    }
    int ratio_checks = 0;
    for (std::size_t i = 0; i + 1 < ss.size(); ++i) {
        if (ss[i].hits < 100 || ss[i + 1].hits < 100) continue;
        ++ratio_checks;
        const double ratio = ss[i + 1].p_hat / ss[i].p_hat;
        if (!(ratio <= 0.6)) v.pass = false;
        v.detail += "dyadic ratio " + fmt(ratio) + "; ";
    }
    v.detail += std::to_string(ratio_checks) + " ratio pairs with >= 100 hits";
    return v;
}

// --- criterion 5: gap census ----------------------------------------------
Verdict c5_gap_census() {
    Box box = Box::centered(1, Site{0}, 51);
    auto s = run_simplicity(box, uniform01(1.0), 10000, 55);
    Box square = Box::centered(2, Site{0, 0}, 3);
    auto control = run_simplicity(square, uniform01(0.0), 5, 0);
    Verdict v;
    v.pass = s.gaps_below == 0 && s.min_gap > 1e-12 && control.gaps_below > 0;
    v.detail = "10000 trials, min gap " + fmt(s.min_gap) +
               ", gaps below 1e-12: " + std::to_string(s.gaps_below) +
               "; degenerate control reports " + std::to_string(control.gaps_below);
    return v;
}

// --- criterion 6: interval cover ------------------------------------------
Verdict c6_cover() {
    const double t0 = now_s();
    Verdict v;
    v.pass = true;
    Rng rng(66);
    for (double d : {0.1, 0.01, 0.001}) {
        auto c = cover_intervals(Interval{0.0, 1.0}, d);
        if (!(static_cast<double>(c.size()) <= 1.0 / d)) v.pass = false;
        long long misses = 0;
        for (int t = 0; t < 100000; ++t) {
            const double w = rng.uniform(0.0, d);
            const double a = rng.uniform(0.0, 1.0 - w);
            if (c.locate(Interval{a, a + w}) == 0) ++misses;
        }
        if (misses != 0) v.pass = false;
        v.detail += "d=" + fmt(d) + ": " + std::to_string(c.size()) + " elements, " +
                    std::to_string(misses) + " misses; ";
    }
    const double dt = now_s() - t0;
    if (dt >= 5.0) v.pass = false;
    v.detail += fmt(dt) + " s";
    return v;
}

// --- criterion 7: green function regularity against a dense oracle -------
Verdict c7_regularity_oracle() {
    Box box = Box::centered(1, Site{0}, 21);
    const double e = 5.0;
    const std::uint64_t master = 7;
    long long mismatches = 0, regular_loose = 0, regular_strict = 0;
    for (long long t = 0; t < 1000; ++t) {
        auto h = assemble_hamiltonian(
            box, sample_potential(box, uniform01(10.0), trial_seed(master, t)), 10.0);
        auto loose = check_regular(h, e, 0.25);
        auto strict = check_regular(h, e, 0.5);
        if (loose.regular) ++regular_loose;
        if (strict.regular) ++regular_strict;

        const int n = 21;
        auto w = oracle::jacobi_eigenvalues(h.dense(), n);
        const double dist = distance_to_spectrum(w, e);
        const double radius = std::max(std::abs(w.front()), std::abs(w.back()));
        for (double gamma : {0.25, 0.5}) {
            bool expect = false;
            if (dist > kDefaultTauSpec * radius) {
                auto shifted = h.dense();
                for (int i = 0; i < n; ++i)
                    shifted[static_cast<std::size_t>(i * n + i)] -= e;
                auto inv = oracle::dense_inverse(shifted, n);
                const long long c = box.center_index();
                double worst = 0.0;
                for (long long bidx : box.boundary_indices())
                    worst = std::max(
                        worst, std::abs(inv[static_cast<std::size_t>(bidx * n + c)]));
                expect = worst <= std::exp(-gamma * 21.0 / 2.0);
            }
            const bool got =
                (gamma == 0.25 ? loose : strict).regular;
            if (got != expect) ++mismatches;
        }
    }
    Verdict v;
    v.pass = mismatches == 0 && regular_loose > regular_strict;
    v.detail = std::to_string(mismatches) + " oracle mismatches in 2000 verdicts; " +
               "freq " + fmt(regular_loose / 1000.0) + " at gamma 0.25 vs " +
               fmt(regular_strict / 1000.0) + " at gamma 0.5";
    return v;
}

// --- criterion 8: two box event trend across scales -----------------------
Verdict c8_two_box_trend() {
    auto sched = scale_schedule(7, 1.3, 3);
    auto ests = run_msa(sched, uniform01(10.0), 0, 2, {5.0}, 0.25, 2000, 8);
    Verdict v;
    v.pass = true;
    for (std::size_t k = 0; k + 1 < ests.size(); ++k) {
        // non-decreasing within Wilson: the next interval may not sit wholly
        // below the current one
        if (ests[k + 1].wilson.hi < ests[k].wilson.lo) v.pass = false;
    }
    for (const auto& e : ests)
        v.detail += "L=" + std::to_string(e.length) + ": " + fmt(e.frequency) + "; ";
    return v;
}

// --- criteria 9 and 11 share one thin centers ensemble --------------------
const ThinResult& thin_battery() {
    static ThinResult r = [] {
        auto sched = scale_schedule(7, 1.3, 4);
        return run_thin_centers(sched, uniform01(10.0), 5.0, 1, 3, 500, 0);
    }();
    return r;
}

Verdict c9_thin_trend() {
    const auto& r = thin_battery();
    Verdict v;
    v.pass = true;
    double prev = 2.0;
    for (const auto& sc : r.scales) {
        if (!(sc.summary.p_hat <= prev)) v.pass = false;
        prev = sc.summary.p_hat;
        v.detail += "k=" + std::to_string(sc.k) + ": " + fmt(sc.summary.p_hat) + "; ";
    }
    v.detail += "non-increasing across scales";
    return v;
}

Verdict c11_tail_mass() {
    const auto& r = thin_battery();
    std::vector<double> rates;
    for (const auto& sc : r.scales)
        for (const auto& h : sc.hits)
            if (h.fit_ok) rates.push_back(h.gamma_hat);
    Verdict v;
    if (rates.empty()) {
        v.detail = "no fitted decay rates";
        return v;
    }
    const double gamma_prime = 0.5 * median_of(rates);
    long long ok = 0, total = 0;
    for (const auto& sc : r.scales) {
        const double cut =
            std::exp(-gamma_prime * static_cast<double>(sc.length) / 2.0);
        for (const auto& h : sc.hits) {
            ++total;
            if (h.tail3 <= cut) ++ok;
        }
    }
    const double frac = static_cast<double>(ok) / static_cast<double>(total);
    v.pass = frac >= 0.9;
    v.detail = std::to_string(ok) + "/" + std::to_string(total) +
               " tails under the cut (gamma' " + fmt(gamma_prime) +
               " from median fitted rate " + fmt(2.0 * gamma_prime) + ")";
    return v;
}

// --- criterion 10: center repulsion ---------------------------------------
Verdict c10_repulsion() {
    auto sched = scale_schedule(3, 1.45, 4);
    auto res =
        run_repulsion(sched, uniform01(8.0), Interval{1.0, 7.0}, 1, 3, 501, 300, 1);
    Verdict v;
    v.pass = true;
    double prev = 2.0;
    for (const auto& sc : res.scales) {
        if (!(sc.summary.p_hat <= prev)) v.pass = false;
        prev = sc.summary.p_hat;
        if (sc.summary.bound_raw <= 1.0 &&
            !(sc.summary.p_hat - 4.0 * sc.summary.se <= sc.summary.bound))
            v.pass = false;
        v.detail += "k=" + std::to_string(sc.k) + ": " +
                    std::to_string(sc.summary.hits) + "/300; ";
    }
    auto sc = scatter_summary(res.all_pairs());
    if (!(sc.median_distance_small_gap >= sc.median_distance_all)) v.pass = false;
    v.detail += "median distance " + fmt(sc.median_distance_small_gap) +
                " (small gaps) vs " + fmt(sc.median_distance_all) + " (all), " +
                std::to_string(sc.pairs) + " pairs";
    return v;
}

// --- criterion 12: restriction witness ------------------------------------
Verdict c12_witness() {
    Box domain = Box::centered(1, Site{0}, 201);
    const PotentialSpec spec = uniform01(10.0);
    long long collected = 0, violations = 0;
    double worst_slack = 0.0;
    for (std::uint64_t t = 0; collected < 200 && t < 2000; ++t) {
        auto v = sample_potential(domain, spec, trial_seed(12, t));
        auto h = assemble_hamiltonian(domain, v, spec.coupling);
        auto pairs = eigenpairs_in_interval(h, Interval{4.0, 6.0});
        for (const auto& p : pairs) {
            if (collected >= 200) break;
            const Site c = designated_center(domain, p.vector);
            if (std::abs(c[0]) > 69) continue;  // probe must stay inside
            Box probe = Box::centered(1, c, 63);
            auto hp = assemble_hamiltonian(probe, v, spec.coupling);
            auto w = finite_volume_witness(domain, p.vector, p.value, hp,
                                           eigenvalues_of(hp));
            ++collected;
            if (!w.holds(1e-10)) ++violations;
            worst_slack = std::max(w.spectrum_dist - w.residual_bound, worst_slack);
        }
    }
    Verdict v;
    v.pass = collected == 200 && violations == 0;
    v.detail = std::to_string(collected) + " eigenpairs, " +
               std::to_string(violations) + " violations, worst dist - bound " +
               fmt(worst_slack);
    return v;
}

// --- criterion 13: reproducibility across worker pools --------------------
Verdict c13_reproducibility() {
    ExperimentConfig cfg;
    cfg.experiment = ExperimentKind::wegner;
    cfg.box_side = 21;
    cfg.window = Interval{0.0, 0.5};
    cfg.trials = 150;
    cfg.seed = 3;
    const fs::path root = fs::temp_directory_path() / "andlab_acceptance";
    fs::remove_all(root);
    auto read = [](const std::string& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    cfg.workers = 1;
    cfg.out_dir = (root / "w1").string();
    auto r1 = run_experiment(cfg);
    cfg.workers = 8;
    cfg.out_dir = (root / "w8").string();
    auto r8 = run_experiment(cfg);
    const std::string s1 = read(r1.summary_path), s8 = read(r8.summary_path);
    Verdict v;
    v.pass = !s1.empty() && s1 == s8 && r1.hash == r8.hash;
    v.detail = "summary.json " + std::to_string(s1.size()) + " bytes, workers 1 vs 8 " +
               (s1 == s8 ? "identical" : "DIFFER");
    return v;
}

}  // namespace

int main() {
    struct Item {
        const char* name;
        std::function<Verdict()> run;
    };
    const std::vector<Item> items = {
        {"analytic spectrum oracle", c1_spectrum_oracle},
        {"eigendecomposition certificates", c2_certificates},
        {"first moment bound", c3_first_moment},
        {"second moment bound and dyadic ratio", c4_second_moment},
        {"gap census with degenerate control", c5_gap_census},
        {"interval cover", c6_cover},
        {"regularity verdicts vs dense oracle", c7_regularity_oracle},
        {"two box event trend", c8_two_box_trend},
        {"thin centers trend", c9_thin_trend},
        {"center repulsion", c10_repulsion},
        {"tail mass bound", c11_tail_mass},
        {"restriction witness", c12_witness},
        {"reproducibility across workers", c13_reproducibility},
    };
    int failures = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        Verdict v;
        try {
            v = items[i].run();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        if (!v.pass) ++failures;
        std::printf("[%s] criterion %2zu: %s (%s)\n", v.pass ? "PASS" : "FAIL", i + 1,
                    items[i].name, v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/13 criteria passed\n", 13 - failures);
    return failures == 0 ? 0 : 1;
}
