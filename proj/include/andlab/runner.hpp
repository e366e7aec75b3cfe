#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "andlab/config.hpp"
#include "andlab/experiments.hpp"
#include "andlab/jsonio.hpp"
#include "andlab/parallel.hpp"

namespace andlab {

constexpr const char* kArtifactVersion = "1.0.0";

inline std::string iso8601_utc_now() {
    const std::time_t t =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline JsonValue json_of_site(const Site& s) {
    JsonValue a = JsonValue::array();
    for (int v : s) a.push(v);
    return a;
}

inline JsonValue json_of_stats(const StatsSummary& s) {
    JsonValue j = JsonValue::object();
    j.set("experiment", s.experiment);
    j.set("bound_name", s.bound_name);
    if (s.scale_index >= 0) j.set("scale_index", static_cast<long long>(s.scale_index));
    j.set("scale_length", s.scale_length);
    j.set("box_sites", s.box_sites);
    j.set("lambda", s.coupling);
    j.set("window", JsonValue::array().push(s.window.a).push(s.window.b));
    j.set("trials", s.trials);
    j.set("hits", s.hits);
    j.set("p_hat", s.p_hat);
    j.set("se", s.se);
    j.set("wilson_lo", s.wilson.lo);
    j.set("wilson_hi", s.wilson.hi);
    if (!s.bound_name.empty()) {
        j.set("bound_raw", s.bound_raw);
        j.set("bound", s.bound);
        j.set("bound_capped", s.bound_capped);
        j.set("bound_informative", s.bound_informative);
        j.set("bound_satisfied", s.bound_satisfied);
    }
    if (!s.warnings.empty()) {
        JsonValue w = JsonValue::array();
        for (const std::string& msg : s.warnings) w.push(msg);
        j.set("warnings", w);
    }
    return j;
}

// Append-only line sink with per-line flush, so records written before an
// abnormal termination survive it. Safe to call from worker threads.
class JsonlWriter {
  public:
    explicit JsonlWriter(const std::string& path) : path_(path) {
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_) throw Error("cannot open " + path + " for writing");
    }
    void append(const std::string& line) {
        std::lock_guard<std::mutex> g(mu_);
        out_ << line << '\n';
        out_.flush();
        if (!out_) throw Error("failed writing " + path_);
        ++count_;
    }
    long long count() {
        std::lock_guard<std::mutex> g(mu_);
        return count_;
    }

  private:
    std::string path_;
    std::ofstream out_;
    std::mutex mu_;
    long long count_ = 0;
};

struct RunReport {
    ExperimentConfig config;
    std::string hash;
    std::string dir;
    std::string trials_path;
    std::string summary_path;
    std::string manifest_path;
    long long trials_expected = 0;
    long long trials_written = 0;
    bool complete = false;
    std::vector<std::string> violated_bounds;

    bool bound_violated() const { return !violated_bounds.empty(); }
};

namespace detail {

struct ExecOut {
    JsonValue summary = JsonValue::object();
    std::vector<std::string> violated;
    std::vector<std::string> plots;  // csv files produced alongside the records
};

inline void note_bound(const StatsSummary& s, std::vector<std::string>& violated) {
    if (s.bound_name.empty() || s.bound_satisfied) return;
    std::string tag = s.bound_name;
    if (s.scale_index >= 0) tag += " at k=" + std::to_string(s.scale_index);
    violated.push_back(tag);
}

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + p.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw Error("failed writing " + p.string());
}

inline Box config_box(const ExperimentConfig& cfg) {
    const Site origin(static_cast<std::size_t>(cfg.dimension), 0);
    return Box::centered(cfg.dimension, origin, cfg.box_side, cfg.site_cap);
}

inline JsonValue envelope(const ExperimentConfig& cfg, const std::string& hash) {
    JsonValue j = JsonValue::object();
    j.set("experiment", to_string(cfg.experiment));
    j.set("config_hash", hash);
    j.set("dimension", static_cast<long long>(cfg.dimension));
    j.set("lambda", cfg.coupling);
    j.set("trials", cfg.trials);
    j.set("seed", cfg.seed);
    return j;
}

inline JsonValue record_head(const std::string& hash, long long trial,
                             std::uint64_t seed) {
    JsonValue j = JsonValue::object();
    j.set("hash", hash);
    j.set("trial", trial);
    j.set("seed", seed);
    return j;
}

// --- spectrum: one full diagonalization per trial, free-lattice oracle at
// lambda = 0 in dimension 1.
inline void exec_spectrum(const ExperimentConfig& cfg, const std::string& hash,
                          JsonlWriter& w, ExecOut& out) {
    const Box box = config_box(cfg);
    const PotentialSpec spec = cfg.potential();
    spec.validate();
    struct Row {
        double min_e = 0.0, max_e = 0.0, min_gap = 0.0, dev = 0.0;
        bool oracle = false;
    };
    std::vector<Row> rows(static_cast<std::size_t>(cfg.trials));
    run_indexed(cfg.trials, cfg.workers, [&](long long i) {
        const std::uint64_t s = trial_seed(cfg.seed, i);
        const SpectrumSummary ss = run_spectrum(box, spec, s);
        rows[static_cast<std::size_t>(i)] = {ss.min_eigenvalue, ss.max_eigenvalue,
                                             ss.min_gap, ss.max_dev_free,
                                             ss.free_oracle};
        JsonValue line = record_head(hash, i, s);
        line.set("min_eigenvalue", ss.min_eigenvalue);
        line.set("max_eigenvalue", ss.max_eigenvalue);
        line.set("min_gap", ss.min_gap);
        line.set("free_oracle", ss.free_oracle);
        if (ss.free_oracle) line.set("max_dev_free", ss.max_dev_free);
        w.append(line.dump());
    });
    double min_e = rows.front().min_e, max_e = rows.front().max_e;
    double min_gap = rows.front().min_gap, dev = 0.0;
    for (const Row& r : rows) {
        min_e = std::min(min_e, r.min_e);
        max_e = std::max(max_e, r.max_e);
        min_gap = std::min(min_gap, r.min_gap);
        dev = std::max(dev, r.dev);
    }
    out.summary = envelope(cfg, hash);
    out.summary.set("sites", box.size());
    out.summary.set("free_oracle", rows.front().oracle);
    if (rows.front().oracle) out.summary.set("max_dev_free", dev);
    out.summary.set("min_eigenvalue", min_e);
    out.summary.set("max_eigenvalue", max_e);
    out.summary.set("min_gap", min_gap);
}

// --- wegner / minami: shared counting ensemble shape.
inline void exec_counting(const ExperimentConfig& cfg, const std::string& hash,
                          JsonlWriter& w, ExecOut& out) {
    require_powered(cfg.trials, cfg.force);
    const Box box = config_box(cfg);
    const PotentialSpec spec = cfg.potential();
    spec.validate();
    const Interval j = *cfg.window;
    CountEnsemble e;
    e.box = box;
    e.spec = spec;
    e.window = j;
    e.master_seed = cfg.seed;
    e.counts.resize(static_cast<std::size_t>(cfg.trials));
    run_indexed(cfg.trials, cfg.workers, [&](long long i) {
        const int c = window_count_trial(box, spec, j, i, cfg.seed);
        e.counts[static_cast<std::size_t>(i)] = c;
        JsonValue line = record_head(hash, i, trial_seed(cfg.seed, i));
        line.set("count", static_cast<long long>(c));
        w.append(line.dump());
    });
    const StatsSummary s = cfg.experiment == ExperimentKind::wegner
                               ? wegner_from_counts(e)
                               : minami_from_counts(e);
    note_bound(s, out.violated);
    out.summary = envelope(cfg, hash);
    out.summary.set("estimate", json_of_stats(s));
}

// --- regularity at the config's single gamma.
inline void exec_regularity(const ExperimentConfig& cfg, const std::string& hash,
                            JsonlWriter& w, ExecOut& out) {
    const Box box = config_box(cfg);
    const PotentialSpec spec = cfg.potential();
    spec.validate();
    const double energy = *cfg.energy;
    std::vector<RegularityTrialRow> rows(static_cast<std::size_t>(cfg.trials));
    run_indexed(cfg.trials, cfg.workers, [&](long long i) {
        const RegularityTrialRow row =
            regularity_trial(box, spec, energy, i, cfg.seed, cfg.tau_spec);
        rows[static_cast<std::size_t>(i)] = row;
        JsonValue line = record_head(hash, i, row.seed);
        line.set("spectrum_hit", row.spectrum_hit);
        line.set("dist_to_spectrum", row.dist_to_spectrum);
        line.set("max_boundary_green", row.max_boundary_green);
        w.append(line.dump());
    });
    long long hits = 0, spectrum_hits = 0;
    for (const RegularityTrialRow& r : rows) {
        if (r.regular_at(cfg.gamma, box.side())) ++hits;
        if (r.spectrum_hit) ++spectrum_hits;
    }
    const StatsSummary s = summarize_event("regularity", "", hits, cfg.trials, 0.0);
    out.summary = envelope(cfg, hash);
    out.summary.set("side", box.side());
    out.summary.set("energy", energy);
    out.summary.set("gamma", cfg.gamma);
    out.summary.set("threshold",
                    std::exp(-cfg.gamma * static_cast<double>(box.side()) / 2.0));
    out.summary.set("hits", hits);
    out.summary.set("spectrum_hits", spectrum_hits);
    out.summary.set("p_hat", s.p_hat);
    out.summary.set("se", s.se);
    out.summary.set("wilson_lo", s.wilson.lo);
    out.summary.set("wilson_hi", s.wilson.hi);
}

inline std::string scales_csv_name() { return "scales.csv"; }

// --- msa: per-scale sub-ensembles, two boxes per trial on one realization.
inline void exec_msa(const ExperimentConfig& cfg, const std::string& hash,
                     JsonlWriter& w, ExecOut& out,
                     const std::filesystem::path& dir) {
    const ScheduleConfig& sc = *cfg.schedule;
    const ScaleSchedule schedule =
        scale_schedule(sc.l0, sc.alpha, std::max(1, sc.k_hi), cfg.msa_p);
    const PotentialSpec spec = cfg.potential();
    spec.validate();
    const std::vector<double> energies =
        cfg.energy ? std::vector<double>{*cfg.energy}
                   : energy_grid(*cfg.window, cfg.energy_grid);
    const double p_exp = cfg.msa_p > 0.0 ? cfg.msa_p : 2.0 * cfg.dimension + 1.0;

    JsonValue scales = JsonValue::array();
    std::string csv = "k,length,trials,hits,frequency,wilson_lo,wilson_hi,target\n";
    for (int k = sc.k_lo; k <= sc.k_hi; ++k) {
        const MsaGeometry g = msa_geometry(
            schedule, k, Site(static_cast<std::size_t>(cfg.dimension), 0));
        const std::uint64_t scale_master =
            stream_seed(cfg.seed, static_cast<std::uint64_t>(k));
        std::vector<char> ok(static_cast<std::size_t>(cfg.trials), 0);
        run_indexed(cfg.trials, cfg.workers, [&](long long i) {
            const bool ev =
                msa_trial(g, spec, energies, cfg.gamma, i, scale_master, cfg.tau_spec);
            ok[static_cast<std::size_t>(i)] = ev ? 1 : 0;
            JsonValue line = record_head(hash, i, trial_seed(scale_master, i));
            line.set("k", static_cast<long long>(k));
            line.set("event", ev);
            w.append(line.dump());
        });
        long long hits = 0;
        for (char c : ok)
            if (c) ++hits;
        const double freq = static_cast<double>(hits) / static_cast<double>(cfg.trials);
        const WilsonInterval wi = wilson95(hits, cfg.trials);
        const double target = msa_target(g.length, p_exp);
        JsonValue sj = JsonValue::object();
        sj.set("k", static_cast<long long>(k));
        sj.set("length", g.length);
        sj.set("box_sites", g.box_x.size());
        sj.set("trials", cfg.trials);
        sj.set("hits", hits);
        sj.set("frequency", freq);
        sj.set("wilson_lo", wi.lo);
        sj.set("wilson_hi", wi.hi);
        sj.set("target", target);
        scales.push(sj);
        csv += std::to_string(k) + "," + std::to_string(g.length) + "," +
               std::to_string(cfg.trials) + "," + std::to_string(hits) + "," +
               fmt17(freq) + "," + fmt17(wi.lo) + "," + fmt17(wi.hi) + "," +
               fmt17(target) + "\n";
    }
    out.summary = envelope(cfg, hash);
    out.summary.set("gamma", cfg.gamma);
    out.summary.set("energies", json_of(energies));
    out.summary.set("scales", scales);
    write_text_file(dir / scales_csv_name(), csv);
    out.plots.push_back(scales_csv_name());
}

inline JsonValue json_of_thin_hit(const ThinHit& h) {
    JsonValue j = JsonValue::object();
    j.set("energy", h.energy);
    j.set("center", json_of_site(h.center));
    j.set("n_centers", h.n_centers);
    j.set("tail3", h.tail3);
    j.set("fit_ok", h.fit_ok);
    if (h.fit_ok) {
        j.set("gamma_hat", h.gamma_hat);
        j.set("fit_residual", h.fit_residual);
    }
    j.set("near_degenerate", h.near_degenerate);
    return j;
}

inline std::string stats_csv_row(int k, long long length, const StatsSummary& s) {
    return std::to_string(k) + "," + std::to_string(length) + "," +
           std::to_string(s.trials) + "," + std::to_string(s.hits) + "," +
           fmt17(s.p_hat) + "," + fmt17(s.wilson.lo) + "," + fmt17(s.wilson.hi) +
           "," + fmt17(s.bound) + "," + (s.bound_informative ? "1" : "0") + "," +
           (s.bound_satisfied ? "1" : "0") + "\n";
}

// --- thin centers: per-scale sub-ensembles with their own ambient boxes.
inline void exec_thin(const ExperimentConfig& cfg, const std::string& hash,
                      JsonlWriter& w, ExecOut& out,
                      const std::filesystem::path& dir) {
    const ScheduleConfig& sc = *cfg.schedule;
    const ScaleSchedule schedule =
        scale_schedule(sc.l0, sc.alpha, sc.k_hi + 1, cfg.msa_p);
    const PotentialSpec spec = cfg.potential();
    spec.validate();
    const ThinOptions opt{cfg.gamma_prime, cfg.c1, cfg.c2, cfg.site_cap};
    const double energy = *cfg.energy;

    JsonValue scales = JsonValue::array();
    std::string csv =
        "k,length,trials,hits,p_hat,wilson_lo,wilson_hi,bound,bound_informative,"
        "bound_satisfied\n";
    for (int k = sc.k_lo; k <= sc.k_hi; ++k) {
        const ThinScaleSetup setup =
            thin_scale_setup(schedule, k, energy, cfg.seed, opt, cfg.dimension);
        std::vector<ThinTrialOut> per(static_cast<std::size_t>(cfg.trials));
        run_indexed(cfg.trials, cfg.workers, [&](long long i) {
            ThinTrialOut t = thin_trial(setup, spec, i);
            JsonValue line = record_head(hash, i, trial_seed(setup.scale_master, i));
            line.set("k", static_cast<long long>(k));
            line.set("count", static_cast<long long>(t.count));
            if (!t.hits.empty()) {
                JsonValue hits = JsonValue::array();
                for (const ThinHit& h : t.hits) hits.push(json_of_thin_hit(h));
                line.set("hits", hits);
            }
            w.append(line.dump());
            per[static_cast<std::size_t>(i)] = std::move(t);
        });
        const ThinScale scale =
            reduce_thin_scale(setup, spec, schedule, std::move(per), cfg.dimension, opt);
        note_bound(scale.summary, out.violated);
        long long counts_total = 0;
        for (int c : scale.counts) counts_total += c;
        JsonValue sj = JsonValue::object();
        sj.set("k", static_cast<long long>(k));
        sj.set("length", scale.length);
        sj.set("ambient_side", scale.ambient_side);
        sj.set("d_k", scale.d_k);
        sj.set("counts_total", counts_total);
        sj.set("estimate", json_of_stats(scale.summary));
        scales.push(sj);
        csv += stats_csv_row(k, scale.length, scale.summary);
    }
    out.summary = envelope(cfg, hash);
    out.summary.set("energy", energy);
    out.summary.set("scales", scales);
    write_text_file(dir / scales_csv_name(), csv);
    out.plots.push_back(scales_csv_name());
}

// --- repulsion: one shared ambient ensemble; records hold the per-scale
// outcomes, the raw gap / distance pairs go to scatter.csv after the run.
inline void exec_repulsion(const ExperimentConfig& cfg, const std::string& hash,
                           JsonlWriter& w, ExecOut& out,
                           const std::filesystem::path& dir) {
    const ScheduleConfig& sc = *cfg.schedule;
    const ScaleSchedule schedule =
        scale_schedule(sc.l0, sc.alpha, sc.k_hi + 1, cfg.msa_p);
    const PotentialSpec spec = cfg.potential();
    spec.validate();
    const Interval window = *cfg.window;
    const RepulsionSetup setup = repulsion_setup(schedule, window, sc.k_lo, sc.k_hi,
                                                 cfg.ambient_side, cfg.dimension);
    std::vector<RepulsionTrial> trials(static_cast<std::size_t>(cfg.trials));
    run_indexed(cfg.trials, cfg.workers, [&](long long i) {
        RepulsionTrial t = repulsion_trial(setup, spec, window, i, cfg.seed);
        JsonValue line = record_head(hash, i, trial_seed(cfg.seed, i));
        line.set("in_window", t.in_window);
        JsonValue loc = JsonValue::array(), ev = JsonValue::array();
        for (long long v : t.localized) loc.push(v);
        for (char c : t.event) ev.push(c != 0);
        line.set("localized", loc);
        line.set("event", ev);
        line.set("n_pairs", static_cast<long long>(t.pairs.size()));
        w.append(line.dump());
        trials[static_cast<std::size_t>(i)] = std::move(t);
    });
    const std::vector<RepulsionScale> scales =
        reduce_repulsion_scales(setup, spec, window, trials, cfg.dimension);

    JsonValue scales_json = JsonValue::array();
    std::string csv =
        "k,length,trials,hits,p_hat,wilson_lo,wilson_hi,bound,bound_informative,"
        "bound_satisfied\n";
    for (const RepulsionScale& s : scales) {
        note_bound(s.summary, out.violated);
        JsonValue sj = JsonValue::object();
        sj.set("k", static_cast<long long>(s.k));
        sj.set("length", s.length);
        sj.set("d_k", s.d_k);
        sj.set("cover_size", s.cover_size);
        sj.set("estimate", json_of_stats(s.summary));
        scales_json.push(sj);
        csv += stats_csv_row(s.k, s.length, s.summary);
    }

    long long n_pairs = 0;
    for (const RepulsionTrial& t : trials)
        n_pairs += static_cast<long long>(t.pairs.size());

    out.summary = envelope(cfg, hash);
    out.summary.set("window", JsonValue::array().push(window.a).push(window.b));
    out.summary.set("ambient_side", cfg.ambient_side);
    out.summary.set("n_pairs", n_pairs);
    if (n_pairs > 0) {
        std::vector<RepulsionPair> all;
        all.reserve(static_cast<std::size_t>(n_pairs));
        for (const RepulsionTrial& t : trials)
            all.insert(all.end(), t.pairs.begin(), t.pairs.end());
        const ScatterSummary scat = scatter_summary(all);
        JsonValue sj = JsonValue::object();
        sj.set("gap_decile_cut", scat.gap_decile_cut);
        sj.set("median_distance_all", scat.median_distance_all);
        sj.set("median_distance_small_gap", scat.median_distance_small_gap);
        sj.set("small_gap_pairs", scat.small_gap_pairs);
        out.summary.set("scatter", sj);
    }
    out.summary.set("scales", scales_json);

    // trial order, so the file is identical for any worker count
    std::string scatter = "gap,center_distance\n";
    scatter.reserve(static_cast<std::size_t>(n_pairs) * 24 + 32);
    for (const RepulsionTrial& t : trials)
        for (const RepulsionPair& p : t.pairs)
            scatter += fmt17(p.gap) + "," + std::to_string(p.distance) + "\n";
    write_text_file(dir / "scatter.csv", scatter);
    out.plots.push_back("scatter.csv");
    write_text_file(dir / scales_csv_name(), csv);
    out.plots.push_back(scales_csv_name());
}

// --- spacing: unfolded level statistics over the window.
inline void exec_spacing(const ExperimentConfig& cfg, const std::string& hash,
                         JsonlWriter& w, ExecOut& out,
                         const std::filesystem::path& dir) {
    const Box box = config_box(cfg);
    const PotentialSpec spec = cfg.potential();
    spec.validate();
    const Interval window =
        cfg.window ? *cfg.window : default_spacing_window(spec, cfg.dimension);
    std::vector<std::vector<double>> spectra(static_cast<std::size_t>(cfg.trials));
    run_indexed(cfg.trials, cfg.workers, [&](long long i) {
        std::vector<double> inside = window_spectrum_trial(box, spec, window, i, cfg.seed);
        JsonValue line = record_head(hash, i, trial_seed(cfg.seed, i));
        line.set("count", static_cast<long long>(inside.size()));
        w.append(line.dump());
        spectra[static_cast<std::size_t>(i)] = std::move(inside);
    });
    long long total = 0;
    for (const auto& sp : spectra) total += static_cast<long long>(sp.size());
    const SpacingStats stats = spacing_statistics(spectra, window, cfg.spacing_windows,
                                                  cfg.bins, kMinSpacings);
    out.summary = envelope(cfg, hash);
    out.summary.set("window", JsonValue::array().push(window.a).push(window.b));
    out.summary.set("windows", static_cast<long long>(stats.windows));
    out.summary.set("bins", static_cast<long long>(cfg.bins));
    out.summary.set("total_in_window", total);
    out.summary.set("spacings", stats.spacings);
    out.summary.set("ks_exp1", stats.ks_exp1);
    out.summary.set("mle_rate", stats.mle_rate);
    JsonValue hist = JsonValue::object();
    hist.set("edges", json_of(stats.hist.edges));
    hist.set("counts", json_of(stats.hist.counts));
    hist.set("total", stats.hist.total);
    out.summary.set("histogram", hist);

    std::string csv = "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b + 1 < stats.hist.edges.size(); ++b)
        csv += fmt17(stats.hist.edges[b]) + "," + fmt17(stats.hist.edges[b + 1]) +
               "," + std::to_string(stats.hist.counts[b]) + "\n";
    write_text_file(dir / "histogram.csv", csv);
    out.plots.push_back("histogram.csv");
}

// --- simplicity: consecutive-gap census.
inline void exec_simplicity(const ExperimentConfig& cfg, const std::string& hash,
                            JsonlWriter& w, ExecOut& out) {
    const Box box = config_box(cfg);
    const PotentialSpec spec = cfg.potential();
    spec.validate();
    std::vector<GapCensusTrial> per(static_cast<std::size_t>(cfg.trials));
    run_indexed(cfg.trials, cfg.workers, [&](long long i) {
        const GapCensusTrial t = gap_census_trial(box, spec, cfg.threshold, i, cfg.seed);
        per[static_cast<std::size_t>(i)] = t;
        JsonValue line = record_head(hash, i, trial_seed(cfg.seed, i));
        line.set("min_gap", t.min_gap);
        line.set("gaps_below", t.below);
        w.append(line.dump());
    });
    double min_gap = std::numeric_limits<double>::infinity();
    long long below = 0;
    for (const GapCensusTrial& t : per) {
        min_gap = std::min(min_gap, t.min_gap);
        below += t.below;
    }
    out.summary = envelope(cfg, hash);
    out.summary.set("threshold", cfg.threshold);
    out.summary.set("min_gap", min_gap);
    out.summary.set("gaps_below", below);
}

inline long long expected_records(const ExperimentConfig& cfg) {
    if (cfg.experiment == ExperimentKind::msa || cfg.experiment == ExperimentKind::thin)
        return cfg.trials * (cfg.schedule->k_hi - cfg.schedule->k_lo + 1);
    return cfg.trials;
}

}  // namespace detail

inline RunReport run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const std::string hash = config_hash(cfg);
    namespace fs = std::filesystem;
    const fs::path dir = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
    fs::create_directories(dir);
    const fs::path trials_path = dir / "trials.jsonl";
    const fs::path summary_path = dir / "summary.json";
    const fs::path manifest_path = dir / "manifest.json";
    const std::string started = iso8601_utc_now();

    RunReport rep;
    rep.config = cfg;
    rep.hash = hash;
    rep.dir = dir.string();
    rep.trials_path = trials_path.string();
    rep.summary_path = summary_path.string();
    rep.manifest_path = manifest_path.string();
    rep.trials_expected = detail::expected_records(cfg);

    JsonlWriter writer(trials_path.string());
    detail::ExecOut out;
    std::exception_ptr failure;
    std::string failure_text;
    try {
        using K = ExperimentKind;
        switch (cfg.experiment) {
            case K::spectrum: detail::exec_spectrum(cfg, hash, writer, out); break;
            case K::wegner:
            case K::minami: detail::exec_counting(cfg, hash, writer, out); break;
            case K::regularity: detail::exec_regularity(cfg, hash, writer, out); break;
            case K::msa: detail::exec_msa(cfg, hash, writer, out, dir); break;
            case K::thin: detail::exec_thin(cfg, hash, writer, out, dir); break;
            case K::repulsion: detail::exec_repulsion(cfg, hash, writer, out, dir); break;
            case K::spacing: detail::exec_spacing(cfg, hash, writer, out, dir); break;
            case K::simplicity: detail::exec_simplicity(cfg, hash, writer, out); break;
        }
    } catch (const std::exception& e) {
        failure = std::current_exception();
        failure_text = e.what();
    } catch (...) {
        failure = std::current_exception();
        failure_text = "unknown failure";
    }

    const bool ok = !failure;
    if (ok) detail::write_text_file(summary_path, out.summary.dump() + "\n");

    // The manifest is written exactly once, at termination, whatever happened.
    JsonValue man = JsonValue::object();
    man.set("artifact_version", kArtifactVersion);
    man.set("experiment", to_string(cfg.experiment));
    man.set("config_hash", hash);
    man.set("config", config_to_json(cfg));
    man.set("started_at", started);
    man.set("finished_at", iso8601_utc_now());
    man.set("trials_expected", rep.trials_expected);
    man.set("trials_written", writer.count());
    man.set("status", ok ? "complete" : "incomplete");
    if (!ok) man.set("error", failure_text);
    JsonValue files = JsonValue::object();
    files.set("trials", "trials.jsonl");
    if (ok) files.set("summary", "summary.json");
    if (!out.plots.empty()) {
        JsonValue plots = JsonValue::array();
        for (const std::string& p : out.plots) plots.push(p);
        files.set("plots", plots);
    }
    man.set("files", files);
    if (!out.violated.empty()) {
        JsonValue v = JsonValue::array();
        for (const std::string& b : out.violated) v.push(b);
        man.set("violated_bounds", v);
    }
    detail::write_text_file(manifest_path, man.dump() + "\n");

    if (!ok) std::rethrow_exception(failure);
    rep.trials_written = writer.count();
    rep.complete = true;
    rep.violated_bounds = out.violated;
    return rep;
}

// ---------------------------------------------------------------------------
// verify: re-aggregate persisted records and compare against the summary.

struct VerifyReport {
    bool ok = false;
    std::string status;
    std::string experiment;
    long long records = 0;
    std::vector<std::string> problems;
};

namespace detail {

inline nlohmann::json read_json_file(const std::filesystem::path& p,
                                     const std::string& what) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(what + " not found: " + p.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(what + " is not valid JSON: " + e.what());
    }
    return j;
}

inline std::vector<nlohmann::json> read_records(const std::filesystem::path& p,
                                                std::vector<std::string>& problems) {
    std::vector<nlohmann::json> recs;
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        problems.push_back("trial file missing: " + p.string());
        return recs;
    }
    std::string line;
    long long ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        try {
            recs.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            problems.push_back("record line " + std::to_string(ln) +
                               " unparseable: " + e.what());
        }
    }
    return recs;
}

inline void check_eq(long long got, long long want, const std::string& what,
                     std::vector<std::string>& problems) {
    if (got != want)
        problems.push_back(what + ": recount " + std::to_string(got) +
                           " != summary " + std::to_string(want));
}

}  // namespace detail

inline VerifyReport verify_run(const std::string& dir_in) {
    namespace fs = std::filesystem;
    const fs::path dir(dir_in);
    VerifyReport rep;
    const nlohmann::json man = detail::read_json_file(dir / "manifest.json", "manifest");
    rep.status = man.value("status", "");
    rep.experiment = man.value("experiment", "");
    const std::string hash = man.value("config_hash", "");
    const long long written = man.value("trials_written", -1LL);

    std::vector<nlohmann::json> recs =
        detail::read_records(dir / "trials.jsonl", rep.problems);
    rep.records = static_cast<long long>(recs.size());
    if (rep.records != written)
        rep.problems.push_back("record count " + std::to_string(rep.records) +
                               " != manifest trials_written " + std::to_string(written));

    std::set<std::pair<long long, long long>> keys;  // (k or -1, trial)
    for (const nlohmann::json& r : recs) {
        if (r.value("hash", "") != hash)
            rep.problems.push_back("record with foreign config hash at trial " +
                                   std::to_string(r.value("trial", -1LL)));
        const long long k = r.contains("k") ? r["k"].get<long long>() : -1;
        const long long trial = r.value("trial", -1LL);
        if (!keys.insert({k, trial}).second)
            rep.problems.push_back("duplicate record key (k=" + std::to_string(k) +
                                   ", trial=" + std::to_string(trial) + ")");
    }

    if (rep.status == "complete") {
        const nlohmann::json sum =
            detail::read_json_file(dir / "summary.json", "summary");
        const std::string kind = sum.value("experiment", "");
        if (kind != rep.experiment)
            rep.problems.push_back("summary experiment \"" + kind +
                                   "\" != manifest \"" + rep.experiment + "\"");
        if (kind == "wegner" || kind == "minami") {
            const int need = kind == "wegner" ? 1 : 2;
            long long hits = 0;
            for (const auto& r : recs)
                if (r.value("count", 0LL) >= need) ++hits;
            detail::check_eq(hits, sum["estimate"].value("hits", -1LL), "hits",
                             rep.problems);
            detail::check_eq(rep.records, sum["estimate"].value("trials", -1LL),
                             "trials", rep.problems);
        } else if (kind == "regularity") {
            const double gamma = sum.value("gamma", 0.0);
            const long long side = sum.value("side", 0LL);
            const double threshold =
                std::exp(-gamma * static_cast<double>(side) / 2.0);
            long long hits = 0;
            for (const auto& r : recs)
                if (!r.value("spectrum_hit", false) &&
                    r.value("max_boundary_green", 0.0) <= threshold)
                    ++hits;
            detail::check_eq(hits, sum.value("hits", -1LL), "hits", rep.problems);
        } else if (kind == "msa") {
            for (const auto& sj : sum["scales"]) {
                const long long k = sj.value("k", -1LL);
                long long hits = 0, n = 0;
                for (const auto& r : recs)
                    if (r.contains("k") && r["k"].get<long long>() == k) {
                        ++n;
                        if (r.value("event", false)) ++hits;
                    }
                detail::check_eq(hits, sj.value("hits", -1LL),
                                 "hits at k=" + std::to_string(k), rep.problems);
                detail::check_eq(n, sj.value("trials", -1LL),
                                 "trials at k=" + std::to_string(k), rep.problems);
            }
        } else if (kind == "thin") {
            for (const auto& sj : sum["scales"]) {
                const long long k = sj.value("k", -1LL);
                long long hits = 0, n = 0, counts = 0;
                for (const auto& r : recs)
                    if (r.contains("k") && r["k"].get<long long>() == k) {
                        ++n;
                        const long long c = r.value("count", 0LL);
                        counts += c;
                        if (c > 0) ++hits;
                    }
                detail::check_eq(hits, sj["estimate"].value("hits", -1LL),
                                 "hits at k=" + std::to_string(k), rep.problems);
                detail::check_eq(counts, sj.value("counts_total", -1LL),
                                 "counts at k=" + std::to_string(k), rep.problems);
                detail::check_eq(n, sj["estimate"].value("trials", -1LL),
                                 "trials at k=" + std::to_string(k), rep.problems);
            }
        } else if (kind == "repulsion") {
            long long pairs = 0;
            for (const auto& r : recs) pairs += r.value("n_pairs", 0LL);
            detail::check_eq(pairs, sum.value("n_pairs", -1LL), "pairs", rep.problems);
            std::size_t slot = 0;
            for (const auto& sj : sum["scales"]) {
                long long hits = 0;
                for (const auto& r : recs) {
                    const auto& ev = r["event"];
                    if (slot < ev.size() && ev[slot].get<bool>()) ++hits;
                }
                detail::check_eq(hits, sj["estimate"].value("hits", -1LL),
                                 "hits at k=" + std::to_string(sj.value("k", -1LL)),
                                 rep.problems);
                ++slot;
            }
        } else if (kind == "spacing") {
            long long total = 0;
            for (const auto& r : recs) total += r.value("count", 0LL);
            detail::check_eq(total, sum.value("total_in_window", -1LL),
                             "window count", rep.problems);
            long long hist_total = 0;
            for (const auto& c : sum["histogram"]["counts"])
                hist_total += c.get<long long>();
            detail::check_eq(hist_total, sum.value("spacings", -1LL),
                             "histogram mass", rep.problems);
        } else if (kind == "simplicity") {
            long long below = 0;
            for (const auto& r : recs) below += r.value("gaps_below", 0LL);
            detail::check_eq(below, sum.value("gaps_below", -1LL), "gaps below",
                             rep.problems);
        } else if (kind == "spectrum") {
            detail::check_eq(rep.records, sum.value("trials", -1LL), "trials",
                             rep.problems);
            if (sum.value("free_oracle", false)) {
                double dev = 0.0;
                for (const auto& r : recs)
                    dev = std::max(dev, r.value("max_dev_free", 0.0));
                if (dev != sum.value("max_dev_free", -1.0))
                    rep.problems.push_back("max free deviation recount differs");
            }
        } else {
            rep.problems.push_back("unknown experiment kind in summary: " + kind);
        }
    }

    rep.ok = rep.problems.empty();
    return rep;
}

// ---------------------------------------------------------------------------
// report: human-readable table plus plot-ready CSV columns.

struct ReportFiles {
    std::string report_path;
    std::vector<std::string> csv_paths;
    bool partial = false;
    std::vector<std::string> missing;
};

namespace detail {

inline std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string stats_block(const nlohmann::json& e) {
    std::string t;
    t += "  trials: " + std::to_string(e.value("trials", 0LL)) +
         "   hits: " + std::to_string(e.value("hits", 0LL)) + "\n";
    t += "  p_hat: " + fmt6(e.value("p_hat", 0.0)) + "   wilson 95%: [" +
         fmt6(e.value("wilson_lo", 0.0)) + ", " + fmt6(e.value("wilson_hi", 0.0)) +
         "]\n";
    if (e.contains("bound")) {
        t += "  bound (" + e.value("bound_name", std::string()) +
             "): " + fmt6(e.value("bound", 0.0)) +
             (e.value("bound_capped", false) ? " (capped)" : "") +
             "   informative: " + (e.value("bound_informative", false) ? "yes" : "no") +
             "   satisfied: " + (e.value("bound_satisfied", false) ? "yes" : "no") +
             "\n";
    }
    if (e.contains("warnings"))
        for (const auto& wmsg : e["warnings"])
            t += "  warning: " + wmsg.get<std::string>() + "\n";
    return t;
}

inline std::string scale_table(const nlohmann::json& scales, bool msa) {
    std::string t = msa ? "   k  length   trials    hits  frequency  wilson_lo  "
                          "wilson_hi  target\n"
                        : "   k  length   trials    hits  p_hat      wilson_lo  "
                          "wilson_hi  bound      ok\n";
    for (const auto& sj : scales) {
        const nlohmann::json& e = msa ? sj : sj["estimate"];
        char buf[160];
        if (msa) {
            std::snprintf(buf, sizeof buf,
                          "%4lld  %6lld  %7lld  %6lld  %-9.6g  %-9.6g  %-9.6g  %.6g\n",
                          sj.value("k", 0LL), sj.value("length", 0LL),
                          e.value("trials", 0LL), e.value("hits", 0LL),
                          e.value("frequency", 0.0), e.value("wilson_lo", 0.0),
                          e.value("wilson_hi", 0.0), e.value("target", 0.0));
        } else {
            std::snprintf(buf, sizeof buf,
                          "%4lld  %6lld  %7lld  %6lld  %-9.6g  %-9.6g  %-9.6g  %-9.6g  %s\n",
                          sj.value("k", 0LL), sj.value("length", 0LL),
                          e.value("trials", 0LL), e.value("hits", 0LL),
                          e.value("p_hat", 0.0), e.value("wilson_lo", 0.0),
                          e.value("wilson_hi", 0.0), e.value("bound", 0.0),
                          e.value("bound_satisfied", false) ? "yes" : "NO");
        }
        t += buf;
    }
    return t;
}

}  // namespace detail

inline ReportFiles emit_report(const std::string& dir_in,
                               const std::string& format = "text") {
    if (format != "text")
        throw ConfigError("format", "only \"text\" reports are available");
    namespace fs = std::filesystem;
    const fs::path dir(dir_in);
    const nlohmann::json man = detail::read_json_file(dir / "manifest.json", "manifest");
    const long long written = man.value("trials_written", 0LL);
    if (written <= 0) throw Error("no trials");

    ReportFiles out;
    const std::string kind = man.value("experiment", "");
    const std::string status = man.value("status", "");

    std::vector<std::string> missing_problems;
    const std::vector<nlohmann::json> recs =
        detail::read_records(dir / "trials.jsonl", missing_problems);
    if (!missing_problems.empty()) {
        out.partial = true;
        out.missing.push_back("trials.jsonl");
    } else if (static_cast<long long>(recs.size()) < written) {
        out.partial = true;
        out.missing.push_back("trials.jsonl (" + std::to_string(recs.size()) + " of " +
                              std::to_string(written) + " records)");
    }

    nlohmann::json sum;
    bool have_summary = false;
    if (status == "complete") {
        try {
            sum = detail::read_json_file(dir / "summary.json", "summary");
            have_summary = true;
        } catch (const Error&) {
            out.partial = true;
            out.missing.push_back("summary.json");
        }
    } else {
        out.partial = true;
    }

    std::string t;
    t += "experiment: " + kind + "\n";
    t += "status: " + status + (out.partial ? " (report partial)" : "") + "\n";
    t += "config hash: " + man.value("config_hash", std::string()) + "\n";
    t += "records: " + std::to_string(recs.size()) + " of " + std::to_string(written) +
         " written, " + std::to_string(man.value("trials_expected", 0LL)) +
         " expected\n";
    for (const std::string& m : out.missing) t += "missing: " + m + "\n";
    if (man.contains("violated_bounds"))
        for (const auto& b : man["violated_bounds"])
            t += "VIOLATED BOUND: " + b.get<std::string>() + "\n";

    auto csv_path = [&](const char* name) { return dir / name; };
    if (have_summary) {
        if (kind == "wegner" || kind == "minami") {
            t += detail::stats_block(sum["estimate"]);
            const nlohmann::json& e = sum["estimate"];
            std::string csv =
                "trials,hits,p_hat,se,wilson_lo,wilson_hi,bound_raw,bound,"
                "bound_satisfied\n";
            csv += std::to_string(e.value("trials", 0LL)) + "," +
                   std::to_string(e.value("hits", 0LL)) + "," +
                   fmt17(e.value("p_hat", 0.0)) + "," + fmt17(e.value("se", 0.0)) +
                   "," + fmt17(e.value("wilson_lo", 0.0)) + "," +
                   fmt17(e.value("wilson_hi", 0.0)) + "," +
                   fmt17(e.value("bound_raw", 0.0)) + "," +
                   fmt17(e.value("bound", 0.0)) + "," +
                   (e.value("bound_satisfied", false) ? "1" : "0") + "\n";
            detail::write_text_file(csv_path("estimate.csv"), csv);
            out.csv_paths.push_back((dir / "estimate.csv").string());
        } else if (kind == "regularity") {
            t += "  side: " + std::to_string(sum.value("side", 0LL)) +
                 "   energy: " + detail::fmt6(sum.value("energy", 0.0)) +
                 "   gamma: " + detail::fmt6(sum.value("gamma", 0.0)) + "\n";
            t += "  regular: " + std::to_string(sum.value("hits", 0LL)) + " of " +
                 std::to_string(sum.value("trials", 0LL)) + "  (p_hat " +
                 detail::fmt6(sum.value("p_hat", 0.0)) + ", wilson [" +
                 detail::fmt6(sum.value("wilson_lo", 0.0)) + ", " +
                 detail::fmt6(sum.value("wilson_hi", 0.0)) + "])\n";
            t += "  spectrum hits: " + std::to_string(sum.value("spectrum_hits", 0LL)) +
                 "\n";
            std::string csv = "side,energy,gamma,trials,hits,p_hat,wilson_lo,wilson_hi\n";
            csv += std::to_string(sum.value("side", 0LL)) + "," +
                   fmt17(sum.value("energy", 0.0)) + "," +
                   fmt17(sum.value("gamma", 0.0)) + "," +
                   std::to_string(sum.value("trials", 0LL)) + "," +
                   std::to_string(sum.value("hits", 0LL)) + "," +
                   fmt17(sum.value("p_hat", 0.0)) + "," +
                   fmt17(sum.value("wilson_lo", 0.0)) + "," +
                   fmt17(sum.value("wilson_hi", 0.0)) + "\n";
            detail::write_text_file(csv_path("estimate.csv"), csv);
            out.csv_paths.push_back((dir / "estimate.csv").string());
        } else if (kind == "msa" || kind == "thin" || kind == "repulsion") {
            t += detail::scale_table(sum["scales"], kind == "msa");
            if (kind == "repulsion" && sum.contains("scatter")) {
                const nlohmann::json& s = sum["scatter"];
                t += "  pairs: " + std::to_string(sum.value("n_pairs", 0LL)) +
                     "   median distance: all " +
                     detail::fmt6(s.value("median_distance_all", 0.0)) +
                     ", smallest-decile gaps " +
                     detail::fmt6(s.value("median_distance_small_gap", 0.0)) + "\n";
            }
            if (!fs::exists(dir / "scales.csv")) {
                out.partial = true;
                out.missing.push_back("scales.csv");
                t += "missing: scales.csv\n";
            } else {
                out.csv_paths.push_back((dir / "scales.csv").string());
            }
            if (kind == "repulsion") {
                if (!fs::exists(dir / "scatter.csv")) {
                    out.partial = true;
                    out.missing.push_back("scatter.csv");
                    t += "missing: scatter.csv\n";
                } else {
                    out.csv_paths.push_back((dir / "scatter.csv").string());
                }
            }
        } else if (kind == "spacing") {
            t += "  spacings: " + std::to_string(sum.value("spacings", 0LL)) +
                 "   KS vs Exp(1): " + detail::fmt6(sum.value("ks_exp1", 0.0)) +
                 "   MLE rate: " + detail::fmt6(sum.value("mle_rate", 0.0)) + "\n";
            std::string csv = "bin_lo,bin_hi,count\n";
            const auto& edges = sum["histogram"]["edges"];
            const auto& counts = sum["histogram"]["counts"];
            for (std::size_t b = 0; b < counts.size(); ++b)
                csv += fmt17(edges[b].get<double>()) + "," +
                       fmt17(edges[b + 1].get<double>()) + "," +
                       std::to_string(counts[b].get<long long>()) + "\n";
            detail::write_text_file(csv_path("histogram.csv"), csv);
            out.csv_paths.push_back((dir / "histogram.csv").string());
        } else if (kind == "simplicity") {
            t += "  threshold: " + detail::fmt6(sum.value("threshold", 0.0)) +
                 "   min gap: " + detail::fmt6(sum.value("min_gap", 0.0)) +
                 "   gaps below: " + std::to_string(sum.value("gaps_below", 0LL)) +
                 "\n";
        } else if (kind == "spectrum") {
            t += "  sites: " + std::to_string(sum.value("sites", 0LL)) +
                 "   spectrum: [" + detail::fmt6(sum.value("min_eigenvalue", 0.0)) +
                 ", " + detail::fmt6(sum.value("max_eigenvalue", 0.0)) +
                 "]   min gap: " + detail::fmt6(sum.value("min_gap", 0.0)) + "\n";
            if (sum.value("free_oracle", false))
                t += "  max deviation from the free-lattice oracle: " +
                     detail::fmt6(sum.value("max_dev_free", 0.0)) + "\n";
        }
    } else {
        t += "summary unavailable; counts above come from the manifest only\n";
    }

    detail::write_text_file(dir / "report.txt", t);
    out.report_path = (dir / "report.txt").string();
    return out;
}

// Exit-code policy: 2 for anything the configuration caused (including bad
// preconditions detected mid-setup), 3 for numerical backend failures, 1 for
// everything unforeseen. Bound violations are handled by the caller, which
// sees the run report and the bound_violation_fatal flag.
inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const SolverFailure*>(&e)) return 3;
    if (dynamic_cast<const ResolventSingular*>(&e)) return 3;
    if (dynamic_cast<const Error*>(&e)) return 2;
    return 1;
}

}  // namespace andlab
