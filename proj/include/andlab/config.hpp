#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "andlab/errors.hpp"
#include "andlab/experiments.hpp"
#include "andlab/jsonio.hpp"
#include "andlab/lattice.hpp"
#include "andlab/regularity.hpp"
#include "andlab/spectral.hpp"

namespace andlab {

enum class ExperimentKind {
    spectrum,
    wegner,
    minami,
    regularity,
    msa,
    thin,
    repulsion,
    spacing,
    simplicity,
};

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::spectrum: return "spectrum";
        case ExperimentKind::wegner: return "wegner";
        case ExperimentKind::minami: return "minami";
        case ExperimentKind::regularity: return "regularity";
        case ExperimentKind::msa: return "msa";
        case ExperimentKind::thin: return "thin";
        case ExperimentKind::repulsion: return "repulsion";
        case ExperimentKind::spacing: return "spacing";
        case ExperimentKind::simplicity: return "simplicity";
    }
    return "spectrum";
}

inline ExperimentKind experiment_kind_of(const std::string& name) {
    for (ExperimentKind k :
         {ExperimentKind::spectrum, ExperimentKind::wegner, ExperimentKind::minami,
          ExperimentKind::regularity, ExperimentKind::msa, ExperimentKind::thin,
          ExperimentKind::repulsion, ExperimentKind::spacing,
          ExperimentKind::simplicity})
        if (name == to_string(k)) return k;
    throw ConfigError("experiment",
                      "unknown kind \"" + name +
                          "\"; expected one of spectrum, wegner, minami, regularity, "
                          "msa, thin, repulsion, spacing, simplicity");
}

struct ScheduleConfig {
    long long l0 = 7;
    double alpha = 1.3;
    int k_lo = 0;
    int k_hi = 0;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::spectrum;
    int dimension = 1;
    long long box_side = 0;      // primary box for single-box experiments
    long long ambient_side = 0;  // repulsion ambient; optional elsewhere
    double coupling = 1.0;
    std::string law = "uniform";
    double support_a = 0.0;
    double support_b = 1.0;
    std::optional<Interval> window;  // J or I, depending on the experiment
    std::optional<double> energy;    // E for thin / regularity / msa
    int energy_grid = 32;            // msa grid density over a window
    std::optional<ScheduleConfig> schedule;
    double gamma = kDefaultGamma;
    double gamma_prime = kDefaultGammaPrime;
    double msa_p = 0.0;  // 0 means the 2d+1 default
    double c1 = kDefaultC1;
    double c2 = kDefaultC2;
    double tau_center = kDefaultTauCenter;
    double tau_spec = kDefaultTauSpec;
    double threshold = kNearDegenerateGap;  // simplicity gap census
    int spacing_windows = kDefaultSpacingWindows;
    int bins = kDefaultHistogramBins;
    long long trials = 10000;
    std::uint64_t seed = 0;
    int workers = 1;
    long long site_cap = default_site_cap();
    std::string out_dir = "results";
    bool bound_violation_fatal = false;
    bool force = false;

    PotentialSpec potential() const {
        return PotentialSpec{DisorderLaw::uniform, support_a, support_b, coupling};
    }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                           const std::string& scope) {
    for (const auto& kv : j.items())
        if (!known.count(kv.key()))
            throw ConfigError(scope.empty() ? kv.key() : scope + "." + kv.key(),
                              "unknown key");
}

template <typename T>
T take_number(const nlohmann::json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number())
        throw ConfigError(key, "expected a number");
    return v.get<T>();
}

inline bool take_bool(const nlohmann::json& j, const std::string& key, bool fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) throw ConfigError(key, "expected true or false");
    return j.at(key).get<bool>();
}

inline std::string take_string(const nlohmann::json& j, const std::string& key,
                               const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) throw ConfigError(key, "expected a string");
    return j.at(key).get<std::string>();
}

}  // namespace detail

inline void validate_config(const ExperimentConfig& c) {
    using K = ExperimentKind;
    if (c.dimension < 1 || c.dimension > 3)
        throw ConfigError("dimension", "expected an integer in [1, 3]");
    if (c.support_b <= c.support_a)
        throw ConfigError("potential.b", "support needs b > a");
    if (c.law != "uniform") throw ConfigError("potential.law", "only \"uniform\" is available");
    if (c.coupling < 0.0) throw ConfigError("lambda", "expected lambda >= 0");
    if (c.trials < 1) throw ConfigError("trials", "expected at least 1");
    if (c.workers < 1) throw ConfigError("workers", "expected at least 1");
    if (c.energy_grid < 1) throw ConfigError("energy_grid", "expected at least 1");
    if (c.spacing_windows < 1) throw ConfigError("windows", "expected at least 1");
    if (c.bins < 1) throw ConfigError("bins", "expected at least 1");
    if (c.gamma <= 0.0) throw ConfigError("gamma", "expected gamma > 0");
    if (c.gamma_prime <= 0.0) throw ConfigError("gamma_prime", "expected gamma' > 0");
    if (c.c2 <= 0.0) throw ConfigError("c2", "expected C2 > 0");
    if (c.tau_center < 0.0 || c.tau_center > 1e-6)
        throw ConfigError("tau_center", "expected a value in [0, 1e-6]");
    if (c.tau_spec <= 0.0) throw ConfigError("tau_spec", "expected tau > 0");
    if (c.site_cap < 1) throw ConfigError("site_cap", "expected at least 1");

    const bool needs_box = c.experiment == K::spectrum || c.experiment == K::wegner ||
                           c.experiment == K::minami || c.experiment == K::regularity ||
                           c.experiment == K::spacing || c.experiment == K::simplicity;
    if (needs_box) {
        if (c.box_side < 1) throw ConfigError("box_side", "required and must be >= 1");
        if (c.box_side % 2 == 0) throw ConfigError("box_side", "must be odd");
    }
    const bool needs_schedule = c.experiment == K::msa || c.experiment == K::thin ||
                                c.experiment == K::repulsion;
    if (needs_schedule) {
        if (!c.schedule) throw ConfigError("schedule", "required for this experiment");
        const ScheduleConfig& s = *c.schedule;
        if (!(s.alpha > 1.0 && s.alpha < 2.0))
            throw ConfigError("alpha", "expected a value in (1, 2)");
        if (s.l0 < 3 || s.l0 % 2 == 0)
            throw ConfigError("schedule.l0", "expected an odd integer >= 3");
        if (s.k_lo > s.k_hi) throw ConfigError("schedule.k_lo", "expected k_lo <= k_hi");
        if (s.k_lo < 0) throw ConfigError("schedule.k_lo", "expected k_lo >= 0");
        if ((c.experiment == K::thin || c.experiment == K::repulsion) && s.k_lo < 1)
            throw ConfigError("schedule.k_lo", "expected k_lo >= 1 here");
    }
    if (c.experiment == K::wegner || c.experiment == K::minami ||
        c.experiment == K::repulsion) {
        if (!c.window) throw ConfigError("window", "required for this experiment");
        if (c.window->width() <= 0.0)
            throw ConfigError("window", "expected [a, b] with a < b");
    }
    if (c.experiment == K::thin && !c.energy)
        throw ConfigError("energy", "required for this experiment");
    if (c.experiment == K::regularity && !c.energy)
        throw ConfigError("energy", "required for this experiment");
    if (c.experiment == K::msa && !c.energy && !c.window)
        throw ConfigError("energy", "msa needs an energy or a window");
    if (c.experiment == K::repulsion) {
        if (c.ambient_side < 1)
            throw ConfigError("ambient_side", "required and must be >= 1");
        if (c.ambient_side % 2 == 0) throw ConfigError("ambient_side", "must be odd");
    }
    if (c.threshold < 0.0) throw ConfigError("threshold", "expected >= 0");
}

inline ExperimentConfig parse_config_json(const nlohmann::json& j) {
    using detail::reject_unknown;
    using detail::take_bool;
    using detail::take_number;
    using detail::take_string;
    if (!j.is_object()) throw ConfigError("", "top level must be a JSON object");
    reject_unknown(j,
                   {"experiment", "dimension", "box_side", "ambient_side", "lambda",
                    "potential", "window", "energy", "energy_grid", "schedule", "gamma",
                    "gamma_prime", "msa_p", "c1", "c2", "tau_center", "tau_spec",
                    "threshold", "windows", "bins", "trials", "seed", "workers",
                    "site_cap", "out_dir", "bound_violation_fatal", "force"},
                   "");
    ExperimentConfig c;
    if (!j.contains("experiment")) throw ConfigError("experiment", "required");
    c.experiment = experiment_kind_of(take_string(j, "experiment", ""));
    c.dimension = take_number<int>(j, "dimension", 1);
    c.box_side = take_number<long long>(j, "box_side", 0);
    c.ambient_side = take_number<long long>(j, "ambient_side", 0);
    c.coupling = take_number<double>(j, "lambda", 1.0);
    if (j.contains("potential")) {
        const auto& p = j.at("potential");
        if (!p.is_object()) throw ConfigError("potential", "expected an object");
        reject_unknown(p, {"law", "a", "b"}, "potential");
        c.law = take_string(p, "law", "uniform");
        c.support_a = take_number<double>(p, "a", 0.0);
        c.support_b = take_number<double>(p, "b", 1.0);
    }
    if (j.contains("window")) {
        const auto& w = j.at("window");
        if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number())
            throw ConfigError("window", "expected [a, b]");
        c.window = Interval{w[0].get<double>(), w[1].get<double>()};
    }
    if (j.contains("energy")) {
        if (!j.at("energy").is_number()) throw ConfigError("energy", "expected a number");
        c.energy = j.at("energy").get<double>();
    }
    c.energy_grid = take_number<int>(j, "energy_grid", 32);
    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        if (!s.is_object()) throw ConfigError("schedule", "expected an object");
        reject_unknown(s, {"l0", "alpha", "k_lo", "k_hi"}, "schedule");
        ScheduleConfig sc;
        sc.l0 = take_number<long long>(s, "l0", 7);
        sc.alpha = take_number<double>(s, "alpha", 1.3);
        sc.k_lo = take_number<int>(s, "k_lo", 0);
        sc.k_hi = take_number<int>(s, "k_hi", sc.k_lo);
        c.schedule = sc;
    }
    c.gamma = take_number<double>(j, "gamma", kDefaultGamma);
    c.gamma_prime = take_number<double>(j, "gamma_prime", kDefaultGammaPrime);
    c.msa_p = take_number<double>(j, "msa_p", 0.0);
    c.c1 = take_number<double>(j, "c1", kDefaultC1);
    c.c2 = take_number<double>(j, "c2", kDefaultC2);
    c.tau_center = take_number<double>(j, "tau_center", kDefaultTauCenter);
    c.tau_spec = take_number<double>(j, "tau_spec", kDefaultTauSpec);
    c.threshold = take_number<double>(j, "threshold", kNearDegenerateGap);
    c.spacing_windows = take_number<int>(j, "windows", kDefaultSpacingWindows);
    c.bins = take_number<int>(j, "bins", kDefaultHistogramBins);
    c.trials = take_number<long long>(j, "trials", 10000);
    c.seed = take_number<std::uint64_t>(j, "seed", 0);
    c.workers = take_number<int>(j, "workers", 1);
    c.site_cap = take_number<long long>(j, "site_cap", default_site_cap());
    c.out_dir = take_string(j, "out_dir", "results");
    c.bound_violation_fatal = take_bool(j, "bound_violation_fatal", false);
    c.force = take_bool(j, "force", false);
    validate_config(c);
    return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("", std::string("not valid JSON: ") + e.what());
    }
    return parse_config_json(j);
}

// Canonical JSON form; parse(serialize(c)) == c field for field.
inline JsonValue config_to_json(const ExperimentConfig& c) {
    JsonValue j = JsonValue::object();
    j.set("experiment", to_string(c.experiment));
    j.set("dimension", static_cast<long long>(c.dimension));
    if (c.box_side > 0) j.set("box_side", c.box_side);
    if (c.ambient_side > 0) j.set("ambient_side", c.ambient_side);
    j.set("lambda", c.coupling);
    j.set("potential", JsonValue::object()
                           .set("law", c.law)
                           .set("a", c.support_a)
                           .set("b", c.support_b));
    if (c.window)
        j.set("window", JsonValue::array().push(c.window->a).push(c.window->b));
    if (c.energy) j.set("energy", *c.energy);
    j.set("energy_grid", static_cast<long long>(c.energy_grid));
    if (c.schedule)
        j.set("schedule", JsonValue::object()
                              .set("l0", c.schedule->l0)
                              .set("alpha", c.schedule->alpha)
                              .set("k_lo", static_cast<long long>(c.schedule->k_lo))
                              .set("k_hi", static_cast<long long>(c.schedule->k_hi)));
    j.set("gamma", c.gamma);
    j.set("gamma_prime", c.gamma_prime);
    j.set("msa_p", c.msa_p);
    j.set("c1", c.c1);
    j.set("c2", c.c2);
    j.set("tau_center", c.tau_center);
    j.set("tau_spec", c.tau_spec);
    j.set("threshold", c.threshold);
    j.set("windows", static_cast<long long>(c.spacing_windows));
    j.set("bins", static_cast<long long>(c.bins));
    j.set("trials", c.trials);
    j.set("seed", c.seed);
    j.set("workers", static_cast<long long>(c.workers));
    j.set("site_cap", c.site_cap);
    j.set("out_dir", c.out_dir);
    j.set("bound_violation_fatal", c.bound_violation_fatal);
    j.set("force", c.force);
    return j;
}

inline std::string serialize_config(const ExperimentConfig& c) {
    return config_to_json(c).dump();
}

// Hash over the result-determining fields only: worker count and output
// location never change what gets computed, so summaries stay byte-identical
// across pool sizes and directories.
inline std::string config_hash(const ExperimentConfig& c) {
    ExperimentConfig canon = c;
    canon.workers = 1;
    canon.out_dir = "";
    return hex64(fnv1a(serialize_config(canon)));
}

}  // namespace andlab
