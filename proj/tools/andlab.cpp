// Command-line shell for the experiment library: one subcommand per
// experiment kind plus `verify` and `report`. Values come from a JSON config
// file, then ANDLAB_* environment overrides, then flags, in that order.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "andlab/config.hpp"
#include "andlab/runner.hpp"

namespace {

std::string slurp_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw andlab::Error("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommonFlags {
    std::string config_path;
    long long trials = 0;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out_dir;
    bool force = false;
    bool fatal_bounds = false;
    CLI::Option* opt_trials = nullptr;
    CLI::Option* opt_seed = nullptr;
    CLI::Option* opt_workers = nullptr;
    CLI::Option* opt_out = nullptr;
};

void add_common(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--config", f.config_path, "JSON config file");
    f.opt_trials = sub->add_option("--trials", f.trials, "number of trials N");
    f.opt_seed = sub->add_option("--seed", f.seed, "master seed");
    f.opt_workers = sub->add_option("--workers", f.workers, "worker thread count");
    f.opt_out = sub->add_option("--out", f.out_dir, "output directory");
    sub->add_flag("--force", f.force, "run even when the ensemble is underpowered");
    sub->add_flag("--fatal-bounds", f.fatal_bounds,
                  "exit 4 when an estimate violates its bound");
}

void apply_env(andlab::ExperimentConfig& cfg) {
    if (const char* v = std::getenv("ANDLAB_OUT_DIR")) cfg.out_dir = v;
    if (const char* v = std::getenv("ANDLAB_WORKERS")) {
        try {
            std::size_t used = 0;
            const int w = std::stoi(v, &used);
            if (used != std::string(v).size() || w < 1) throw std::invalid_argument("");
            cfg.workers = w;
        } catch (const std::exception&) {
            throw andlab::ConfigError("workers",
                                      "ANDLAB_WORKERS must be a positive integer");
        }
    }
}

int run_kind(andlab::ExperimentKind kind, const CommonFlags& f) {
    andlab::ExperimentConfig cfg;
    cfg.experiment = kind;
    if (!f.config_path.empty()) {
        cfg = andlab::parse_config(slurp_file(f.config_path));
        if (cfg.experiment != kind)
            throw andlab::ConfigError(
                "experiment", std::string("config file says \"") +
                                  to_string(cfg.experiment) +
                                  "\" but the subcommand is \"" + to_string(kind) +
                                  "\"");
    }
    apply_env(cfg);
    if (f.opt_trials->count()) cfg.trials = f.trials;
    if (f.opt_seed->count()) cfg.seed = f.seed;
    if (f.opt_workers->count()) cfg.workers = f.workers;
    if (f.opt_out->count()) cfg.out_dir = f.out_dir;
    if (f.force) cfg.force = true;
    if (f.fatal_bounds) cfg.bound_violation_fatal = true;

    const andlab::RunReport rep = andlab::run_experiment(cfg);
    std::printf("%s: %lld trial records -> %s\n", to_string(kind),
                rep.trials_written, rep.dir.c_str());
    std::printf("config hash %s, summary %s\n", rep.hash.c_str(),
                rep.summary_path.c_str());
    for (const std::string& b : rep.violated_bounds)
        std::printf("BOUND VIOLATED: %s\n", b.c_str());
    if (rep.bound_violated() && cfg.bound_violation_fatal) return 4;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anderson model ensemble runner"};
    app.require_subcommand(1);

    struct KindCmd {
        andlab::ExperimentKind kind;
        CLI::App* sub;
        CommonFlags flags;
    };
    std::vector<KindCmd> kinds;
    kinds.reserve(16);  // option targets live inside the elements; never reallocate
    const std::pair<andlab::ExperimentKind, const char*> kind_list[] = {
        {andlab::ExperimentKind::spectrum, "full-spectrum census of one box"},
        {andlab::ExperimentKind::wegner, "P(at least one eigenvalue in J) vs the Wegner bound"},
        {andlab::ExperimentKind::minami, "P(at least two eigenvalues in J) vs the Minami bound"},
        {andlab::ExperimentKind::regularity, "Green's-function regularity frequency at one gamma"},
        {andlab::ExperimentKind::msa, "two-box regularity event frequency across scales"},
        {andlab::ExperimentKind::thin, "localized-eigenvalue frequency in thin windows across scales"},
        {andlab::ExperimentKind::repulsion, "double-occupancy census over interval covers"},
        {andlab::ExperimentKind::spacing, "unfolded level-spacing statistics"},
        {andlab::ExperimentKind::simplicity, "consecutive-gap census for spectral simplicity"},
    };
    for (const auto& [kind, help] : kind_list) {
        kinds.push_back({kind, app.add_subcommand(to_string(kind), help), {}});
        add_common(kinds.back().sub, kinds.back().flags);
    }

    std::string verify_dir;
    CLI::App* verify = app.add_subcommand("verify", "re-aggregate records and compare with the summary");
    verify->add_option("dir", verify_dir, "run output directory")->required();

    std::string report_dir, report_format = "text";
    CLI::App* report = app.add_subcommand("report", "write report.txt and plot CSVs for a run");
    report->add_option("dir", report_dir, "run output directory")->required();
    report->add_option("--format", report_format, "report format (text)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (verify->parsed()) {
            const andlab::VerifyReport v = andlab::verify_run(verify_dir);
            std::printf("status %s, %lld records\n", v.status.c_str(), v.records);
            for (const std::string& p : v.problems)
                std::printf("problem: %s\n", p.c_str());
            std::printf("verify: %s\n", v.ok ? "ok" : "FAILED");
            return v.ok ? 0 : 2;
        }
        if (report->parsed()) {
            const andlab::ReportFiles files =
                andlab::emit_report(report_dir, report_format);
            std::printf("wrote %s%s\n", files.report_path.c_str(),
                        files.partial ? " (partial)" : "");
            for (const std::string& p : files.csv_paths)
                std::printf("wrote %s\n", p.c_str());
            for (const std::string& m : files.missing)
                std::printf("missing: %s\n", m.c_str());
            return 0;
        }
        for (const KindCmd& k : kinds)
            if (k.sub->parsed()) return run_kind(k.kind, k.flags);
        return 2;  // unreachable with require_subcommand(1)
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return andlab::exit_code_for(e);
    }
}
