// trajmine: mines temporally ordered condition trajectories from longitudinal
// diagnosis records and clusters them by condition-network similarity.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "trajmine/pipeline.hpp"
#include "trajmine/synth.hpp"

namespace {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

struct GlobalOptions {
    std::string config_path;
    std::string input_dir = ".";
    std::string out_dir = "out";
    std::string stratum = "all";
    std::string format = "csv";
    std::string log_level = "info";
    std::uint64_t seed = 0;
    bool seed_given = false;
};

LogLevel parse_log_level(const std::string& s) {
    if (s == "error") return LogLevel::error;
    if (s == "warn") return LogLevel::warn;
    if (s == "debug") return LogLevel::debug;
    return LogLevel::info;
}

struct Cli {
    GlobalOptions opts;
    LogLevel level = LogLevel::info;

    trajmine::PipelineConfig config() const {
        trajmine::PipelineConfig cfg;
        if (!opts.config_path.empty()) cfg = trajmine::load_config(opts.config_path);
        if (opts.seed_given) cfg.seed = opts.seed;
        return cfg;
    }

    trajmine::StratumFilter filter() const {
        auto f = trajmine::parse_stratum_filter(opts.stratum);
        if (!f)
            throw CLI::ValidationError(
                "--stratum", "expected male_lt45|male_ge45|female_lt45|female_ge45|all");
        return *f;
    }

    trajmine::OutputFormat format() const {
        if (opts.format == "json") return trajmine::OutputFormat::json;
        if (opts.format == "csv") return trajmine::OutputFormat::csv;
        throw CLI::ValidationError("--format", "expected csv|json");
    }

    void info(const std::string& msg) const {
        if (level >= LogLevel::info) std::cerr << "[info] " << msg << "\n";
    }
    void warn(const std::string& msg) const {
        if (level >= LogLevel::warn) std::cerr << "[warn] " << msg << "\n";
    }
};

void add_common(CLI::App* cmd, GlobalOptions& opts, bool needs_input = true) {
    cmd->add_option("--config", opts.config_path, "Pipeline config file (key=value lines)");
    if (needs_input)
        cmd->add_option("--input", opts.input_dir,
                        "Directory with patients/diagnoses/hospital_stays/catalog CSVs");
    cmd->add_option("--out", opts.out_dir, "Output directory for stage artifacts");
    cmd->add_option("--stratum", opts.stratum,
                    "male_lt45|male_ge45|female_lt45|female_ge45|all");
    cmd->add_option("--format", opts.format, "csv|json (json mirrors report CSVs)");
    cmd->add_option("--log-level", opts.log_level, "error|warn|info|debug");
    cmd->add_option("--seed", opts.seed, "Overrides the config seed")
        ->each([&opts](const std::string&) { opts.seed_given = true; });
}

void report_warnings(const Cli& cli, const trajmine::PipelineContext& ctx) {
    if (ctx.cohort.dropped_out_of_window > 0)
        cli.warn(std::to_string(ctx.cohort.dropped_out_of_window) +
                 " diagnosis events outside the study window were dropped");
    if (ctx.stratified.zero_event_patients > 0)
        cli.warn(std::to_string(ctx.stratified.zero_event_patients) +
                 " patients without diagnosis events (age anchored at study end)");
}

// Runs one per-stratum stage for every selected stratum; returns exit code.
template <typename StageFn>
int run_stage(const Cli& cli, const std::string& stage_name, StageFn&& stage) {
    const auto cfg = cli.config();
    const auto filter = cli.filter();
    trajmine::PipelineContext ctx =
        trajmine::make_context(cfg, cli.opts.input_dir, cli.opts.out_dir);
    report_warnings(cli, ctx);
    int failures = 0;
    for (const auto& stratum : ctx.stratified.strata) {
        if (!trajmine::stratum_selected(filter, stratum.sex, stratum.age_group)) continue;
        const std::string name = trajmine::stratum_name(stratum.sex, stratum.age_group);
        try {
            for (const auto& rec : stage(ctx, stratum))
                cli.info(stage_name + " " + name + ": wrote " + rec.file + " (" +
                         std::to_string(rec.rows) + " rows)");
        } catch (const std::exception& e) {
            std::cerr << "[error] " << stage_name << " " << name << ": " << e.what() << "\n";
            ++failures;
        }
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal multimorbidity trajectory mining and clustering"};
    app.require_subcommand(1);

    Cli cli;
    std::string synth_spec_path;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort from a spec file");
    synth->add_option("--spec", synth_spec_path, "Synthetic cohort spec (key/value + [archetype] tables)")
        ->required();
    add_common(synth, cli.opts, /*needs_input=*/false);

    auto* describe = app.add_subcommand("describe", "Cohort descriptive statistics");
    add_common(describe, cli.opts);
    auto* pairs = app.add_subcommand("pairs", "Association and direction tests per condition pair");
    add_common(pairs, cli.opts);
    auto* trajectories = app.add_subcommand("trajectories", "Compose and count shared trajectories");
    add_common(trajectories, cli.opts);
    auto* network = app.add_subcommand("network", "Condition network and trajectory similarity matrix");
    add_common(network, cli.opts);
    auto* cluster = app.add_subcommand("cluster", "Spectral clustering with CH model selection");
    add_common(cluster, cli.opts);
    auto* report = app.add_subcommand("report", "Per-cluster summaries");
    add_common(report, cli.opts);
    auto* run = app.add_subcommand("run", "Full pipeline: describe through report");
    add_common(run, cli.opts);

    CLI11_PARSE(app, argc, argv);
    cli.level = parse_log_level(cli.opts.log_level);

    try {
        if (synth->parsed()) {
            const auto spec = trajmine::parse_synth_spec(synth_spec_path);
            const auto summary = trajmine::generate_cohort(spec, cli.opts.out_dir);
            cli.info("synth: wrote " + std::to_string(summary.patients) + " patients, " +
                     std::to_string(summary.events) + " events, " +
                     std::to_string(summary.stays) + " stays to " + cli.opts.out_dir);
            return 0;
        }
        if (describe->parsed()) {
            trajmine::PipelineContext ctx =
                trajmine::make_context(cli.config(), cli.opts.input_dir, cli.opts.out_dir);
            report_warnings(cli, ctx);
            for (const auto& rec : trajmine::stage_describe(ctx))
                cli.info("describe: wrote " + rec.file + " (" + std::to_string(rec.rows) +
                         " rows)");
            return 0;
        }
        if (pairs->parsed())
            return run_stage(cli, "pairs", [](const auto& ctx, const auto& s) {
                return trajmine::stage_pairs(ctx, s);
            });
        if (trajectories->parsed())
            return run_stage(cli, "trajectories", [](const auto& ctx, const auto& s) {
                return trajmine::stage_trajectories(ctx, s);
            });
        if (network->parsed())
            return run_stage(cli, "network", [](const auto& ctx, const auto& s) {
                return trajmine::stage_network(ctx, s);
            });
        if (cluster->parsed())
            return run_stage(cli, "cluster", [](const auto& ctx, const auto& s) {
                return trajmine::stage_cluster(ctx, s);
            });
        if (report->parsed())
            return run_stage(cli, "report", [&cli](const auto& ctx, const auto& s) {
                return trajmine::stage_report(ctx, s, cli.format());
            });
        if (run->parsed()) {
            const auto outcome = trajmine::run_pipeline(cli.config(), cli.opts.input_dir,
                                                        cli.opts.out_dir, cli.filter(),
                                                        cli.format());
            for (const auto& f : outcome.failures) std::cerr << "[error] " << f << "\n";
            cli.info("run: " + std::to_string(outcome.artifacts.size()) +
                     " artifacts, manifest.json written to " + cli.opts.out_dir);
            return outcome.exit_code;
        }
    } catch (const std::exception& e) {
        std::cerr << "[error] " << e.what() << "\n";
        return 1;
    }
    return 0;
}
