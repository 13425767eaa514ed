#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trajmine/cluster.hpp"
#include "trajmine/cohort.hpp"
#include "trajmine/config.hpp"
#include "trajmine/network.hpp"
#include "trajmine/pair_stats.hpp"
#include "trajmine/report.hpp"
#include "trajmine/trajectory.hpp"

namespace trajmine {

enum class StratumFilter { all, male_lt45, male_ge45, female_lt45, female_ge45 };
std::optional<StratumFilter> parse_stratum_filter(const std::string& s);
bool stratum_selected(StratumFilter filter, Sex sex, AgeGroup group);

enum class OutputFormat { csv, json };

/// Inputs loaded once per invocation; stages consume persisted artifacts of
/// their upstream stage plus this shared read-only state.
struct PipelineContext {
    PipelineConfig config;
    std::string input_dir;
    std::string out_dir;
    Cohort cohort;
    std::vector<FirstDiagnosisSequence> sequences;
    StratifyResult stratified;
};

PipelineContext make_context(const PipelineConfig& config, const std::string& input_dir,
                             const std::string& out_dir);

struct ArtifactRecord {
    std::string stage;
    std::string stratum;  // "all" for cohort-level artifacts
    std::string file;     // relative to out_dir
    std::int64_t rows = 0;
};

// Stage entry points. Each writes its artifacts atomically and returns the
// manifest records; upstream artifacts are read from ctx.out_dir and a
// missing one raises an error naming the expected file.
std::vector<ArtifactRecord> stage_describe(const PipelineContext& ctx);
std::vector<ArtifactRecord> stage_pairs(const PipelineContext& ctx, const Stratum& stratum);
std::vector<ArtifactRecord> stage_trajectories(const PipelineContext& ctx,
                                               const Stratum& stratum);
std::vector<ArtifactRecord> stage_network(const PipelineContext& ctx, const Stratum& stratum);
std::vector<ArtifactRecord> stage_cluster(const PipelineContext& ctx, const Stratum& stratum);
std::vector<ArtifactRecord> stage_report(const PipelineContext& ctx, const Stratum& stratum,
                                         OutputFormat format = OutputFormat::csv);

// Persisted-artifact readers (the resume path and tests use these too).
std::vector<PairStats> read_pairs_csv(const std::string& path);
std::vector<Trajectory> read_trajectories_csv(const std::string& trajectories_path,
                                              const std::string& members_path,
                                              const Cohort& cohort);
SimilarityMatrix read_similarity_csv(const std::string& path);
std::vector<int> read_cluster_labels_csv(const std::string& path);

struct PipelineOutcome {
    int exit_code = 0;
    std::vector<ArtifactRecord> artifacts;
    std::vector<std::string> failures;  // one entry per failed (stratum, stage)
};

/// Full pipeline: describe, then pairs -> trajectories -> network -> cluster
/// -> report per selected stratum. A failing stratum is reported and skipped
/// without poisoning the others. Writes manifest.json; deterministic for
/// fixed inputs, config and seed.
PipelineOutcome run_pipeline(const PipelineConfig& config, const std::string& input_dir,
                             const std::string& out_dir,
                             StratumFilter filter = StratumFilter::all,
                             OutputFormat format = OutputFormat::csv);

void write_manifest(const std::string& out_dir, const PipelineContext& ctx,
                    const PipelineOutcome& outcome);

/// Mirrors a stage CSV as a JSON array of objects (numeric fields typed,
/// empty fields null).
void csv_to_json_mirror(const std::string& csv_path, const std::string& json_path);

}  // namespace trajmine
