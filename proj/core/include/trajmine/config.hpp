#pragma once

#include <cstdint>
#include <string>

#include "trajmine/date.hpp"

namespace trajmine {

enum class AgeAnchor { median_event, study_start, first_event };
enum class DirectionTestKind { two_sided, one_sided };
enum class EdgeWeighting { trajectory, patient };

/// Every tunable of the pipeline, with its documented default. Parsed from a
/// key=value text file; unknown keys are rejected.
struct PipelineConfig {
    Date study_start = make_date(2000, 1, 1);
    Date study_end = make_date(2021, 12, 31);

    int age_threshold = 45;
    AgeAnchor age_anchor = AgeAnchor::median_event;

    int min_pair_patients = 10;
    int min_separation_days = 183;
    double alpha = 0.001;
    double direction_alpha = 0.05;
    DirectionTestKind direction_test = DirectionTestKind::two_sided;
    bool strict_table = false;

    int traj_length = 3;
    int min_traj_patients = 10;
    int traj_min_gap_days = 0;
    bool require_all_pairs = false;

    EdgeWeighting edge_weighting = EdgeWeighting::trajectory;
    bool clamp_similarity = true;

    int k_min = 2;
    int k_max = 10;
    int kmeans_restarts = 10;
    std::uint64_t seed = 0;

    bool report_long_stay = true;
};

/// Parses `key = value` lines ('#' comments, blank lines ignored).
/// Throws on unknown keys, bad values, or violated bounds.
PipelineConfig load_config(const std::string& path);

/// Applies a single key=value assignment (same validation as load_config).
void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// Canonical serialization: every field as key=value, fixed order. Two
/// configs serialize identically iff all fields are equal.
std::string serialize_config(const PipelineConfig& cfg);

/// FNV-1a 64 hash of the canonical serialization, as a hex string.
std::string config_hash(const PipelineConfig& cfg);

std::string to_string(AgeAnchor a);
std::string to_string(DirectionTestKind d);
std::string to_string(EdgeWeighting w);

}  // namespace trajmine
