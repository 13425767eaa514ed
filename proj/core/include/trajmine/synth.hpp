#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trajmine/cohort.hpp"

namespace trajmine {

/// A planted ordered condition sequence shared by a block of patients.
struct ArchetypeSpec {
    int planted_cluster = 0;
    std::vector<ConditionId> conditions;  // length >= 3
    double mean_gap_days = 365.0;
    double sd_gap_days = 90.0;
    double penetrance = 1.0;  // probability a member expresses the full ordered sequence
    int member_count = 0;
};

/// Generator parameters. Key/value text file; `[archetype]` sections open a
/// new archetype whose keys fill that archetype until the next section.
struct SynthSpec {
    std::uint64_t seed = 0;
    bool seed_set = false;  // seed is mandatory in spec files

    int n_conditions = 20;
    int background_patients = 0;
    double background_prevalence = 0.02;  // per condition, per patient
    double noise_rate = 0.0;              // expected extra random conditions per patient

    double p_male = 0.5;
    int birth_year_min = 1940;
    int birth_year_max = 1990;
    double death_prob = 0.2;
    double stay_prob = 0.5;
    int max_stays = 3;
    int stay_len_min = 1;
    int stay_len_max = 12;
    double wimd_missing_prob = 0.1;
    double ethnicity_unknown_prob = 0.3;
    double repeat_event_prob = 0.3;  // extra later event for an existing condition

    Date study_start = make_date(2000, 1, 1);
    Date study_end = make_date(2021, 12, 31);

    std::vector<ArchetypeSpec> archetypes;
};

SynthSpec parse_synth_spec(const std::string& path);
SynthSpec parse_synth_spec_text(const std::string& text, const std::string& origin);

struct SynthSummary {
    int patients = 0;
    std::int64_t events = 0;
    std::int64_t stays = 0;
};

/// Writes patients.csv, diagnoses.csv, hospital_stays.csv, catalog.csv and
/// the ground-truth sidecar truth.csv (patient_id, archetype_id,
/// planted_cluster, expressed) into out_dir. Byte-identical output for a
/// fixed seed.
SynthSummary generate_cohort(const SynthSpec& spec, const std::string& out_dir);

/// Standard pair-counting adjusted Rand index between two labelings.
double adjusted_rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

}  // namespace trajmine
