#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trajmine/cluster.hpp"
#include "trajmine/cohort.hpp"
#include "trajmine/trajectory.hpp"

namespace trajmine {

/// Per-cluster summary following the study's reporting conventions: system
/// percentages over condition slots (3 per trajectory), condition prevalence
/// over trajectories, mortality and hospital-stay statistics over unique
/// patients.
struct ClusterReport {
    int cluster_label = 0;
    int n_traj = 0;
    std::int64_t n_patients_total = 0;   // sum of trajectory supports
    std::int64_t n_patients_unique = 0;  // union of supporting patients
    std::map<SystemCategory, double> system_distribution_pct;
    std::vector<std::pair<ConditionId, double>> condition_prevalence_pct;  // pct desc
    double mortality_pct = 0.0;                 // of unique patients
    std::optional<double> long_stay_pct;        // any stay > 4 days; needs stays data
    double mortality_rate_per_100py = 0.0;      // deaths / person-years * 100
    double mean_age = 0.0;                      // age at the configured anchor
    std::optional<double> sd_age;
    std::vector<std::pair<SystemCategory, double>> cause_of_death_top5;
};

/// One report per cluster, ordered by unique patient count descending.
/// Throws when long-stay reporting is enabled but the cohort has no stays.
std::vector<ClusterReport> cluster_reports(const ClusterResult& clusters,
                                           const std::vector<Trajectory>& trajectories,
                                           const Cohort& cohort,
                                           const std::vector<FirstDiagnosisSequence>& sequences,
                                           const PipelineConfig& config);

struct PairTiming {
    std::int64_t n_co_affected = 0;
    double mean_years = 0.0;
    std::optional<double> sd_years;  // absent for a single co-affected patient
};

/// Mean/SD of |first(c1) - first(c2)| in years across co-affected stratum
/// patients, regardless of order. Throws when no patient carries both.
PairTiming pair_timing_stats(ConditionId c1, ConditionId c2, const Stratum& stratum,
                             const std::vector<FirstDiagnosisSequence>& sequences);

/// Five most frequent cause-of-death categories (ties alphabetical) among
/// the given deceased patients, as percentages of deaths.
std::vector<std::pair<SystemCategory, double>> cause_of_death_top5(
    const Cohort& cohort, const std::vector<PatientIndex>& members);

constexpr int kLongStayDays = 4;  // a long stay lasts more than this

}  // namespace trajmine
