#include "trajmine/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace trajmine {

std::vector<std::pair<SystemCategory, double>> cause_of_death_top5(
    const Cohort& cohort, const std::vector<PatientIndex>& members) {
    std::map<SystemCategory, std::int64_t> counts;
    std::int64_t deaths = 0;
    for (PatientIndex p : members) {
        const auto& patient = cohort.patients[p];
        if (!patient.death_date) continue;
        ++deaths;
        if (patient.cause_of_death) ++counts[*patient.cause_of_death];
    }
    std::vector<std::pair<SystemCategory, double>> out;
    if (deaths == 0) return out;
    std::vector<std::pair<SystemCategory, std::int64_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return to_string(a.first) < to_string(b.first);  // ties alphabetical
    });
    for (std::size_t i = 0; i < ranked.size() && i < 5; ++i)
        out.emplace_back(ranked[i].first,
                         100.0 * static_cast<double>(ranked[i].second) /
                             static_cast<double>(deaths));
    return out;
}

PairTiming pair_timing_stats(ConditionId c1, ConditionId c2, const Stratum& stratum,
                             const std::vector<FirstDiagnosisSequence>& sequences) {
    std::vector<double> gaps;
    for (PatientIndex p : stratum.patients) {
        auto d1 = sequences[p].first(c1);
        auto d2 = sequences[p].first(c2);
        if (d1 && d2)
            gaps.push_back(std::abs(days_between(*d1, *d2)) / kDaysPerYear);
    }
    if (gaps.empty())
        throw std::invalid_argument("pair_timing_stats: no co-affected patients for pair " +
                                    std::to_string(c1) + "," + std::to_string(c2));
    PairTiming t;
    t.n_co_affected = static_cast<std::int64_t>(gaps.size());
    double sum = 0.0;
    for (double g : gaps) sum += g;
    t.mean_years = sum / static_cast<double>(gaps.size());
    if (gaps.size() > 1) {
        double ss = 0.0;
        for (double g : gaps) ss += (g - t.mean_years) * (g - t.mean_years);
        t.sd_years = std::sqrt(ss / static_cast<double>(gaps.size() - 1));
    }
    return t;
}

std::vector<ClusterReport> cluster_reports(const ClusterResult& clusters,
                                           const std::vector<Trajectory>& trajectories,
                                           const Cohort& cohort,
                                           const std::vector<FirstDiagnosisSequence>& sequences,
                                           const PipelineConfig& config) {
    if (clusters.labels.size() != trajectories.size())
        throw std::invalid_argument("cluster_reports: labels/trajectories size mismatch");
    if (config.report_long_stay && !cohort.has_stays)
        throw std::runtime_error(
            "cluster_reports: hospital_stays.csv was not provided but long-stay reporting "
            "is enabled (set report_long_stay=false to skip it)");

    const int k = clusters.labels.empty()
                      ? 0
                      : *std::max_element(clusters.labels.begin(), clusters.labels.end()) + 1;

    // Patients with any stay longer than kLongStayDays.
    std::set<PatientIndex> long_stayers;
    if (cohort.has_stays)
        for (const auto& s : cohort.stays)
            if (days_between(s.admission, s.discharge) > kLongStayDays)
                long_stayers.insert(s.patient);

    std::vector<ClusterReport> reports;
    reports.reserve(k);
    for (int c = 0; c < k; ++c) {
        ClusterReport r;
        r.cluster_label = c;

        std::map<SystemCategory, std::int64_t> slot_counts;
        std::int64_t slots = 0;
        std::map<ConditionId, std::int64_t> traj_with_condition;
        std::set<PatientIndex> unique;
        for (std::size_t t = 0; t < trajectories.size(); ++t) {
            if (clusters.labels[t] != c) continue;
            ++r.n_traj;
            r.n_patients_total += trajectories[t].support();
            for (ConditionId cond : trajectories[t].conditions) {
                ++slot_counts[cohort.catalog.at(cond).system];
                ++slots;
                ++traj_with_condition[cond];
            }
            unique.insert(trajectories[t].patients.begin(), trajectories[t].patients.end());
        }
        r.n_patients_unique = static_cast<std::int64_t>(unique.size());
        for (const auto& [cat, count] : slot_counts)
            r.system_distribution_pct[cat] =
                100.0 * static_cast<double>(count) / static_cast<double>(slots);
        for (const auto& [cond, count] : traj_with_condition)
            r.condition_prevalence_pct.emplace_back(
                cond, 100.0 * static_cast<double>(count) / static_cast<double>(r.n_traj));
        std::sort(r.condition_prevalence_pct.begin(), r.condition_prevalence_pct.end(),
                  [](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return a.first < b.first;
                  });

        std::int64_t deaths = 0, long_stay = 0;
        double person_years = 0.0;
        double age_sum = 0.0, age_ss = 0.0;
        std::vector<PatientIndex> members(unique.begin(), unique.end());
        for (PatientIndex p : members) {
            const auto& patient = cohort.patients[p];
            if (patient.death_date) ++deaths;
            if (long_stayers.count(p)) ++long_stay;
            // Person-years: first recorded event to death or study end.
            const Date from = sequences[p].entries.front().date;
            const Date to = patient.death_date.value_or(config.study_end);
            person_years += years_between(from, to);
            const double age =
                static_cast<double>(patient_age(cohort, p, sequences, config));
            age_sum += age;
        }
        if (!members.empty()) {
            r.mortality_pct = 100.0 * static_cast<double>(deaths) /
                              static_cast<double>(members.size());
            if (cohort.has_stays)
                r.long_stay_pct = 100.0 * static_cast<double>(long_stay) /
                                  static_cast<double>(members.size());
            r.mean_age = age_sum / static_cast<double>(members.size());
            if (members.size() > 1) {
                for (PatientIndex p : members) {
                    const double age =
                        static_cast<double>(patient_age(cohort, p, sequences, config));
                    age_ss += (age - r.mean_age) * (age - r.mean_age);
                }
                r.sd_age = std::sqrt(age_ss / static_cast<double>(members.size() - 1));
            }
            if (person_years > 0.0)
                r.mortality_rate_per_100py =
                    100.0 * static_cast<double>(deaths) / person_years;
        }
        r.cause_of_death_top5 = cause_of_death_top5(cohort, members);
        reports.push_back(std::move(r));
    }
    std::sort(reports.begin(), reports.end(), [](const ClusterReport& a, const ClusterReport& b) {
        if (a.n_patients_unique != b.n_patients_unique)
            return a.n_patients_unique > b.n_patients_unique;
        return a.cluster_label < b.cluster_label;
    });
    return reports;
}

}  // namespace trajmine
