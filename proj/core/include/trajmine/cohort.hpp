#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "trajmine/config.hpp"
#include "trajmine/date.hpp"

namespace trajmine {

using ConditionId = std::int32_t;
using PatientIndex = std::uint32_t;

enum class SystemCategory {
    circulatory,
    digestive,
    musculoskeletal,
    nervous,
    mental,
    respiratory,
    endocrine,
    genitourinary,
    blood,
    ear,
    eye,
    skin,
    neoplasms,
};
constexpr int kSystemCategoryCount = 13;

std::string to_string(SystemCategory c);
std::optional<SystemCategory> parse_system_category(const std::string& s);

enum class Sex { male, female };
enum class AgeGroup { under_45, ge_45 };
enum class EventSource { primary_care, secondary_care };

std::string to_string(Sex s);
std::string to_string(AgeGroup g);

struct ConditionDef {
    ConditionId id = 0;
    std::string name;
    SystemCategory system = SystemCategory::circulatory;
};

/// The study's condition list. Ids unique, >= 2 entries.
class Catalog {
  public:
    static Catalog from_csv(const std::string& path);
    static Catalog from_defs(std::vector<ConditionDef> defs);

    bool contains(ConditionId id) const { return by_id_.count(id) != 0; }
    const ConditionDef& at(ConditionId id) const;
    std::size_t size() const { return defs_.size(); }
    const std::vector<ConditionDef>& defs() const { return defs_; }

  private:
    std::vector<ConditionDef> defs_;  // sorted by id
    std::unordered_map<ConditionId, std::size_t> by_id_;
};

struct Patient {
    std::string id;
    Sex sex = Sex::male;
    Date birth_date;
    std::optional<Date> death_date;
    std::optional<SystemCategory> cause_of_death;
    std::optional<int> wimd_quintile;
    std::optional<std::string> ethnicity;
};

struct DiagnosisEvent {
    PatientIndex patient = 0;
    ConditionId condition = 0;
    Date date;
    EventSource source = EventSource::primary_care;
};

struct HospitalStay {
    PatientIndex patient = 0;
    Date admission;
    Date discharge;
};

/// Immutable once loaded; downstream stages only read it.
struct Cohort {
    Catalog catalog;
    std::vector<Patient> patients;
    std::vector<DiagnosisEvent> events;  // within the study window, keys resolved
    std::vector<HospitalStay> stays;
    bool has_stays = false;
    std::int64_t dropped_out_of_window = 0;

    std::unordered_map<std::string, PatientIndex> index_by_id;

    PatientIndex index_of(const std::string& patient_id) const;
};

/// Loads and validates the four input files. `stays_path` empty = no stays.
/// Events outside [study_start, study_end] are dropped and counted.
Cohort load_cohort(const std::string& patients_path, const std::string& diagnoses_path,
                   const std::string& stays_path, const std::string& catalog_path,
                   const PipelineConfig& config);

/// Chronological first-diagnosis sequence of one patient. Entries sorted by
/// (date, condition_id); a condition appears once, at its earliest date over
/// both care sources.
struct FirstDiagnosisSequence {
    struct Entry {
        ConditionId condition;
        Date date;
    };
    std::vector<Entry> entries;
    bool has_tied_dates = false;  // two conditions first diagnosed the same day

    std::optional<Date> first(ConditionId c) const {
        for (const auto& e : entries)
            if (e.condition == c) return e.date;
        return std::nullopt;
    }
    bool empty() const { return entries.empty(); }
};

/// One sequence per patient, indexed by PatientIndex. Independent of input
/// row order (min-date per condition, canonical sort).
std::vector<FirstDiagnosisSequence> first_diagnosis_sequences(const Cohort& cohort);

struct Stratum {
    Sex sex = Sex::male;
    AgeGroup age_group = AgeGroup::under_45;
    std::vector<PatientIndex> patients;  // ascending
};

/// Anchor date for a patient's age: median first-diagnosis date (even count
/// takes the earlier middle), or the configured alternative. Patients with
/// no events anchor at study_end.
Date age_anchor_date(const Cohort& cohort, PatientIndex p,
                     const std::vector<FirstDiagnosisSequence>& sequences,
                     const PipelineConfig& config);

int patient_age(const Cohort& cohort, PatientIndex p,
                const std::vector<FirstDiagnosisSequence>& sequences,
                const PipelineConfig& config);

struct StratifyResult {
    // Order: male_lt45, male_ge45, female_lt45, female_ge45.
    std::array<Stratum, 4> strata;
    std::int64_t zero_event_patients = 0;  // anchored at study_end, flagged
};

StratifyResult stratify(const Cohort& cohort,
                        const std::vector<FirstDiagnosisSequence>& sequences,
                        const PipelineConfig& config);

std::string stratum_name(Sex s, AgeGroup g);

struct DescriptiveRow {
    std::string group_type;   // all | sex | age_group | ethnicity | wimd
    std::string group_label;
    std::int64_t n = 0;
    std::optional<double> mean_ltc;
    std::optional<double> sd_ltc;  // sample SD; absent when n < 2
    std::optional<double> mltc_pct;
    std::optional<double> physical_mental_pct;
};

struct DescriptiveReport {
    std::vector<DescriptiveRow> rows;
};

/// Table-1 style summary: N, mean +/- SD of LTC count, % with >= 2 LTCs,
/// % with at least one mental and one non-mental condition; for the whole
/// cohort and per sex / age group / ethnicity / WIMD quintile subgroup.
DescriptiveReport descriptive_stats(const Cohort& cohort,
                                    const std::vector<FirstDiagnosisSequence>& sequences,
                                    const PipelineConfig& config);

}  // namespace trajmine
