#include "trajmine/cohort.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "trajmine/csv.hpp"

namespace trajmine {

namespace {

const char* kCategoryNames[kSystemCategoryCount] = {
    "circulatory", "digestive", "musculoskeletal", "nervous",  "mental",
    "respiratory", "endocrine", "genitourinary",   "blood",    "ear",
    "eye",         "skin",      "neoplasms",
};

std::string row_context(const CsvTable& t, std::size_t row) {
    return t.path + ":" + std::to_string(t.lines[row]);
}

ConditionId parse_condition_id(const std::string& s, const std::string& ctx) {
    ConditionId id = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), id);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw std::runtime_error(ctx + ": bad condition_id '" + s + "'");
    return id;
}

Date parse_date_or_throw(const std::string& s, const std::string& ctx, const char* what) {
    auto d = parse_date(s);
    if (!d) throw std::runtime_error(ctx + ": bad " + std::string(what) + " '" + s + "'");
    return *d;
}

}  // namespace

std::string to_string(SystemCategory c) { return kCategoryNames[static_cast<int>(c)]; }

std::optional<SystemCategory> parse_system_category(const std::string& s) {
    for (int i = 0; i < kSystemCategoryCount; ++i)
        if (s == kCategoryNames[i]) return static_cast<SystemCategory>(i);
    return std::nullopt;
}

std::string to_string(Sex s) { return s == Sex::male ? "male" : "female"; }
std::string to_string(AgeGroup g) { return g == AgeGroup::under_45 ? "lt45" : "ge45"; }

std::string stratum_name(Sex s, AgeGroup g) { return to_string(s) + "_" + to_string(g); }

Catalog Catalog::from_defs(std::vector<ConditionDef> defs) {
    Catalog c;
    std::sort(defs.begin(), defs.end(),
              [](const ConditionDef& a, const ConditionDef& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < defs.size(); ++i) {
        if (!c.by_id_.emplace(defs[i].id, i).second)
            throw std::runtime_error("catalog: duplicate condition_id " +
                                     std::to_string(defs[i].id));
    }
    c.defs_ = std::move(defs);
    if (c.defs_.size() < 2) throw std::runtime_error("catalog: needs at least 2 conditions");
    return c;
}

Catalog Catalog::from_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    require_columns(t, {"condition_id", "name", "system_category"});
    std::vector<ConditionDef> defs;
    defs.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        ConditionDef def;
        def.id = parse_condition_id(row[0], row_context(t, r));
        def.name = row[1];
        auto cat = parse_system_category(row[2]);
        if (!cat)
            throw std::runtime_error(row_context(t, r) + ": unknown system_category '" +
                                     row[2] + "'");
        def.system = *cat;
        defs.push_back(std::move(def));
    }
    return from_defs(std::move(defs));
}

const ConditionDef& Catalog::at(ConditionId id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end())
        throw std::runtime_error("catalog: unknown condition_id " + std::to_string(id));
    return defs_[it->second];
}

PatientIndex Cohort::index_of(const std::string& patient_id) const {
    auto it = index_by_id.find(patient_id);
    if (it == index_by_id.end())
        throw std::runtime_error("unknown patient_id '" + patient_id + "'");
    return it->second;
}

Cohort load_cohort(const std::string& patients_path, const std::string& diagnoses_path,
                   const std::string& stays_path, const std::string& catalog_path,
                   const PipelineConfig& config) {
    Cohort cohort;
    cohort.catalog = Catalog::from_csv(catalog_path);

    CsvTable pt = read_csv(patients_path);
    require_columns(pt, {"patient_id", "sex", "birth_date", "death_date",
                         "cause_of_death_category", "wimd_quintile", "ethnicity"});
    cohort.patients.reserve(pt.rows.size());
    for (std::size_t r = 0; r < pt.rows.size(); ++r) {
        const auto& row = pt.rows[r];
        const std::string ctx = row_context(pt, r);
        Patient p;
        p.id = row[0];
        if (p.id.empty()) throw std::runtime_error(ctx + ": empty patient_id");
        if (row[1] == "male") p.sex = Sex::male;
        else if (row[1] == "female") p.sex = Sex::female;
        else throw std::runtime_error(ctx + ": bad sex '" + row[1] + "'");
        p.birth_date = parse_date_or_throw(row[2], ctx, "birth_date");
        if (!row[3].empty()) {
            p.death_date = parse_date_or_throw(row[3], ctx, "death_date");
            if (*p.death_date < p.birth_date)
                throw std::runtime_error(ctx + ": death_date precedes birth_date");
        }
        if (!row[4].empty()) {
            auto cat = parse_system_category(row[4]);
            if (!cat)
                throw std::runtime_error(ctx + ": unknown cause_of_death_category '" + row[4] + "'");
            p.cause_of_death = *cat;
        }
        if (!row[5].empty()) {
            int q = 0;
            auto [cp, ec] = std::from_chars(row[5].data(), row[5].data() + row[5].size(), q);
            if (ec != std::errc{} || cp != row[5].data() + row[5].size() || q < 1 || q > 5)
                throw std::runtime_error(ctx + ": wimd_quintile must be 1..5, got '" + row[5] + "'");
            p.wimd_quintile = q;
        }
        if (!row[6].empty()) p.ethnicity = row[6];

        PatientIndex idx = static_cast<PatientIndex>(cohort.patients.size());
        if (!cohort.index_by_id.emplace(p.id, idx).second)
            throw std::runtime_error(ctx + ": duplicate patient_id '" + p.id + "'");
        cohort.patients.push_back(std::move(p));
    }

    CsvTable dt = read_csv(diagnoses_path);
    require_columns(dt, {"patient_id", "condition_id", "event_date", "source"});
    cohort.events.reserve(dt.rows.size());
    for (std::size_t r = 0; r < dt.rows.size(); ++r) {
        const auto& row = dt.rows[r];
        const std::string ctx = row_context(dt, r);
        auto it = cohort.index_by_id.find(row[0]);
        if (it == cohort.index_by_id.end())
            throw std::runtime_error(ctx + ": diagnosis references unknown patient_id '" +
                                     row[0] + "'");
        DiagnosisEvent ev;
        ev.patient = it->second;
        ev.condition = parse_condition_id(row[1], ctx);
        if (!cohort.catalog.contains(ev.condition))
            throw std::runtime_error(ctx + ": diagnosis references unknown condition_id '" +
                                     row[1] + "'");
        ev.date = parse_date_or_throw(row[2], ctx, "event_date");
        if (row[3] == "primary") ev.source = EventSource::primary_care;
        else if (row[3] == "secondary") ev.source = EventSource::secondary_care;
        else throw std::runtime_error(ctx + ": bad source '" + row[3] + "'");
        if (ev.date < config.study_start || ev.date > config.study_end) {
            ++cohort.dropped_out_of_window;
            continue;
        }
        cohort.events.push_back(ev);
    }

    if (!stays_path.empty()) {
        CsvTable st = read_csv(stays_path);
        require_columns(st, {"patient_id", "admission_date", "discharge_date"});
        cohort.stays.reserve(st.rows.size());
        for (std::size_t r = 0; r < st.rows.size(); ++r) {
            const auto& row = st.rows[r];
            const std::string ctx = row_context(st, r);
            auto it = cohort.index_by_id.find(row[0]);
            if (it == cohort.index_by_id.end())
                throw std::runtime_error(ctx + ": stay references unknown patient_id '" +
                                         row[0] + "'");
            HospitalStay stay;
            stay.patient = it->second;
            stay.admission = parse_date_or_throw(row[1], ctx, "admission_date");
            stay.discharge = parse_date_or_throw(row[2], ctx, "discharge_date");
            if (stay.discharge < stay.admission)
                throw std::runtime_error(ctx + ": discharge_date precedes admission_date");
            cohort.stays.push_back(stay);
        }
        cohort.has_stays = true;
    }
    return cohort;
}

std::vector<FirstDiagnosisSequence> first_diagnosis_sequences(const Cohort& cohort) {
    // Min event date per (patient, condition) over both care sources.
    std::vector<std::map<ConditionId, Date>> firsts(cohort.patients.size());
    for (const auto& ev : cohort.events) {
        auto [it, inserted] = firsts[ev.patient].emplace(ev.condition, ev.date);
        if (!inserted && ev.date < it->second) it->second = ev.date;
    }
    std::vector<FirstDiagnosisSequence> out(cohort.patients.size());
    for (std::size_t p = 0; p < firsts.size(); ++p) {
        auto& seq = out[p];
        seq.entries.reserve(firsts[p].size());
        for (const auto& [cond, date] : firsts[p])
            seq.entries.push_back({cond, date});
        std::sort(seq.entries.begin(), seq.entries.end(),
                  [](const auto& a, const auto& b) {
                      return a.date != b.date ? a.date < b.date : a.condition < b.condition;
                  });
        for (std::size_t i = 1; i < seq.entries.size(); ++i)
            if (seq.entries[i].date == seq.entries[i - 1].date) {
                seq.has_tied_dates = true;
                break;
            }
    }
    return out;
}

Date age_anchor_date(const Cohort&, PatientIndex p,
                     const std::vector<FirstDiagnosisSequence>& sequences,
                     const PipelineConfig& config) {
    if (config.age_anchor == AgeAnchor::study_start) return config.study_start;
    const auto& entries = sequences[p].entries;
    if (entries.empty()) return config.study_end;  // zero-event fallback
    if (config.age_anchor == AgeAnchor::first_event) return entries.front().date;
    // median_event: even count takes the earlier of the two middle dates
    return entries[(entries.size() - 1) / 2].date;
}

int patient_age(const Cohort& cohort, PatientIndex p,
                const std::vector<FirstDiagnosisSequence>& sequences,
                const PipelineConfig& config) {
    return age_in_years(cohort.patients[p].birth_date,
                        age_anchor_date(cohort, p, sequences, config));
}

StratifyResult stratify(const Cohort& cohort,
                        const std::vector<FirstDiagnosisSequence>& sequences,
                        const PipelineConfig& config) {
    StratifyResult result;
    result.strata[0] = {Sex::male, AgeGroup::under_45, {}};
    result.strata[1] = {Sex::male, AgeGroup::ge_45, {}};
    result.strata[2] = {Sex::female, AgeGroup::under_45, {}};
    result.strata[3] = {Sex::female, AgeGroup::ge_45, {}};
    for (PatientIndex p = 0; p < cohort.patients.size(); ++p) {
        if (sequences[p].empty()) ++result.zero_event_patients;
        const int age = patient_age(cohort, p, sequences, config);
        const bool young = age < config.age_threshold;
        const int slot = (cohort.patients[p].sex == Sex::male ? 0 : 2) + (young ? 0 : 1);
        result.strata[slot].patients.push_back(p);
    }
    return result;
}

namespace {

struct Accum {
    std::int64_t n = 0;
    std::int64_t sum = 0;
    double sumsq = 0.0;
    std::int64_t mltc = 0;
    std::int64_t phys_mental = 0;

    void add(int ltc_count, bool physical_mental) {
        ++n;
        sum += ltc_count;
        sumsq += static_cast<double>(ltc_count) * ltc_count;
        if (ltc_count >= 2) ++mltc;
        if (physical_mental) ++phys_mental;
    }

    DescriptiveRow row(std::string type, std::string label) const {
        DescriptiveRow r;
        r.group_type = std::move(type);
        r.group_label = std::move(label);
        r.n = n;
        if (n > 0) {
            const double mean = static_cast<double>(sum) / static_cast<double>(n);
            r.mean_ltc = mean;
            if (n > 1) {
                double var = (sumsq - static_cast<double>(n) * mean * mean) /
                             static_cast<double>(n - 1);
                r.sd_ltc = std::sqrt(std::max(0.0, var));
            }
            r.mltc_pct = 100.0 * static_cast<double>(mltc) / static_cast<double>(n);
            r.physical_mental_pct =
                100.0 * static_cast<double>(phys_mental) / static_cast<double>(n);
        }
        return r;
    }
};

}  // namespace

DescriptiveReport descriptive_stats(const Cohort& cohort,
                                    const std::vector<FirstDiagnosisSequence>& sequences,
                                    const PipelineConfig& config) {
    Accum all;
    Accum by_sex[2];
    Accum by_age[2];
    std::map<std::string, Accum> by_ethnicity;
    Accum by_wimd[6];  // [0] = missing, [1..5] quintiles

    for (PatientIndex p = 0; p < cohort.patients.size(); ++p) {
        const auto& seq = sequences[p];
        const int ltc = static_cast<int>(seq.entries.size());
        bool has_mental = false, has_physical = false;
        for (const auto& e : seq.entries) {
            if (cohort.catalog.at(e.condition).system == SystemCategory::mental)
                has_mental = true;
            else
                has_physical = true;
        }
        const bool pm = has_mental && has_physical;
        const auto& patient = cohort.patients[p];

        all.add(ltc, pm);
        by_sex[patient.sex == Sex::male ? 0 : 1].add(ltc, pm);
        const int age = patient_age(cohort, p, sequences, config);
        by_age[age < config.age_threshold ? 0 : 1].add(ltc, pm);
        by_ethnicity[patient.ethnicity.value_or("unknown")].add(ltc, pm);
        by_wimd[patient.wimd_quintile.value_or(0)].add(ltc, pm);
    }

    DescriptiveReport report;
    report.rows.push_back(all.row("all", "all"));
    report.rows.push_back(by_sex[0].row("sex", "male"));
    report.rows.push_back(by_sex[1].row("sex", "female"));
    report.rows.push_back(by_age[0].row("age_group", "lt45"));
    report.rows.push_back(by_age[1].row("age_group", "ge45"));
    for (const auto& [label, acc] : by_ethnicity)
        report.rows.push_back(acc.row("ethnicity", label));
    for (int q = 1; q <= 5; ++q)
        report.rows.push_back(by_wimd[q].row("wimd", std::to_string(q)));
    report.rows.push_back(by_wimd[0].row("wimd", "missing"));
    return report;
}

}  // namespace trajmine
