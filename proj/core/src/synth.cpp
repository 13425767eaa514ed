#include "trajmine/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "trajmine/csv.hpp"
#include "trajmine/rng.hpp"

namespace trajmine {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

int to_int(const std::string& key, const std::string& v) {
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw std::runtime_error("synth spec: bad integer for " + key + ": '" + v + "'");
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    const auto out = parse_double_text(v);
    if (!out) throw std::runtime_error("synth spec: bad number for " + key + ": '" + v + "'");
    return *out;
}

Date to_date(const std::string& key, const std::string& v) {
    auto d = parse_date(v);
    if (!d) throw std::runtime_error("synth spec: bad date for " + key + ": '" + v + "'");
    return *d;
}

std::vector<ConditionId> to_condition_list(const std::string& key, const std::string& v) {
    std::vector<ConditionId> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(to_int(key, item));
    }
    return out;
}

void apply_top_level(SynthSpec& spec, const std::string& key, const std::string& value) {
    if (key == "seed") {
        std::uint64_t out = 0;
        auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
        if (ec != std::errc{} || p != value.data() + value.size())
            throw std::runtime_error("synth spec: bad seed: '" + value + "'");
        spec.seed = out;
        spec.seed_set = true;
    } else if (key == "conditions") spec.n_conditions = to_int(key, value);
    else if (key == "background_patients") spec.background_patients = to_int(key, value);
    else if (key == "background_prevalence") spec.background_prevalence = to_double(key, value);
    else if (key == "noise_rate") spec.noise_rate = to_double(key, value);
    else if (key == "p_male") spec.p_male = to_double(key, value);
    else if (key == "birth_year_min") spec.birth_year_min = to_int(key, value);
    else if (key == "birth_year_max") spec.birth_year_max = to_int(key, value);
    else if (key == "death_prob") spec.death_prob = to_double(key, value);
    else if (key == "stay_prob") spec.stay_prob = to_double(key, value);
    else if (key == "max_stays") spec.max_stays = to_int(key, value);
    else if (key == "stay_len_min") spec.stay_len_min = to_int(key, value);
    else if (key == "stay_len_max") spec.stay_len_max = to_int(key, value);
    else if (key == "wimd_missing_prob") spec.wimd_missing_prob = to_double(key, value);
    else if (key == "ethnicity_unknown_prob") spec.ethnicity_unknown_prob = to_double(key, value);
    else if (key == "repeat_event_prob") spec.repeat_event_prob = to_double(key, value);
    else if (key == "study_start") spec.study_start = to_date(key, value);
    else if (key == "study_end") spec.study_end = to_date(key, value);
    else throw std::runtime_error("synth spec: unknown key '" + key + "'");
}

void apply_archetype(ArchetypeSpec& a, const std::string& key, const std::string& value) {
    if (key == "cluster") a.planted_cluster = to_int(key, value);
    else if (key == "conditions") a.conditions = to_condition_list(key, value);
    else if (key == "mean_gap_days") a.mean_gap_days = to_double(key, value);
    else if (key == "sd_gap_days") a.sd_gap_days = to_double(key, value);
    else if (key == "penetrance") a.penetrance = to_double(key, value);
    else if (key == "members") a.member_count = to_int(key, value);
    else throw std::runtime_error("synth spec: unknown archetype key '" + key + "'");
}

void validate(const SynthSpec& spec, const std::string& origin) {
    auto fail = [&](const std::string& msg) {
        throw std::runtime_error(origin + ": " + msg);
    };
    if (!spec.seed_set) fail("seed is mandatory");
    if (spec.n_conditions < 2) fail("conditions must be >= 2");
    if (spec.background_patients < 0) fail("background_patients must be >= 0");
    for (double p : {spec.background_prevalence, spec.p_male, spec.death_prob,
                     spec.stay_prob, spec.wimd_missing_prob, spec.ethnicity_unknown_prob,
                     spec.repeat_event_prob})
        if (p < 0.0 || p > 1.0) fail("probabilities must lie in [0,1]");
    if (spec.noise_rate < 0.0) fail("noise_rate must be >= 0");
    if (spec.study_end < spec.study_start) fail("study_end precedes study_start");
    if (spec.birth_year_max < spec.birth_year_min) fail("birth_year range inverted");
    for (std::size_t i = 0; i < spec.archetypes.size(); ++i) {
        const auto& a = spec.archetypes[i];
        const std::string where = "archetype " + std::to_string(i);
        if (a.conditions.size() < 3) fail(where + ": needs >= 3 conditions");
        std::vector<ConditionId> sorted = a.conditions;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            fail(where + ": repeated condition");
        for (ConditionId c : a.conditions)
            if (c < 1 || c > spec.n_conditions)
                fail(where + ": condition " + std::to_string(c) + " outside catalog 1.." +
                     std::to_string(spec.n_conditions));
        if (a.penetrance <= 0.0 || a.penetrance > 1.0) fail(where + ": penetrance must be in (0,1]");
        if (a.mean_gap_days <= 0.0 || a.sd_gap_days < 0.0) fail(where + ": bad gap parameters");
        if (a.member_count < 0) fail(where + ": members must be >= 0");
    }
}

}  // namespace

SynthSpec parse_synth_spec_text(const std::string& text, const std::string& origin) {
    SynthSpec spec;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool in_archetype = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line == "[archetype]") {
            spec.archetypes.emplace_back();
            in_archetype = true;
            continue;
        }
        if (line.front() == '[')
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": unknown section " + line);
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (in_archetype) apply_archetype(spec.archetypes.back(), key, value);
        else apply_top_level(spec, key, value);
    }
    validate(spec, origin);
    return spec;
}

SynthSpec parse_synth_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open synth spec: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_synth_spec_text(buf.str(), path);
}

namespace {

const char* kEthnicities[5] = {"white", "asian", "black", "mixed", "other"};

struct PatientDraft {
    std::string id;
    Sex sex;
    Date birth;
    std::optional<Date> death;
    std::optional<SystemCategory> cause;
    std::optional<int> wimd;
    std::optional<std::string> ethnicity;
    int archetype_id = -1;
    int planted_cluster = -1;
    bool expressed = false;
    std::map<ConditionId, Date> conditions;  // first-diagnosis plan
    std::vector<HospitalStay> stays;
};

Date uniform_date(Rng& rng, Date lo, Date hi) {
    if (hi < lo) return lo;
    return add_days(lo, static_cast<int>(rng.uniform_int(0, days_between(lo, hi))));
}

}  // namespace

SynthSummary generate_cohort(const SynthSpec& spec, const std::string& out_dir) {
    validate(spec, "synth spec");
    std::filesystem::create_directories(out_dir);
    Rng rng(spec.seed);

    const int total_members =
        std::accumulate(spec.archetypes.begin(), spec.archetypes.end(), 0,
                        [](int acc, const ArchetypeSpec& a) { return acc + a.member_count; });
    const int n_patients = total_members + spec.background_patients;
    if (n_patients == 0) throw std::runtime_error("synth spec: no patients to generate");

    std::vector<PatientDraft> drafts;
    drafts.reserve(n_patients);

    int serial = 0;
    auto next_draft = [&](int archetype_id, int planted_cluster) {
        PatientDraft d;
        char buf[16];
        std::snprintf(buf, sizeof(buf), "P%06d", ++serial);
        d.id = buf;
        d.sex = rng.bernoulli(spec.p_male) ? Sex::male : Sex::female;
        const int year =
            static_cast<int>(rng.uniform_int(spec.birth_year_min, spec.birth_year_max));
        d.birth = add_days(make_date(year, 1, 1), static_cast<int>(rng.uniform_int(0, 364)));
        if (!rng.bernoulli(spec.wimd_missing_prob))
            d.wimd = static_cast<int>(rng.uniform_int(1, 5));
        if (!rng.bernoulli(spec.ethnicity_unknown_prob))
            d.ethnicity = kEthnicities[rng.next_below(5)];
        d.archetype_id = archetype_id;
        d.planted_cluster = planted_cluster;
        return d;
    };

    // Archetype members first, then background-only patients.
    for (std::size_t ai = 0; ai < spec.archetypes.size(); ++ai) {
        const auto& arch = spec.archetypes[ai];
        for (int m = 0; m < arch.member_count; ++m) {
            PatientDraft d = next_draft(static_cast<int>(ai), arch.planted_cluster);
            d.expressed = rng.bernoulli(arch.penetrance);
            if (d.expressed) {
                // Ordered sequence with sampled positive gaps, fitted into the window.
                std::vector<int> gaps(arch.conditions.size() - 1);
                int span = 0;
                for (auto& g : gaps) {
                    g = std::max(1, static_cast<int>(
                                        std::lround(rng.normal(arch.mean_gap_days,
                                                               arch.sd_gap_days))));
                    span += g;
                }
                const int window = days_between(spec.study_start, spec.study_end);
                if (span >= window) {  // compress oversized plans to fit
                    for (auto& g : gaps) g = std::max(1, g * (window - 1) / span);
                    span = 0;
                    for (int g : gaps) span += g;
                }
                Date at = uniform_date(rng, spec.study_start,
                                       add_days(spec.study_end, -span));
                for (std::size_t i = 0; i < arch.conditions.size(); ++i) {
                    if (i > 0) at = add_days(at, gaps[i - 1]);
                    d.conditions.emplace(arch.conditions[i], at);
                }
            } else {
                // Member that does not express the order: same conditions at
                // independent random dates.
                for (ConditionId c : arch.conditions)
                    d.conditions.emplace(c,
                                         uniform_date(rng, spec.study_start, spec.study_end));
            }
            drafts.push_back(std::move(d));
        }
    }
    for (int b = 0; b < spec.background_patients; ++b)
        drafts.push_back(next_draft(-1, -1));

    for (auto& d : drafts) {
        // Background prevalence: each catalog condition independently.
        for (ConditionId c = 1; c <= spec.n_conditions; ++c) {
            if (d.conditions.count(c)) continue;
            if (rng.bernoulli(spec.background_prevalence))
                d.conditions.emplace(c, uniform_date(rng, spec.study_start, spec.study_end));
        }
        // Extra noise conditions.
        const int extra = rng.poisson(spec.noise_rate);
        for (int e = 0; e < extra; ++e) {
            const ConditionId c =
                static_cast<ConditionId>(rng.uniform_int(1, spec.n_conditions));
            if (!d.conditions.count(c))
                d.conditions.emplace(c, uniform_date(rng, spec.study_start, spec.study_end));
        }
        if (!d.conditions.empty() && rng.bernoulli(spec.death_prob)) {
            Date first = d.conditions.begin()->second;
            for (const auto& [_, date] : d.conditions) first = std::min(first, date);
            d.death = uniform_date(rng, first, spec.study_end);
            d.cause = static_cast<SystemCategory>(rng.next_below(kSystemCategoryCount));
        }
        if (rng.bernoulli(spec.stay_prob)) {
            const int n_stays = static_cast<int>(rng.uniform_int(1, spec.max_stays));
            for (int s = 0; s < n_stays; ++s) {
                const int len =
                    static_cast<int>(rng.uniform_int(spec.stay_len_min, spec.stay_len_max));
                Date adm = uniform_date(rng, spec.study_start,
                                        add_days(spec.study_end, -len));
                HospitalStay stay;
                stay.admission = adm;
                stay.discharge = add_days(adm, len);
                d.stays.push_back(stay);
            }
        }
    }

    SynthSummary summary;
    summary.patients = n_patients;

    CsvWriter patients(out_dir + "/patients.csv");
    patients.row({"patient_id", "sex", "birth_date", "death_date", "cause_of_death_category",
                  "wimd_quintile", "ethnicity"});
    for (const auto& d : drafts)
        patients.row({d.id, to_string(d.sex), to_iso_string(d.birth),
                      d.death ? to_iso_string(*d.death) : "",
                      d.cause ? to_string(*d.cause) : "",
                      d.wimd ? std::to_string(*d.wimd) : "", d.ethnicity.value_or("")});
    patients.commit();

    CsvWriter diagnoses(out_dir + "/diagnoses.csv");
    diagnoses.row({"patient_id", "condition_id", "event_date", "source"});
    for (auto& d : drafts) {
        for (const auto& [cond, date] : d.conditions) {
            const bool secondary = rng.bernoulli(0.5);
            diagnoses.row({d.id, std::to_string(cond), to_iso_string(date),
                           secondary ? "secondary" : "primary"});
            ++summary.events;
            // Occasionally a later repeat record, exercising min-date logic.
            if (rng.bernoulli(spec.repeat_event_prob) && date < spec.study_end) {
                Date later = uniform_date(rng, add_days(date, 1), spec.study_end);
                diagnoses.row({d.id, std::to_string(cond), to_iso_string(later),
                               secondary ? "primary" : "secondary"});
                ++summary.events;
            }
        }
    }
    diagnoses.commit();

    CsvWriter stays(out_dir + "/hospital_stays.csv");
    stays.row({"patient_id", "admission_date", "discharge_date"});
    for (const auto& d : drafts)
        for (const auto& s : d.stays) {
            stays.row({d.id, to_iso_string(s.admission), to_iso_string(s.discharge)});
            ++summary.stays;
        }
    stays.commit();

    CsvWriter catalog(out_dir + "/catalog.csv");
    catalog.row({"condition_id", "name", "system_category"});
    for (ConditionId c = 1; c <= spec.n_conditions; ++c)
        catalog.row({std::to_string(c), "condition_" + std::to_string(c),
                     to_string(static_cast<SystemCategory>((c - 1) % kSystemCategoryCount))});
    catalog.commit();

    CsvWriter truth(out_dir + "/truth.csv");
    truth.row({"patient_id", "archetype_id", "planted_cluster", "expressed"});
    for (const auto& d : drafts)
        truth.row({d.id, std::to_string(d.archetype_id), std::to_string(d.planted_cluster),
                   d.expressed ? "1" : "0"});
    truth.commit();

    return summary;
}

double adjusted_rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
    if (labels_a.size() != labels_b.size())
        throw std::invalid_argument("adjusted_rand_index: label vectors differ in length");
    const std::int64_t n = static_cast<std::int64_t>(labels_a.size());
    if (n < 2) throw std::invalid_argument("adjusted_rand_index: needs >= 2 items");

    std::map<std::pair<int, int>, std::int64_t> joint;
    std::map<int, std::int64_t> count_a, count_b;
    for (std::size_t i = 0; i < labels_a.size(); ++i) {
        ++joint[{labels_a[i], labels_b[i]}];
        ++count_a[labels_a[i]];
        ++count_b[labels_b[i]];
    }
    auto choose2 = [](std::int64_t x) { return static_cast<double>(x) * (x - 1) / 2.0; };
    double sum_joint = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [_, c] : joint) sum_joint += choose2(c);
    for (const auto& [_, c] : count_a) sum_a += choose2(c);
    for (const auto& [_, c] : count_b) sum_b += choose2(c);
    const double expected = sum_a * sum_b / choose2(n);
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected)  // both partitions trivial (all-one or all-singletons)
        return sum_joint == expected ? 1.0 : 0.0;
    return (sum_joint - expected) / (max_index - expected);
}

}  // namespace trajmine
