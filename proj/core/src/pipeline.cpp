#include "trajmine/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "trajmine/csv.hpp"

namespace trajmine {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::optional<StratumFilter> parse_stratum_filter(const std::string& s) {
    if (s == "all") return StratumFilter::all;
    if (s == "male_lt45") return StratumFilter::male_lt45;
    if (s == "male_ge45") return StratumFilter::male_ge45;
    if (s == "female_lt45") return StratumFilter::female_lt45;
    if (s == "female_ge45") return StratumFilter::female_ge45;
    return std::nullopt;
}

bool stratum_selected(StratumFilter filter, Sex sex, AgeGroup group) {
    switch (filter) {
        case StratumFilter::all: return true;
        case StratumFilter::male_lt45: return sex == Sex::male && group == AgeGroup::under_45;
        case StratumFilter::male_ge45: return sex == Sex::male && group == AgeGroup::ge_45;
        case StratumFilter::female_lt45:
            return sex == Sex::female && group == AgeGroup::under_45;
        case StratumFilter::female_ge45:
            return sex == Sex::female && group == AgeGroup::ge_45;
    }
    return false;
}

PipelineContext make_context(const PipelineConfig& config, const std::string& input_dir,
                             const std::string& out_dir) {
    PipelineContext ctx;
    ctx.config = config;
    ctx.input_dir = input_dir;
    ctx.out_dir = out_dir;
    fs::create_directories(out_dir);
    const std::string stays = input_dir + "/hospital_stays.csv";
    ctx.cohort = load_cohort(input_dir + "/patients.csv", input_dir + "/diagnoses.csv",
                             fs::exists(stays) ? stays : "", input_dir + "/catalog.csv",
                             config);
    ctx.sequences = first_diagnosis_sequences(ctx.cohort);
    ctx.stratified = stratify(ctx.cohort, ctx.sequences, config);
    return ctx;
}

namespace {

std::string opt_str(const std::optional<double>& v, int decimals) {
    return v ? fmt_fixed(*v, decimals) : "";
}

void require_artifact(const std::string& path, const std::string& stage,
                      const std::string& producer) {
    if (!fs::exists(path))
        throw std::runtime_error(stage + ": missing upstream artifact " + path + " (run '" +
                                 producer + "' first)");
}

std::int64_t parse_i64(const std::string& s, const std::string& ctx) {
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw std::runtime_error(ctx + ": bad integer '" + s + "'");
    return out;
}

double parse_f64(const std::string& s, const std::string& ctx) {
    const auto v = parse_double_text(s);
    if (!v) throw std::runtime_error(ctx + ": bad number '" + s + "'");
    return *v;
}

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open file for writing: " + tmp);
        out << text;
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    fs::rename(tmp, path);
}

}  // namespace

std::vector<ArtifactRecord> stage_describe(const PipelineContext& ctx) {
    const DescriptiveReport report =
        descriptive_stats(ctx.cohort, ctx.sequences, ctx.config);
    CsvWriter w(ctx.out_dir + "/descriptive_stats.csv");
    w.row({"group_type", "group_label", "n", "mean_ltc", "sd_ltc", "mltc_pct",
           "physical_mental_pct"});
    for (const auto& r : report.rows)
        w.row({r.group_type, r.group_label, std::to_string(r.n), opt_str(r.mean_ltc, 6),
               opt_str(r.sd_ltc, 6), opt_str(r.mltc_pct, 6),
               opt_str(r.physical_mental_pct, 6)});
    const std::int64_t rows = w.rows_written() - 1;
    w.commit();
    return {{"describe", "all", "descriptive_stats.csv", rows}};
}

std::vector<ArtifactRecord> stage_pairs(const PipelineContext& ctx, const Stratum& stratum) {
    const std::string name = stratum_name(stratum.sex, stratum.age_group);
    const auto pairs = significant_pairs(stratum, ctx.sequences, ctx.config);
    CsvWriter w(ctx.out_dir + "/pairs_" + name + ".csv");
    w.row({"c1", "c2", "n11", "n10", "n01", "n00", "fisher_p", "adjusted_p", "significant",
           "n_fwd", "n_bwd", "binomial_p", "direction"});
    for (const auto& p : pairs)
        w.row({std::to_string(p.c1), std::to_string(p.c2), std::to_string(p.table.n11),
               std::to_string(p.table.n10), std::to_string(p.table.n01),
               std::to_string(p.table.n00), fmt_double(p.fisher_p), fmt_double(p.adjusted_p),
               p.significant ? "true" : "false", std::to_string(p.n_fwd),
               std::to_string(p.n_bwd), p.binomial_p ? fmt_double(*p.binomial_p) : "",
               to_string(p.direction)});
    const std::int64_t rows = w.rows_written() - 1;
    w.commit();
    return {{"pairs", name, "pairs_" + name + ".csv", rows}};
}

std::vector<PairStats> read_pairs_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    require_columns(t, {"c1", "c2", "n11", "n10", "n01", "n00", "fisher_p", "adjusted_p",
                        "significant", "n_fwd", "n_bwd", "binomial_p", "direction"});
    std::vector<PairStats> out;
    out.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string ctx = path + ":" + std::to_string(t.lines[r]);
        PairStats p;
        p.c1 = static_cast<ConditionId>(parse_i64(row[0], ctx));
        p.c2 = static_cast<ConditionId>(parse_i64(row[1], ctx));
        p.table = {parse_i64(row[2], ctx), parse_i64(row[3], ctx), parse_i64(row[4], ctx),
                   parse_i64(row[5], ctx)};
        p.fisher_p = parse_f64(row[6], ctx);
        p.adjusted_p = parse_f64(row[7], ctx);
        p.significant = row[8] == "true";
        p.n_fwd = parse_i64(row[9], ctx);
        p.n_bwd = parse_i64(row[10], ctx);
        if (!row[11].empty()) p.binomial_p = parse_f64(row[11], ctx);
        auto dir = parse_direction(row[12]);
        if (!dir) throw std::runtime_error(ctx + ": bad direction '" + row[12] + "'");
        p.direction = *dir;
        out.push_back(std::move(p));
    }
    return out;
}

namespace {

std::vector<std::string> trajectory_header(int length) {
    std::vector<std::string> h;
    for (int i = 1; i <= length; ++i) h.push_back("c" + std::to_string(i));
    h.push_back("support");
    return h;
}

}  // namespace

std::vector<ArtifactRecord> stage_trajectories(const PipelineContext& ctx,
                                               const Stratum& stratum) {
    const std::string name = stratum_name(stratum.sex, stratum.age_group);
    const std::string pairs_path = ctx.out_dir + "/pairs_" + name + ".csv";
    require_artifact(pairs_path, "trajectories", "pairs");
    const auto pairs = read_pairs_csv(pairs_path);
    const auto trajectories = mine_trajectories(stratum, ctx.sequences, pairs, ctx.config);

    CsvWriter w(ctx.out_dir + "/trajectories_" + name + ".csv");
    w.row(trajectory_header(ctx.config.traj_length));
    for (const auto& t : trajectories) {
        std::vector<std::string> row;
        for (ConditionId c : t.conditions) row.push_back(std::to_string(c));
        row.push_back(std::to_string(t.support()));
        w.row(row);
    }
    const std::int64_t traj_rows = w.rows_written() - 1;
    w.commit();

    CsvWriter m(ctx.out_dir + "/trajectory_members_" + name + ".csv");
    m.row({"traj_index", "patient_id"});
    for (std::size_t i = 0; i < trajectories.size(); ++i)
        for (PatientIndex p : trajectories[i].patients)
            m.row({std::to_string(i), ctx.cohort.patients[p].id});
    const std::int64_t member_rows = m.rows_written() - 1;
    m.commit();

    return {{"trajectories", name, "trajectories_" + name + ".csv", traj_rows},
            {"trajectories", name, "trajectory_members_" + name + ".csv", member_rows}};
}

std::vector<Trajectory> read_trajectories_csv(const std::string& trajectories_path,
                                              const std::string& members_path,
                                              const Cohort& cohort) {
    CsvTable t = read_csv(trajectories_path);
    if (t.header.size() < 3 || t.header.back() != "support")
        throw std::runtime_error(trajectories_path + ": unexpected header");
    const std::size_t length = t.header.size() - 1;
    std::vector<Trajectory> out;
    out.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string ctx = trajectories_path + ":" + std::to_string(t.lines[r]);
        Trajectory traj;
        for (std::size_t i = 0; i < length; ++i)
            traj.conditions.push_back(static_cast<ConditionId>(parse_i64(t.rows[r][i], ctx)));
        out.push_back(std::move(traj));
    }
    CsvTable m = read_csv(members_path);
    require_columns(m, {"traj_index", "patient_id"});
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        const std::string ctx = members_path + ":" + std::to_string(m.lines[r]);
        const std::int64_t idx = parse_i64(m.rows[r][0], ctx);
        if (idx < 0 || idx >= static_cast<std::int64_t>(out.size()))
            throw std::runtime_error(ctx + ": traj_index out of range");
        out[idx].patients.push_back(cohort.index_of(m.rows[r][1]));
    }
    for (auto& traj : out) std::sort(traj.patients.begin(), traj.patients.end());
    return out;
}

std::vector<ArtifactRecord> stage_network(const PipelineContext& ctx, const Stratum& stratum) {
    const std::string name = stratum_name(stratum.sex, stratum.age_group);
    const std::string traj_path = ctx.out_dir + "/trajectories_" + name + ".csv";
    const std::string members_path = ctx.out_dir + "/trajectory_members_" + name + ".csv";
    require_artifact(traj_path, "network", "trajectories");
    require_artifact(members_path, "network", "trajectories");
    const auto trajectories = read_trajectories_csv(traj_path, members_path, ctx.cohort);

    const std::string dot_file = "network_" + name + ".dot";
    const std::string sim_file = "similarity_matrix_" + name + ".csv";

    if (trajectories.empty()) {
        write_text_atomic(ctx.out_dir + "/" + dot_file, "graph condition_network {\n}\n");
        CsvWriter w(ctx.out_dir + "/" + sim_file);
        w.row({"traj_index"});
        w.commit();
        return {{"network", name, dot_file, 0}, {"network", name, sim_file, 0}};
    }

    const auto net = TrajectoryNetwork::build(trajectories, ctx.config.edge_weighting);
    std::ostringstream dot;
    write_dot(net, ctx.cohort.catalog, dot);
    write_text_atomic(ctx.out_dir + "/" + dot_file, dot.str());

    const SimilarityMatrix sim =
        similarity_matrix(net, trajectories, ctx.config.clamp_similarity);
    CsvWriter w(ctx.out_dir + "/" + sim_file);
    std::vector<std::string> header{"traj_index"};
    for (int j = 0; j < sim.n; ++j) header.push_back(std::to_string(j));
    w.row(header);
    for (int i = 0; i < sim.n; ++i) {
        std::vector<std::string> row{std::to_string(i)};
        for (int j = 0; j < sim.n; ++j) row.push_back(fmt_double(sim.at(i, j)));
        w.row(row);
    }
    const std::int64_t rows = w.rows_written() - 1;
    w.commit();
    return {{"network", name, dot_file, static_cast<std::int64_t>(net.nodes().size())},
            {"network", name, sim_file, rows}};
}

SimilarityMatrix read_similarity_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    if (t.header.empty() || t.header[0] != "traj_index")
        throw std::runtime_error(path + ": unexpected header");
    SimilarityMatrix sim;
    sim.n = static_cast<int>(t.header.size()) - 1;
    if (static_cast<int>(t.rows.size()) != sim.n)
        throw std::runtime_error(path + ": expected " + std::to_string(sim.n) + " rows, got " +
                                 std::to_string(t.rows.size()));
    sim.values.assign(static_cast<std::size_t>(sim.n) * sim.n, 0.0);
    for (int i = 0; i < sim.n; ++i)
        for (int j = 0; j < sim.n; ++j)
            sim.at(i, j) = parse_f64(t.rows[i][j + 1],
                                     path + ":" + std::to_string(t.lines[i]));
    return sim;
}

std::vector<ArtifactRecord> stage_cluster(const PipelineContext& ctx, const Stratum& stratum) {
    const std::string name = stratum_name(stratum.sex, stratum.age_group);
    const std::string sim_path = ctx.out_dir + "/similarity_matrix_" + name + ".csv";
    require_artifact(sim_path, "cluster", "network");
    const std::string traj_path = ctx.out_dir + "/trajectories_" + name + ".csv";
    const std::string members_path = ctx.out_dir + "/trajectory_members_" + name + ".csv";
    require_artifact(traj_path, "cluster", "trajectories");
    require_artifact(members_path, "cluster", "trajectories");

    const SimilarityMatrix sim = read_similarity_csv(sim_path);
    const auto trajectories = read_trajectories_csv(traj_path, members_path, ctx.cohort);
    if (static_cast<int>(trajectories.size()) != sim.n)
        throw std::runtime_error("cluster: similarity matrix order " + std::to_string(sim.n) +
                                 " does not match trajectory count " +
                                 std::to_string(trajectories.size()));

    std::vector<int> labels(sim.n, 0);
    std::map<int, double> ch_scores;
    if (sim.n >= ctx.config.k_min + 1) {
        const ClusterResult result =
            select_k_and_cluster(sim, ctx.config.k_min, ctx.config.k_max, ctx.config.seed,
                                 ctx.config.kmeans_restarts);
        labels = result.labels;
        ch_scores = result.ch_scores;
    }
    // Below k_min+1 trajectories there is nothing to sweep; everything goes
    // into a single cluster and ch_scores stays empty.

    const std::string ch_file = "ch_scores_" + name + ".csv";
    CsvWriter ch(ctx.out_dir + "/" + ch_file);
    ch.row({"k", "score"});
    for (const auto& [k, score] : ch_scores)
        ch.row({std::to_string(k), fmt_double(score)});
    const std::int64_t ch_rows = ch.rows_written() - 1;
    ch.commit();

    const std::string cl_file = "clusters_" + name + ".csv";
    CsvWriter cl(ctx.out_dir + "/" + cl_file);
    std::vector<std::string> header{"traj_index"};
    for (int i = 1; i <= ctx.config.traj_length; ++i) header.push_back("c" + std::to_string(i));
    header.push_back("support");
    header.push_back("cluster_label");
    cl.row(header);
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        std::vector<std::string> row{std::to_string(i)};
        for (ConditionId c : trajectories[i].conditions) row.push_back(std::to_string(c));
        row.push_back(std::to_string(trajectories[i].support()));
        row.push_back(std::to_string(labels[i]));
        cl.row(row);
    }
    const std::int64_t cl_rows = cl.rows_written() - 1;
    cl.commit();
    return {{"cluster", name, ch_file, ch_rows}, {"cluster", name, cl_file, cl_rows}};
}

std::vector<int> read_cluster_labels_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    if (t.header.empty() || t.header.front() != "traj_index" ||
        t.header.back() != "cluster_label")
        throw std::runtime_error(path + ": unexpected header");
    std::vector<int> labels(t.rows.size(), 0);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string ctx = path + ":" + std::to_string(t.lines[r]);
        const std::int64_t idx = parse_i64(t.rows[r][0], ctx);
        if (idx < 0 || idx >= static_cast<std::int64_t>(labels.size()))
            throw std::runtime_error(ctx + ": traj_index out of range");
        labels[idx] = static_cast<int>(parse_i64(t.rows[r].back(), ctx));
    }
    return labels;
}

std::vector<ArtifactRecord> stage_report(const PipelineContext& ctx, const Stratum& stratum,
                                         OutputFormat format) {
    const std::string name = stratum_name(stratum.sex, stratum.age_group);
    const std::string clusters_path = ctx.out_dir + "/clusters_" + name + ".csv";
    require_artifact(clusters_path, "report", "cluster");
    const std::string traj_path = ctx.out_dir + "/trajectories_" + name + ".csv";
    const std::string members_path = ctx.out_dir + "/trajectory_members_" + name + ".csv";
    require_artifact(traj_path, "report", "trajectories");
    require_artifact(members_path, "report", "trajectories");
    const std::string pairs_path = ctx.out_dir + "/pairs_" + name + ".csv";
    require_artifact(pairs_path, "report", "pairs");

    const auto trajectories = read_trajectories_csv(traj_path, members_path, ctx.cohort);
    ClusterResult clusters;
    clusters.labels = read_cluster_labels_csv(clusters_path);
    clusters.k_selected =
        clusters.labels.empty()
            ? 0
            : *std::max_element(clusters.labels.begin(), clusters.labels.end()) + 1;

    const auto reports =
        cluster_reports(clusters, trajectories, ctx.cohort, ctx.sequences, ctx.config);

    std::vector<ArtifactRecord> records;
    auto emit = [&](const std::string& file, CsvWriter& w) {
        const std::int64_t rows = w.rows_written() - 1;
        w.commit();
        records.push_back({"report", name, file, rows});
        if (format == OutputFormat::json) {
            const std::string json_file = file.substr(0, file.size() - 4) + ".json";
            csv_to_json_mirror(ctx.out_dir + "/" + file, ctx.out_dir + "/" + json_file);
            records.push_back({"report", name, json_file, rows});
        }
    };

    {
        const std::string file = "cluster_report_" + name + ".csv";
        CsvWriter w(ctx.out_dir + "/" + file);
        std::vector<std::string> header{
            "cluster_label", "n_traj",        "n_patients_total", "n_patients_unique",
            "mortality_pct", "long_stay_pct", "mortality_rate_per_100py",
            "mean_age",      "sd_age"};
        for (int s = 0; s < kSystemCategoryCount; ++s)
            header.push_back("system_" + to_string(static_cast<SystemCategory>(s)) + "_pct");
        w.row(header);
        for (const auto& r : reports) {
            std::vector<std::string> row{
                std::to_string(r.cluster_label),
                std::to_string(r.n_traj),
                std::to_string(r.n_patients_total),
                std::to_string(r.n_patients_unique),
                fmt_fixed(r.mortality_pct, 6),
                opt_str(r.long_stay_pct, 6),
                fmt_fixed(r.mortality_rate_per_100py, 6),
                fmt_fixed(r.mean_age, 6),
                opt_str(r.sd_age, 6)};
            for (int s = 0; s < kSystemCategoryCount; ++s) {
                auto it = r.system_distribution_pct.find(static_cast<SystemCategory>(s));
                row.push_back(fmt_fixed(it == r.system_distribution_pct.end() ? 0.0 : it->second, 6));
            }
            w.row(row);
        }
        emit(file, w);
    }
    {
        const std::string file = "cluster_conditions_" + name + ".csv";
        CsvWriter w(ctx.out_dir + "/" + file);
        w.row({"cluster_label", "condition_id", "name", "pct_of_trajectories"});
        for (const auto& r : reports)
            for (const auto& [cond, pct] : r.condition_prevalence_pct)
                w.row({std::to_string(r.cluster_label), std::to_string(cond),
                       ctx.cohort.catalog.at(cond).name, fmt_fixed(pct, 6)});
        emit(file, w);
    }
    {
        const std::string file = "cause_of_death_" + name + ".csv";
        CsvWriter w(ctx.out_dir + "/" + file);
        w.row({"cluster_label", "rank", "category", "pct_of_deaths"});
        for (const auto& r : reports)
            for (std::size_t i = 0; i < r.cause_of_death_top5.size(); ++i)
                w.row({std::to_string(r.cluster_label), std::to_string(i + 1),
                       to_string(r.cause_of_death_top5[i].first),
                       fmt_fixed(r.cause_of_death_top5[i].second, 6)});
        emit(file, w);
    }
    {
        const std::string file = "pair_timing_" + name + ".csv";
        CsvWriter w(ctx.out_dir + "/" + file);
        w.row({"c1", "c2", "n_co_affected", "mean_years", "sd_years"});
        for (const auto& p : read_pairs_csv(pairs_path)) {
            if (p.table.n11 == 0) continue;
            const PairTiming t = pair_timing_stats(p.c1, p.c2, stratum, ctx.sequences);
            w.row({std::to_string(p.c1), std::to_string(p.c2),
                   std::to_string(t.n_co_affected), fmt_fixed(t.mean_years, 6),
                   opt_str(t.sd_years, 6)});
        }
        emit(file, w);
    }
    return records;
}

void csv_to_json_mirror(const std::string& csv_path, const std::string& json_path) {
    CsvTable t = read_csv(csv_path);
    ordered_json arr = ordered_json::array();
    for (const auto& row : t.rows) {
        ordered_json obj = ordered_json::object();
        for (std::size_t i = 0; i < t.header.size(); ++i) {
            const std::string& v = row[i];
            if (v.empty()) {
                obj[t.header[i]] = nullptr;
                continue;
            }
            std::int64_t iv = 0;
            auto [ip, iec] = std::from_chars(v.data(), v.data() + v.size(), iv);
            if (iec == std::errc{} && ip == v.data() + v.size()) {
                obj[t.header[i]] = iv;
                continue;
            }
            if (const auto dv = parse_double_text(v); dv && std::isfinite(*dv)) {
                obj[t.header[i]] = *dv;
                continue;
            }
            obj[t.header[i]] = v;
        }
        arr.push_back(std::move(obj));
    }
    write_text_atomic(json_path, arr.dump(2) + "\n");
}

void write_manifest(const std::string& out_dir, const PipelineContext& ctx,
                    const PipelineOutcome& outcome) {
    ordered_json m;
    m["config_hash"] = config_hash(ctx.config);
    m["seed"] = ctx.config.seed;
    m["warnings"] = {{"events_dropped_out_of_window", ctx.cohort.dropped_out_of_window},
                     {"zero_event_patients", ctx.stratified.zero_event_patients}};
    ordered_json artifacts = ordered_json::array();
    for (const auto& a : outcome.artifacts)
        artifacts.push_back({{"stage", a.stage},
                             {"stratum", a.stratum},
                             {"file", a.file},
                             {"rows", a.rows}});
    m["artifacts"] = std::move(artifacts);
    m["failures"] = outcome.failures;
    write_text_atomic(out_dir + "/manifest.json", m.dump(2) + "\n");
}

namespace {

struct StratumOutcome {
    std::vector<ArtifactRecord> artifacts;
    std::optional<std::string> failure;
};

// One stratum's full stage chain. Touches only this stratum's files plus the
// immutable context, so strata can run concurrently.
StratumOutcome run_stratum(const PipelineContext& ctx, const Stratum& stratum,
                           OutputFormat format) {
    StratumOutcome out;
    auto append = [&](std::vector<ArtifactRecord> records) {
        for (auto& r : records) out.artifacts.push_back(std::move(r));
    };
    try {
        append(stage_pairs(ctx, stratum));
        append(stage_trajectories(ctx, stratum));
        append(stage_network(ctx, stratum));
        append(stage_cluster(ctx, stratum));
        append(stage_report(ctx, stratum, format));
    } catch (const std::exception& e) {
        out.failure = "stratum " + stratum_name(stratum.sex, stratum.age_group) + ": " +
                      e.what();
    }
    return out;
}

}  // namespace

PipelineOutcome run_pipeline(const PipelineConfig& config, const std::string& input_dir,
                             const std::string& out_dir, StratumFilter filter,
                             OutputFormat format) {
    PipelineContext ctx = make_context(config, input_dir, out_dir);
    PipelineOutcome outcome;
    outcome.artifacts = stage_describe(ctx);

    std::vector<std::future<StratumOutcome>> futures(ctx.stratified.strata.size());
    for (std::size_t i = 0; i < ctx.stratified.strata.size(); ++i) {
        const Stratum& stratum = ctx.stratified.strata[i];
        if (!stratum_selected(filter, stratum.sex, stratum.age_group)) continue;
        futures[i] = std::async(std::launch::async, run_stratum, std::cref(ctx),
                                std::cref(stratum), format);
    }
    // Joined in stratum order so the manifest is deterministic.
    for (auto& f : futures) {
        if (!f.valid()) continue;
        StratumOutcome s = f.get();
        for (auto& r : s.artifacts) outcome.artifacts.push_back(std::move(r));
        if (s.failure) outcome.failures.push_back(std::move(*s.failure));
    }
    outcome.exit_code = outcome.failures.empty() ? 0 : 1;
    write_manifest(out_dir, ctx, outcome);
    return outcome;
}

}  // namespace trajmine
