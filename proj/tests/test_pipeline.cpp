#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "trajmine/csv.hpp"
#include "trajmine/pipeline.hpp"
#include "trajmine/synth.hpp"

using namespace trajmine;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Two planted trajectory groups in a single stratum (all male, born 1945-55).
const char* kTwoGroupSpec = R"(
seed = 404
conditions = 12
background_patients = 200
background_prevalence = 0.01
noise_rate = 0.2
p_male = 1.0
birth_year_min = 1945
birth_year_max = 1955
death_prob = 0.25
stay_prob = 0.5

[archetype]
cluster = 0
conditions = 1,2,3
mean_gap_days = 400
sd_gap_days = 100
penetrance = 0.9
members = 120

[archetype]
cluster = 0
conditions = 2,3,4
mean_gap_days = 400
sd_gap_days = 100
penetrance = 0.9
members = 120

[archetype]
cluster = 1
conditions = 6,7,8
mean_gap_days = 400
sd_gap_days = 100
penetrance = 0.9
members = 120

[archetype]
cluster = 1
conditions = 7,8,9
mean_gap_days = 400
sd_gap_days = 100
penetrance = 0.9
members = 120
)";

std::string make_input(const std::string& name) {
    static std::map<std::string, std::shared_ptr<TempDir>> keep_alive;
    auto dir = std::make_shared<TempDir>(name);
    keep_alive[name] = dir;
    generate_cohort(parse_synth_spec_text(kTwoGroupSpec, "inline"), dir->str());
    return dir->str();
}

}  // namespace

TEST_CASE("run_pipeline: artifacts, manifest, and planted structure") {
    const std::string input = make_input("trajmine_pipe_input");
    TempDir out("trajmine_pipe_out");
    PipelineConfig cfg;
    const auto outcome = run_pipeline(cfg, input, out.str());
    CHECK(outcome.exit_code == 0);
    CHECK(outcome.failures.empty());

    // describe + 4 strata x (pairs, trajectories x2, network x2, cluster x2,
    // report x4) = 1 + 4*11 artifacts.
    CHECK(outcome.artifacts.size() == 1 + 4 * 11);
    for (const auto& rec : outcome.artifacts) CHECK(fs::exists(out.path / rec.file));
    CHECK(fs::exists(out.path / "manifest.json"));

    // The populated stratum is male_ge45; its trajectories include the four
    // planted ordered triples.
    const auto trajs = read_csv(out.str() + "/trajectories_male_ge45.csv");
    REQUIRE(trajs.rows.size() >= 4);
    std::set<std::vector<std::string>> seen;
    for (const auto& row : trajs.rows) seen.insert({row[0], row[1], row[2]});
    CHECK(seen.count({"1", "2", "3"}) == 1);
    CHECK(seen.count({"2", "3", "4"}) == 1);
    CHECK(seen.count({"6", "7", "8"}) == 1);
    CHECK(seen.count({"7", "8", "9"}) == 1);

    // Two planted groups recovered as the selected k.
    const auto clusters = read_csv(out.str() + "/clusters_male_ge45.csv");
    std::set<std::string> labels;
    for (const auto& row : clusters.rows) labels.insert(row.back());
    CHECK(labels.size() == 2);

    // Empty strata fall through with header-only artifacts.
    CHECK(read_csv(out.str() + "/pairs_female_lt45.csv").rows.empty());
    CHECK(read_csv(out.str() + "/clusters_female_lt45.csv").rows.empty());
    CHECK(read_csv(out.str() + "/cluster_report_female_lt45.csv").rows.empty());
}

TEST_CASE("run_pipeline: reruns are byte-identical") {
    const std::string input = make_input("trajmine_pipe_det_input");
    TempDir out_a("trajmine_pipe_det_a");
    TempDir out_b("trajmine_pipe_det_b");
    PipelineConfig cfg;
    cfg.seed = 9;
    const auto a = run_pipeline(cfg, input, out_a.str());
    const auto b = run_pipeline(cfg, input, out_b.str());
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    REQUIRE(a.artifacts.size() == b.artifacts.size());
    for (const auto& rec : a.artifacts) {
        const std::string lhs = slurp(out_a.path / rec.file);
        const std::string rhs = slurp(out_b.path / rec.file);
        CHECK_MESSAGE(lhs == rhs, rec.file);
        CHECK_FALSE(lhs.empty());
    }
    CHECK(slurp(out_a.path / "manifest.json") == slurp(out_b.path / "manifest.json"));
}

TEST_CASE("stage subcommands: missing upstream artifact names the file") {
    const std::string input = make_input("trajmine_pipe_stage_input");
    TempDir out("trajmine_pipe_stage_out");
    PipelineConfig cfg;
    PipelineContext ctx = make_context(cfg, input, out.str());

    try {
        stage_cluster(ctx, ctx.stratified.strata[1]);  // male_ge45, nothing written yet
        FAIL("expected an error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("similarity_matrix_male_ge45.csv") !=
              std::string::npos);
    }
    try {
        stage_trajectories(ctx, ctx.stratified.strata[1]);
        FAIL("expected an error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("pairs_male_ge45.csv") != std::string::npos);
    }

    // Stage-at-a-time execution reproduces the full-run artifacts.
    stage_pairs(ctx, ctx.stratified.strata[1]);
    stage_trajectories(ctx, ctx.stratified.strata[1]);
    stage_network(ctx, ctx.stratified.strata[1]);
    stage_cluster(ctx, ctx.stratified.strata[1]);
    stage_report(ctx, ctx.stratified.strata[1]);
    CHECK(fs::exists(out.path / "cluster_report_male_ge45.csv"));

    TempDir full("trajmine_pipe_stage_full");
    run_pipeline(cfg, input, full.str());
    for (const char* f : {"pairs_male_ge45.csv", "trajectories_male_ge45.csv",
                          "similarity_matrix_male_ge45.csv", "clusters_male_ge45.csv",
                          "cluster_report_male_ge45.csv"})
        CHECK(slurp(out.path / f) == slurp(full.path / f));
}

TEST_CASE("report stage: json mirrors every report csv") {
    const std::string input = make_input("trajmine_pipe_json_input");
    TempDir out("trajmine_pipe_json_out");
    PipelineConfig cfg;
    const auto outcome =
        run_pipeline(cfg, input, out.str(), StratumFilter::male_ge45, OutputFormat::json);
    CHECK(outcome.exit_code == 0);
    for (const char* f :
         {"cluster_report_male_ge45.json", "cluster_conditions_male_ge45.json",
          "cause_of_death_male_ge45.json", "pair_timing_male_ge45.json"}) {
        REQUIRE(fs::exists(out.path / f));
        const std::string text = slurp(out.path / f);
        CHECK(text.front() == '[');
    }
    // Field names mirror the CSV header.
    const std::string json = slurp(out.path / "cluster_report_male_ge45.json");
    CHECK(json.find("\"n_patients_unique\"") != std::string::npos);
    CHECK(json.find("\"mortality_rate_per_100py\"") != std::string::npos);
}

TEST_CASE("run_pipeline: missing stays with long-stay reporting aborts at report") {
    const std::string input = make_input("trajmine_pipe_nostays_input");
    fs::remove(fs::path(input) / "hospital_stays.csv");
    TempDir out("trajmine_pipe_nostays_out");
    PipelineConfig cfg;
    const auto outcome = run_pipeline(cfg, input, out.str());
    CHECK(outcome.exit_code == 1);
    REQUIRE_FALSE(outcome.failures.empty());
    CHECK(outcome.failures[0].find("hospital_stays") != std::string::npos);
    // Earlier stages of the failed stratum still persisted their artifacts.
    CHECK(fs::exists(out.path / "clusters_male_ge45.csv"));
    CHECK_FALSE(fs::exists(out.path / "cluster_report_male_ge45.csv"));

    // Disabling the statistic lets the run complete.
    TempDir out2("trajmine_pipe_nostays_ok");
    cfg.report_long_stay = false;
    CHECK(run_pipeline(cfg, input, out2.str()).exit_code == 0);
    CHECK(fs::exists(out2.path / "cluster_report_male_ge45.csv"));
}

TEST_CASE("artifact doubles: subnormal p-values round-trip") {
    // Tiny exact Fisher p-values land in the subnormal range; they must
    // survive the write/parse cycle stage resumption depends on.
    for (double v : {4.9746546828035348e-311, 2.2250738585072014e-308, 1e-300, 0.25}) {
        const auto parsed = parse_double_text(fmt_double(v));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == v);
    }
    CHECK_FALSE(parse_double_text("1e999").has_value());  // true overflow
    CHECK_FALSE(parse_double_text("12x").has_value());
    CHECK_FALSE(parse_double_text("").has_value());
}

TEST_CASE("csv writer: uncommitted output is kept with a .partial suffix") {
    TempDir dir("trajmine_pipe_partial");
    const std::string path = (dir.path / "stage.csv").string();
    {
        CsvWriter w(path);
        w.row({"a", "b"});
        w.row({"1", "2"});
        // No commit: simulates a stage aborting mid-write.
    }
    CHECK_FALSE(fs::exists(path));
    CHECK(fs::exists(path + ".partial"));
    {
        CsvWriter w(path);
        w.row({"a", "b"});
        w.commit();
    }
    CHECK(fs::exists(path));
    CHECK_FALSE(fs::exists(path + ".tmp"));
}

TEST_CASE("config: hash changes iff a field changes") {
    PipelineConfig a;
    PipelineConfig b;
    CHECK(config_hash(a) == config_hash(b));
    b.seed = 1;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.min_separation_days = 184;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.clamp_similarity = false;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.study_end = make_date(2020, 12, 31);
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("config: file round-trip and unknown key rejection") {
    TempDir dir("trajmine_pipe_cfg");
    {
        std::ofstream out(dir.path / "good.cfg");
        out << "# pipeline settings\n"
            << "study_start = 2001-01-01\n"
            << "age_threshold = 50\n"
            << "min_separation_days = 90\n"
            << "seed = 77\n"
            << "edge_weighting = patient\n";
    }
    const auto cfg = load_config((dir.path / "good.cfg").string());
    CHECK(cfg.study_start == make_date(2001, 1, 1));
    CHECK(cfg.age_threshold == 50);
    CHECK(cfg.min_separation_days == 90);
    CHECK(cfg.seed == 77);
    CHECK(cfg.edge_weighting == EdgeWeighting::patient);
    CHECK(cfg.alpha == 0.001);  // untouched defaults

    {
        std::ofstream out(dir.path / "bad.cfg");
        out << "alpha = 0.001\nnot_a_key = 3\n";
    }
    CHECK_THROWS_WITH_AS(load_config((dir.path / "bad.cfg").string()),
                         doctest::Contains("not_a_key"), std::runtime_error);
}

#ifdef TRAJMINE_CLI
TEST_CASE("cli: synth, run, and stage-order errors through the binary") {
    TempDir work("trajmine_cli_work");
    const std::string spec_path = (work.path / "spec.txt").string();
    std::ofstream(spec_path) << kTwoGroupSpec;
    const std::string cli = TRAJMINE_CLI;
    const std::string input = (work.path / "cohort").string();
    const std::string out = (work.path / "out").string();

    auto run_cmd = [](const std::string& cmd) {
        return std::system((cmd + " >/dev/null 2>&1").c_str());
    };
    CHECK(run_cmd(cli + " synth --spec " + spec_path + " --out " + input) == 0);
    CHECK(fs::exists(fs::path(input) / "truth.csv"));

    // cluster before network: non-zero exit.
    CHECK(run_cmd(cli + " cluster --input " + input + " --out " + out) != 0);

    CHECK(run_cmd(cli + " run --input " + input + " --out " + out) == 0);
    CHECK(fs::exists(fs::path(out) / "manifest.json"));
    CHECK(fs::exists(fs::path(out) / "clusters_male_ge45.csv"));

    // Stage rerun over existing artifacts, JSON mirror.
    CHECK(run_cmd(cli + " report --input " + input + " --out " + out +
                  " --stratum male_ge45 --format json") == 0);
    CHECK(fs::exists(fs::path(out) / "cluster_report_male_ge45.json"));
}
#endif
