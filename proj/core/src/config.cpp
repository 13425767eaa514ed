#include "trajmine/config.hpp"

#include "trajmine/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace trajmine {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& value) {
    int out = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || p != value.data() + value.size())
        throw std::runtime_error("config: bad integer for " + key + ": '" + value + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    const auto v = parse_double_text(value);
    if (!v) throw std::runtime_error("config: bad number for " + key + ": '" + value + "'");
    return *v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::runtime_error("config: bad boolean for " + key + ": '" + value + "'");
}

Date parse_config_date(const std::string& key, const std::string& value) {
    auto d = parse_date(value);
    if (!d) throw std::runtime_error("config: bad date for " + key + ": '" + value + "'");
    return *d;
}

}  // namespace

std::string to_string(AgeAnchor a) {
    switch (a) {
        case AgeAnchor::median_event: return "median_event";
        case AgeAnchor::study_start: return "study_start";
        case AgeAnchor::first_event: return "first_event";
    }
    return "?";
}

std::string to_string(DirectionTestKind d) {
    return d == DirectionTestKind::two_sided ? "two_sided" : "one_sided";
}

std::string to_string(EdgeWeighting w) {
    return w == EdgeWeighting::trajectory ? "trajectory" : "patient";
}

void apply_config_entry(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "study_start") {
        cfg.study_start = parse_config_date(key, value);
    } else if (key == "study_end") {
        cfg.study_end = parse_config_date(key, value);
    } else if (key == "age_threshold") {
        cfg.age_threshold = parse_int(key, value);
    } else if (key == "age_anchor") {
        if (value == "median_event") cfg.age_anchor = AgeAnchor::median_event;
        else if (value == "study_start" || value == "age_at_study_start")
            cfg.age_anchor = AgeAnchor::study_start;
        else if (value == "first_event" || value == "age_at_first_event")
            cfg.age_anchor = AgeAnchor::first_event;
        else throw std::runtime_error("config: bad age_anchor: '" + value + "'");
    } else if (key == "min_pair_patients") {
        cfg.min_pair_patients = parse_int(key, value);
        if (cfg.min_pair_patients < 1) throw std::runtime_error("config: min_pair_patients must be >= 1");
    } else if (key == "min_separation_days") {
        cfg.min_separation_days = parse_int(key, value);
        if (cfg.min_separation_days < 0) throw std::runtime_error("config: min_separation_days must be >= 0");
    } else if (key == "alpha") {
        cfg.alpha = parse_double(key, value);
        if (cfg.alpha <= 0.0 || cfg.alpha > 1.0) throw std::runtime_error("config: alpha must be in (0,1]");
    } else if (key == "direction_alpha") {
        cfg.direction_alpha = parse_double(key, value);
        if (cfg.direction_alpha <= 0.0 || cfg.direction_alpha > 1.0)
            throw std::runtime_error("config: direction_alpha must be in (0,1]");
    } else if (key == "direction_test") {
        if (value == "two_sided") cfg.direction_test = DirectionTestKind::two_sided;
        else if (value == "one_sided") cfg.direction_test = DirectionTestKind::one_sided;
        else throw std::runtime_error("config: bad direction_test: '" + value + "'");
    } else if (key == "strict_table") {
        cfg.strict_table = parse_bool(key, value);
    } else if (key == "traj_length") {
        cfg.traj_length = parse_int(key, value);
        if (cfg.traj_length < 2) throw std::runtime_error("config: traj_length must be >= 2");
    } else if (key == "min_traj_patients") {
        cfg.min_traj_patients = parse_int(key, value);
        if (cfg.min_traj_patients < 1) throw std::runtime_error("config: min_traj_patients must be >= 1");
    } else if (key == "traj_min_gap_days") {
        cfg.traj_min_gap_days = parse_int(key, value);
        if (cfg.traj_min_gap_days < 0) throw std::runtime_error("config: traj_min_gap_days must be >= 0");
    } else if (key == "require_all_pairs") {
        cfg.require_all_pairs = parse_bool(key, value);
    } else if (key == "edge_weighting") {
        if (value == "trajectory") cfg.edge_weighting = EdgeWeighting::trajectory;
        else if (value == "patient") cfg.edge_weighting = EdgeWeighting::patient;
        else throw std::runtime_error("config: bad edge_weighting: '" + value + "'");
    } else if (key == "clamp_similarity") {
        cfg.clamp_similarity = parse_bool(key, value);
    } else if (key == "k_min") {
        cfg.k_min = parse_int(key, value);
        if (cfg.k_min < 2) throw std::runtime_error("config: k_min must be >= 2");
    } else if (key == "k_max") {
        cfg.k_max = parse_int(key, value);
    } else if (key == "kmeans_restarts") {
        cfg.kmeans_restarts = parse_int(key, value);
        if (cfg.kmeans_restarts < 1) throw std::runtime_error("config: kmeans_restarts must be >= 1");
    } else if (key == "seed") {
        std::uint64_t out = 0;
        auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
        if (ec != std::errc{} || p != value.data() + value.size())
            throw std::runtime_error("config: bad seed: '" + value + "'");
        cfg.seed = out;
    } else if (key == "report_long_stay") {
        cfg.report_long_stay = parse_bool(key, value);
    } else {
        throw std::runtime_error("config: unknown key '" + key + "'");
    }
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    PipelineConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value, got '" + line + "'");
        apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    if (cfg.study_end < cfg.study_start)
        throw std::runtime_error("config: study_end precedes study_start");
    if (cfg.k_max < cfg.k_min) throw std::runtime_error("config: k_max must be >= k_min");
    return cfg;
}

std::string serialize_config(const PipelineConfig& c) {
    std::ostringstream out;
    char buf[40];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    out << "age_anchor=" << to_string(c.age_anchor) << '\n'
        << "age_threshold=" << c.age_threshold << '\n'
        << "alpha=" << num(c.alpha) << '\n'
        << "clamp_similarity=" << (c.clamp_similarity ? "true" : "false") << '\n'
        << "direction_alpha=" << num(c.direction_alpha) << '\n'
        << "direction_test=" << to_string(c.direction_test) << '\n'
        << "edge_weighting=" << to_string(c.edge_weighting) << '\n'
        << "k_max=" << c.k_max << '\n'
        << "k_min=" << c.k_min << '\n'
        << "kmeans_restarts=" << c.kmeans_restarts << '\n'
        << "min_pair_patients=" << c.min_pair_patients << '\n'
        << "min_separation_days=" << c.min_separation_days << '\n'
        << "min_traj_patients=" << c.min_traj_patients << '\n'
        << "report_long_stay=" << (c.report_long_stay ? "true" : "false") << '\n'
        << "require_all_pairs=" << (c.require_all_pairs ? "true" : "false") << '\n'
        << "seed=" << c.seed << '\n'
        << "strict_table=" << (c.strict_table ? "true" : "false") << '\n'
        << "study_end=" << to_iso_string(c.study_end) << '\n'
        << "study_start=" << to_iso_string(c.study_start) << '\n'
        << "traj_length=" << c.traj_length << '\n'
        << "traj_min_gap_days=" << c.traj_min_gap_days << '\n';
    return out.str();
}

std::string config_hash(const PipelineConfig& cfg) {
    const std::string text = serialize_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace trajmine
