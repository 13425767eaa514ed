#include "trajmine/pair_stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace trajmine {

namespace {

// lgamma(i+1) memoized per thread; pair evaluation stays freely parallel.
double log_factorial(std::int64_t i) {
    thread_local std::vector<double> cache{0.0, 0.0};
    while (static_cast<std::int64_t>(cache.size()) <= i)
        cache.push_back(std::lgamma(static_cast<double>(cache.size()) + 1.0));
    return cache[i];
}

double log_choose(std::int64_t n, std::int64_t k) {
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

}  // namespace

double fisher_exact_two_sided(const ContingencyTable& t) {
    const std::int64_t r1 = t.n11 + t.n10;
    const std::int64_t r2 = t.n01 + t.n00;
    const std::int64_t c1 = t.n11 + t.n01;
    const std::int64_t n = t.total();
    if (n == 0) throw std::invalid_argument("fisher_exact_two_sided: all-zero table");
    if (t.n11 < 0 || t.n10 < 0 || t.n01 < 0 || t.n00 < 0)
        throw std::invalid_argument("fisher_exact_two_sided: negative count");

    const std::int64_t k_min = std::max<std::int64_t>(0, c1 - r2);
    const std::int64_t k_max = std::min(r1, c1);
    if (k_min == k_max) return 1.0;  // margins admit a single table

    const double log_denom = log_choose(n, c1);
    auto log_pmf = [&](std::int64_t k) {
        return log_choose(r1, k) + log_choose(r2, c1 - k) - log_denom;
    };

    // Tie comparison in log space; tables matching the observed point
    // probability within 1e-12 relative are included in the sum.
    const double log_obs = log_pmf(t.n11) + std::log1p(1e-12);
    double p = 0.0;
    for (std::int64_t k = k_min; k <= k_max; ++k) {
        const double lp = log_pmf(k);
        if (lp <= log_obs) p += std::exp(lp);
    }
    return std::min(1.0, p);
}

std::vector<std::pair<double, bool>> bonferroni_adjust(const std::vector<double>& p_values,
                                                       double alpha) {
    std::vector<std::pair<double, bool>> out;
    out.reserve(p_values.size());
    const double m = static_cast<double>(p_values.size());
    for (double p : p_values) {
        if (p < 0.0 || p > 1.0)
            throw std::invalid_argument("bonferroni_adjust: p-value outside [0,1]");
        const double adj = std::min(1.0, p * m);
        out.emplace_back(adj, adj < alpha);
    }
    return out;
}

std::string to_string(PairDirection d) {
    switch (d) {
        case PairDirection::forward: return "forward";
        case PairDirection::backward: return "backward";
        case PairDirection::undirected: return "undirected";
    }
    return "?";
}

std::optional<PairDirection> parse_direction(const std::string& s) {
    if (s == "forward") return PairDirection::forward;
    if (s == "backward") return PairDirection::backward;
    if (s == "undirected") return PairDirection::undirected;
    return std::nullopt;
}

DirectionResult binomial_direction_test(std::int64_t n_fwd, std::int64_t n_bwd,
                                        double direction_alpha, DirectionTestKind kind) {
    const std::int64_t n = n_fwd + n_bwd;
    if (n < 1)
        throw std::invalid_argument("binomial_direction_test: no direction trials");
    const std::int64_t k = std::max(n_fwd, n_bwd);

    // Upper tail P(X >= k) for X ~ Bin(n, 1/2), exact summation.
    const double log_half_n = -static_cast<double>(n) * std::log(2.0);
    double tail = 0.0;
    for (std::int64_t i = k; i <= n; ++i)
        tail += std::exp(log_choose(n, i) + log_half_n);

    DirectionResult res;
    res.p = kind == DirectionTestKind::two_sided ? std::min(1.0, 2.0 * tail)
                                                 : std::min(1.0, tail);
    if (res.p < direction_alpha) {
        if (n_fwd > n_bwd) res.direction = PairDirection::forward;
        else if (n_bwd > n_fwd) res.direction = PairDirection::backward;
    }
    return res;
}

namespace {

// Per-patient first-diagnosis date lookup, built once per stratum pass.
struct FirstDates {
    std::vector<std::map<ConditionId, Date>> dates;

    FirstDates(const Stratum& stratum, const std::vector<FirstDiagnosisSequence>& sequences) {
        dates.reserve(stratum.patients.size());
        for (PatientIndex p : stratum.patients) {
            std::map<ConditionId, Date> m;
            for (const auto& e : sequences[p].entries) m.emplace(e.condition, e.date);
            dates.push_back(std::move(m));
        }
    }
};

}  // namespace

std::vector<std::pair<ConditionId, ConditionId>> enumerate_candidate_pairs(
    const Stratum& stratum, const std::vector<FirstDiagnosisSequence>& sequences,
    int min_pair_patients, int min_separation_days) {
    std::map<std::pair<ConditionId, ConditionId>, std::int64_t> separated_count;
    for (PatientIndex p : stratum.patients) {
        const auto& entries = sequences[p].entries;
        for (std::size_t i = 0; i < entries.size(); ++i)
            for (std::size_t j = i + 1; j < entries.size(); ++j) {
                if (std::abs(days_between(entries[i].date, entries[j].date)) <
                    min_separation_days)
                    continue;
                ConditionId a = entries[i].condition, b = entries[j].condition;
                if (a > b) std::swap(a, b);
                ++separated_count[{a, b}];
            }
    }
    std::vector<std::pair<ConditionId, ConditionId>> out;
    for (const auto& [pair, count] : separated_count)
        if (count >= min_pair_patients) out.push_back(pair);
    return out;
}

std::vector<PairStats> significant_pairs(const Stratum& stratum,
                                         const std::vector<FirstDiagnosisSequence>& sequences,
                                         const PipelineConfig& config) {
    const auto candidates = enumerate_candidate_pairs(
        stratum, sequences, config.min_pair_patients, config.min_separation_days);
    const FirstDates firsts(stratum, sequences);
    const std::int64_t stratum_size = static_cast<std::int64_t>(stratum.patients.size());

    std::vector<PairStats> stats;
    stats.reserve(candidates.size());
    std::vector<double> fisher_ps;
    fisher_ps.reserve(candidates.size());

    for (const auto& [c1, c2] : candidates) {
        PairStats ps;
        ps.c1 = c1;
        ps.c2 = c2;
        std::int64_t both = 0, only1 = 0, only2 = 0, both_unseparated = 0;
        for (const auto& m : firsts.dates) {
            auto i1 = m.find(c1);
            auto i2 = m.find(c2);
            const bool has1 = i1 != m.end(), has2 = i2 != m.end();
            if (has1 && has2) {
                ++both;
                const int gap = days_between(i1->second, i2->second);
                if (gap >= config.min_separation_days) ++ps.n_fwd;
                else if (-gap >= config.min_separation_days) ++ps.n_bwd;
                else ++both_unseparated;  // ties and short gaps: no direction trial
            } else if (has1) {
                ++only1;
            } else if (has2) {
                ++only2;
            }
        }
        if (config.strict_table) {
            // Strict variant conditions on temporally resolvable co-occurrence:
            // co-affected patients below the separation threshold are dropped
            // from the table universe (table total < stratum size).
            ps.table = {both - both_unseparated, only1, only2,
                        stratum_size - both - only1 - only2};
        } else {
            ps.table = {both, only1, only2, stratum_size - both - only1 - only2};
        }
        ps.fisher_p = fisher_exact_two_sided(ps.table);
        fisher_ps.push_back(ps.fisher_p);
        stats.push_back(std::move(ps));
    }

    const auto adjusted = bonferroni_adjust(fisher_ps, config.alpha);
    for (std::size_t i = 0; i < stats.size(); ++i) {
        stats[i].adjusted_p = adjusted[i].first;
        stats[i].significant = adjusted[i].second;
        if (stats[i].significant && stats[i].n_fwd + stats[i].n_bwd >= 1) {
            const auto dir = binomial_direction_test(stats[i].n_fwd, stats[i].n_bwd,
                                                     config.direction_alpha,
                                                     config.direction_test);
            stats[i].binomial_p = dir.p;
            stats[i].direction = dir.direction;
        }
    }

    std::sort(stats.begin(), stats.end(), [](const PairStats& a, const PairStats& b) {
        if (a.table.n11 != b.table.n11) return a.table.n11 > b.table.n11;
        if (a.c1 != b.c1) return a.c1 < b.c1;
        return a.c2 < b.c2;
    });
    return stats;
}

}  // namespace trajmine
