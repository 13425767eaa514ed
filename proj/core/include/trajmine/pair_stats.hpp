#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "trajmine/cohort.hpp"
#include "trajmine/config.hpp"

namespace trajmine {

/// 2x2 patient counts: both / only first / only second / neither.
struct ContingencyTable {
    std::int64_t n11 = 0;
    std::int64_t n10 = 0;
    std::int64_t n01 = 0;
    std::int64_t n00 = 0;

    std::int64_t total() const { return n11 + n10 + n01 + n00; }
};

/// Exact two-sided Fisher test: sums hypergeometric probabilities of every
/// table with the observed margins whose point probability does not exceed
/// the observed one (relative tie tolerance 1e-12). No normal approximation.
/// Throws on an all-zero table.
double fisher_exact_two_sided(const ContingencyTable& table);

/// adjusted = min(1, p*m), significant iff adjusted < alpha (strict).
/// m is the list length; the caller passes one stratum's tested pairs.
std::vector<std::pair<double, bool>> bonferroni_adjust(const std::vector<double>& p_values,
                                                       double alpha = 0.001);

enum class PairDirection { forward, backward, undirected };
std::string to_string(PairDirection d);
std::optional<PairDirection> parse_direction(const std::string& s);

struct DirectionResult {
    double p = 1.0;
    PairDirection direction = PairDirection::undirected;
};

/// Exact binomial test against proportion 0.5 on n_fwd+n_bwd trials.
/// two_sided: p = min(1, 2*P(X >= max(n_fwd, n_bwd))). A preferred direction
/// is assigned only when p < direction_alpha. Throws when both counts are 0.
DirectionResult binomial_direction_test(std::int64_t n_fwd, std::int64_t n_bwd,
                                        double direction_alpha = 0.05,
                                        DirectionTestKind kind = DirectionTestKind::two_sided);

/// One tested condition pair; c1 < c2 canonical.
struct PairStats {
    ConditionId c1 = 0;
    ConditionId c2 = 0;
    ContingencyTable table;
    double fisher_p = 1.0;
    double adjusted_p = 1.0;
    bool significant = false;
    std::int64_t n_fwd = 0;  // first(c1) precedes first(c2) by >= min_separation_days
    std::int64_t n_bwd = 0;
    std::optional<double> binomial_p;  // only tested for significant pairs
    PairDirection direction = PairDirection::undirected;
};

/// Unordered pairs for which at least `min_pair_patients` stratum patients
/// carry both conditions with first diagnoses >= min_separation_days apart.
std::vector<std::pair<ConditionId, ConditionId>> enumerate_candidate_pairs(
    const Stratum& stratum, const std::vector<FirstDiagnosisSequence>& sequences,
    int min_pair_patients = 10, int min_separation_days = 183);

/// Full per-stratum pair analysis: qualification, Fisher, Bonferroni over the
/// stratum's tested pairs, then the direction test for significant pairs.
/// Returns every tested pair (flagged), sorted by n11 descending.
std::vector<PairStats> significant_pairs(const Stratum& stratum,
                                         const std::vector<FirstDiagnosisSequence>& sequences,
                                         const PipelineConfig& config);

}  // namespace trajmine
