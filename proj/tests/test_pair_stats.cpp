#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "trajmine/pair_stats.hpp"
#include "trajmine/rng.hpp"

using namespace trajmine;

namespace {

Stratum make_stratum(int n) {
    Stratum s;
    s.sex = Sex::male;
    s.age_group = AgeGroup::under_45;
    for (int i = 0; i < n; ++i) s.patients.push_back(static_cast<PatientIndex>(i));
    return s;
}

// Hand-built sequences without a Cohort: entries must be date-sorted.
FirstDiagnosisSequence seq(std::initializer_list<std::pair<ConditionId, int>> entries) {
    FirstDiagnosisSequence s;
    for (const auto& [cond, day] : entries) s.entries.push_back({cond, Date{day}});
    std::sort(s.entries.begin(), s.entries.end(), [](const auto& a, const auto& b) {
        return a.date != b.date ? a.date < b.date : a.condition < b.condition;
    });
    return s;
}

}  // namespace

TEST_CASE("fisher: balanced table has p = 1") {
    CHECK(fisher_exact_two_sided({5, 5, 5, 5}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fisher: perfectly associated 10/0/0/10") {
    const double expected = 2.0 / 184756.0;  // two extreme tables over C(20,10)
    CHECK(fisher_exact_two_sided({10, 0, 0, 10}) ==
          doctest::Approx(expected).epsilon(1e-9));
    CHECK(oracles::fisher_two_sided({10, 0, 0, 10}) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fisher: golden value for (8,2,1,9)") {
    // Enumeration oracle computed 920/167960 before the implementation.
    const double golden = 0.005477494641581329;
    CHECK(fisher_exact_two_sided({8, 2, 1, 9}) == doctest::Approx(golden).epsilon(1e-10));
    CHECK(oracles::fisher_two_sided({8, 2, 1, 9}) == doctest::Approx(golden).epsilon(1e-12));
}

TEST_CASE("fisher: all-zero table is an error") {
    CHECK_THROWS_AS(fisher_exact_two_sided({0, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("fisher: degenerate margins admit a single table") {
    CHECK(fisher_exact_two_sided({0, 0, 3, 4}) == 1.0);
    CHECK(fisher_exact_two_sided({3, 4, 0, 0}) == 1.0);
    CHECK(fisher_exact_two_sided({0, 3, 0, 4}) == 1.0);
}

TEST_CASE("fisher: symmetric under row swap, column swap, transpose") {
    Rng rng(7001);
    for (int trial = 0; trial < 200; ++trial) {
        ContingencyTable t{rng.uniform_int(0, 12), rng.uniform_int(0, 12),
                           rng.uniform_int(0, 12), rng.uniform_int(0, 12)};
        if (t.total() == 0) continue;
        const double p = fisher_exact_two_sided(t);
        CHECK(fisher_exact_two_sided({t.n01, t.n00, t.n11, t.n10}) ==
              doctest::Approx(p).epsilon(1e-12));  // rows swapped
        CHECK(fisher_exact_two_sided({t.n10, t.n11, t.n00, t.n01}) ==
              doctest::Approx(p).epsilon(1e-12));  // columns swapped
        CHECK(fisher_exact_two_sided({t.n11, t.n01, t.n10, t.n00}) ==
              doctest::Approx(p).epsilon(1e-12));  // transposed
    }
}

TEST_CASE("fisher: agrees with enumeration oracle for all tables with N <= 25") {
    for (int n11 = 0; n11 <= 25; ++n11)
        for (int n10 = 0; n11 + n10 <= 25; ++n10)
            for (int n01 = 0; n11 + n10 + n01 <= 25; ++n01)
                for (int n00 = 0; n11 + n10 + n01 + n00 <= 25; ++n00) {
                    ContingencyTable t{n11, n10, n01, n00};
                    if (t.total() == 0) continue;
                    const double impl = fisher_exact_two_sided(t);
                    const double oracle = oracles::fisher_two_sided(t);
                    REQUIRE(std::abs(impl - oracle) <= 1e-10);
                }
}

TEST_CASE("fisher: moving mass toward independence never decreases p") {
    // For fixed margins the tables form a chain in n11; independence sits at
    // r1*c1/N. Walk each chain and check monotonicity on both sides.
    for (int r1 = 1; r1 <= 12; ++r1)
        for (int r2 = 1; r2 <= 12; ++r2)
            for (int c1 = 1; c1 <= r1 + r2; ++c1) {
                const int n = r1 + r2;
                const int k_lo = std::max(0, c1 - r2);
                const int k_hi = std::min(r1, c1);
                if (k_lo >= k_hi) continue;
                const double mode = static_cast<double>(r1) * c1 / n;
                for (int k = k_lo; k < k_hi; ++k) {
                    ContingencyTable a{k, r1 - k, c1 - k, r2 - (c1 - k)};
                    ContingencyTable b{k + 1, r1 - k - 1, c1 - k - 1, r2 - (c1 - k - 1)};
                    const double pa = fisher_exact_two_sided(a);
                    const double pb = fisher_exact_two_sided(b);
                    if (k + 1 <= mode) CHECK(pb >= pa - 1e-12);   // moving toward mode
                    if (k >= mode) CHECK(pa >= pb - 1e-12);       // moving away from mode
                }
            }
}

TEST_CASE("bonferroni: single p-value is unchanged") {
    const auto out = bonferroni_adjust({0.0001});
    REQUIRE(out.size() == 1);
    CHECK(out[0].first == doctest::Approx(0.0001));
    CHECK(out[0].second);
}

TEST_CASE("bonferroni: threshold is strict") {
    const auto out = bonferroni_adjust({0.0005, 0.5});
    REQUIRE(out.size() == 2);
    CHECK(out[0].first == doctest::Approx(0.001));
    CHECK_FALSE(out[0].second);  // 0.001 is not < 0.001
    CHECK(out[1].first == doctest::Approx(1.0));
    CHECK_FALSE(out[1].second);
}

TEST_CASE("bonferroni: empty input, recompute check on 100 values") {
    CHECK(bonferroni_adjust({}).empty());
    Rng rng(42);
    std::vector<double> ps;
    for (int i = 0; i < 100; ++i) ps.push_back(rng.next_double() * 0.01);
    const auto out = bonferroni_adjust(ps, 0.001);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double adj = std::min(1.0, ps[i] * 100.0);
        CHECK(out[i].first == doctest::Approx(adj).epsilon(1e-15));
        CHECK(out[i].second == (adj < 0.001));
    }
}

TEST_CASE("binomial direction: symmetric counts give p = 1 exactly") {
    const auto r = binomial_direction_test(5, 5);
    CHECK(r.p == 1.0);
    CHECK(r.direction == PairDirection::undirected);
}

TEST_CASE("binomial direction: 10 vs 0") {
    const auto r = binomial_direction_test(10, 0);
    CHECK(r.p == doctest::Approx(0.001953125).epsilon(1e-12));
    CHECK(r.direction == PairDirection::forward);
}

TEST_CASE("binomial direction: 7 vs 3 is undirected") {
    const auto r = binomial_direction_test(7, 3);
    CHECK(r.p == doctest::Approx(0.34375).epsilon(1e-12));
    CHECK(r.direction == PairDirection::undirected);
}

TEST_CASE("binomial direction: zero trials is an error") {
    CHECK_THROWS_AS(binomial_direction_test(0, 0), std::invalid_argument);
}

TEST_CASE("binomial direction: mirrored counts, oracle agreement, alpha link") {
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const std::int64_t a = rng.uniform_int(0, 30);
        const std::int64_t b = rng.uniform_int(0, 30);
        if (a + b == 0) continue;
        const auto fwd = binomial_direction_test(a, b);
        const auto bwd = binomial_direction_test(b, a);
        CHECK(fwd.p == doctest::Approx(bwd.p).epsilon(1e-14));
        if (fwd.direction == PairDirection::forward)
            CHECK(bwd.direction == PairDirection::backward);
        if (fwd.direction == PairDirection::undirected)
            CHECK(bwd.direction == PairDirection::undirected);
        if (fwd.direction != PairDirection::undirected) CHECK(fwd.p < 0.05);
        CHECK(fwd.p == doctest::Approx(oracles::binomial_two_sided(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("candidate pairs: separation threshold at exactly 10 patients") {
    std::vector<FirstDiagnosisSequence> sequences;
    for (int i = 0; i < 10; ++i) sequences.push_back(seq({{1, 0}, {2, 200}}));
    const auto stratum = make_stratum(10);
    const auto found = enumerate_candidate_pairs(stratum, sequences, 10, 183);
    REQUIRE(found.size() == 1);
    CHECK(found[0] == std::make_pair(ConditionId{1}, ConditionId{2}));
}

TEST_CASE("candidate pairs: nine patients are not enough") {
    std::vector<FirstDiagnosisSequence> sequences;
    for (int i = 0; i < 9; ++i) sequences.push_back(seq({{1, 0}, {2, 200}}));
    CHECK(enumerate_candidate_pairs(make_stratum(9), sequences, 10, 183).empty());
}

TEST_CASE("candidate pairs: separation filter counts, oracle recount") {
    // 12 patients share both conditions but only 8 with >= 183 days between.
    std::vector<FirstDiagnosisSequence> sequences;
    for (int i = 0; i < 8; ++i) sequences.push_back(seq({{1, 0}, {2, 190 + i}}));
    for (int i = 0; i < 4; ++i) sequences.push_back(seq({{1, 0}, {2, 100}}));
    const auto stratum = make_stratum(12);
    CHECK(enumerate_candidate_pairs(stratum, sequences, 10, 183).empty());

    // Direct recount: the pair qualifies once the threshold drops to 8.
    int separated = 0;
    for (const auto& s : sequences) {
        const auto d1 = s.first(1), d2 = s.first(2);
        if (d1 && d2 && std::abs(days_between(*d1, *d2)) >= 183) ++separated;
    }
    CHECK(separated == 8);
    CHECK(enumerate_candidate_pairs(stratum, sequences, 8, 183).size() == 1);
}

TEST_CASE("significant_pairs: planted direction is detected end to end") {
    // 45 co-affected patients among 500; 40 have condition 1 first by > 183d.
    PipelineConfig cfg;
    std::vector<FirstDiagnosisSequence> sequences;
    for (int i = 0; i < 40; ++i) sequences.push_back(seq({{1, 0}, {2, 250}}));
    for (int i = 0; i < 5; ++i) sequences.push_back(seq({{2, 0}, {1, 250}}));
    for (int i = 0; i < 55; ++i) sequences.push_back(seq({{1, 100}}));
    for (int i = 0; i < 50; ++i) sequences.push_back(seq({{2, 100}}));
    for (int i = 0; i < 350; ++i) sequences.push_back(seq({}));
    const auto stats = significant_pairs(make_stratum(500), sequences, cfg);
    REQUIRE(stats.size() == 1);
    const auto& p = stats[0];
    CHECK(p.c1 == 1);
    CHECK(p.c2 == 2);
    CHECK(p.table.n11 == 45);
    CHECK(p.table.n10 == 55);
    CHECK(p.table.n01 == 50);
    CHECK(p.table.n00 == 350);
    CHECK(p.significant);
    CHECK(p.n_fwd == 40);
    CHECK(p.n_bwd == 5);
    REQUIRE(p.binomial_p.has_value());
    CHECK(p.direction == PairDirection::forward);
    CHECK(p.fisher_p == doctest::Approx(oracles::fisher_two_sided(p.table)).epsilon(1e-10));
    CHECK(*p.binomial_p == doctest::Approx(oracles::binomial_two_sided(40, 5)).epsilon(1e-12));
}

TEST_CASE("significant_pairs: independent conditions stay insignificant") {
    // Monte Carlo false positives over seeds; expect well under alpha * runs.
    PipelineConfig cfg;
    int false_positives = 0;
    const int runs = 40;
    for (int run = 0; run < runs; ++run) {
        Rng rng(1000 + run);
        std::vector<FirstDiagnosisSequence> sequences;
        for (int i = 0; i < 600; ++i) {
            std::vector<std::pair<ConditionId, int>> entries;
            if (rng.bernoulli(0.4))
                entries.push_back({1, static_cast<int>(rng.uniform_int(0, 4000))});
            if (rng.bernoulli(0.4))
                entries.push_back({2, static_cast<int>(rng.uniform_int(0, 4000))});
            FirstDiagnosisSequence s;
            for (auto& [c, d] : entries) s.entries.push_back({c, Date{d}});
            std::sort(s.entries.begin(), s.entries.end(),
                      [](const auto& a, const auto& b) { return a.date < b.date; });
            sequences.push_back(std::move(s));
        }
        for (const auto& p : significant_pairs(make_stratum(600), sequences, cfg))
            if (p.significant) ++false_positives;
    }
    CHECK(false_positives <= 1);
}

TEST_CASE("significant_pairs: output sorted by n11 descending") {
    PipelineConfig cfg;
    cfg.min_pair_patients = 2;
    std::vector<FirstDiagnosisSequence> sequences;
    for (int i = 0; i < 30; ++i) sequences.push_back(seq({{1, 0}, {2, 200}}));
    for (int i = 0; i < 10; ++i) sequences.push_back(seq({{3, 0}, {4, 200}}));
    for (int i = 0; i < 20; ++i) sequences.push_back(seq({}));
    const auto stats = significant_pairs(make_stratum(60), sequences, cfg);
    REQUIRE(stats.size() >= 2);
    for (std::size_t i = 1; i < stats.size(); ++i)
        CHECK(stats[i - 1].table.n11 >= stats[i].table.n11);
}
