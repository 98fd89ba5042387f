#include "lossequiv/equivalence.hpp"
#include "lossequiv/error.hpp"
#include "lossequiv/simulate.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace lossequiv {
namespace {

using testing::rel_diff;

const PairedSeries set1({11.0, 999.0}, {10.0, 990.0});
const PairedSeries equal_totals({2.0, 2.0}, {1.0, 3.0});

const LossSpec absolute{.p = 1.0, .q = 0.0};
const LossSpec squared{.p = 2.0, .q = 0.0};
const LossSpec ape{.p = 1.0, .q = -1.0, .weight_side = WeightSide::Target};
const LossSpec webster{.p = 2.0, .q = -1.0, .weight_side = WeightSide::Target};
const LossSpec huntington_hill{.p = 2.0, .q = -1.0, .weight_side = WeightSide::Realized};

// Share-loss mean for the two-unit example: both units differ by 0.9/1010.
constexpr double set1_mean_share = 0.9 / 1010.0;

TEST(CRatio, examples) {
    EXPECT_DOUBLE_EQ(c_ratio(set1), 1.01);
    EXPECT_EQ(c_ratio(PairedSeries({3.0, 5.0}, {3.0, 5.0})), 1.0);
    EXPECT_EQ(c_ratio(PairedSeries({2.0, 4.0}, {1.0, 2.0})), 2.0);
    EXPECT_THROW(c_ratio(PairedSeries({1.0}, {0.0})), Error);
}

TEST(ShareIdentity, examples) {
    const auto first = lemma1_check(equal_totals, 0, 1.0);
    EXPECT_DOUBLE_EQ(first.lhs, 0.25);
    EXPECT_DOUBLE_EQ(first.rhs, 0.25);
    const auto squared_sides = lemma1_check(equal_totals, 0, 2.0);
    EXPECT_DOUBLE_EQ(squared_sides.lhs, 0.0625);
    EXPECT_DOUBLE_EQ(squared_sides.rhs, 0.0625);

    const PairedSeries same({4.0, 6.0}, {4.0, 6.0});
    for (double p : {0.5, 1.0, 3.0}) {
        const auto sides = lemma1_check(same, 1, p);
        EXPECT_EQ(sides.lhs, 0.0);
        EXPECT_EQ(sides.rhs, 0.0);
    }
}

TEST(ShareIdentity, errors) {
    try {
        (void)lemma1_check(set1, 2, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::IndexOutOfRange);
    }
    try {
        (void)lemma1_check(PairedSeries({0.0, 0.0}, {1.0, 1.0}), 0, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ZeroTotal);
    }
}

TEST(ShareIdentity, identity_within_tolerance_on_random_series) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const auto s = testing::random_series(rng, testing::random_size(rng, 2, 100), 0.0, 1e6);
        for (double p : {0.5, 1.0, 2.0, 3.0}) {
            for (std::size_t i = 0; i < s.size(); ++i) {
                const auto sides = lemma1_check(s, i, p);
                ASSERT_LE(std::abs(sides.lhs - sides.rhs), 1e-12 * std::max(1.0, std::abs(sides.lhs)));
                ASSERT_LE(rel_diff(sides.lhs, sides.rhs), 1e-10);
            }
        }
    }
}

TEST(KConstant, table) {
    const PairedSeries s({1.0, 3.0}, {2.0, 6.0});
    EXPECT_EQ(k_constant(ape, s), 1.0);
    EXPECT_EQ(k_constant(ape, set1), 1.0);
    EXPECT_EQ(k_constant(absolute, s), 2.0);
    EXPECT_EQ(k_constant(squared, s), 4.0);
    EXPECT_EQ(k_constant(webster, s), 4.0);
    EXPECT_EQ(k_constant(huntington_hill, s), 2.0);
    EXPECT_EQ(k_constant(LossSpec{.p = 3.0, .q = -0.5, .weight_side = WeightSide::Target}, s), 4.0);
    EXPECT_EQ(k_constant(absolute, set1), 505.0);
}

TEST(EquivalenceDifference, examples) {
    EXPECT_NEAR(equivalence_difference(absolute, set1), 5.0 - 505.0 * set1_mean_share, 1e-12);
    EXPECT_NEAR(equivalence_difference(absolute, set1), 4.55, 5e-5);

    const PairedSeries same({4.0, 6.0}, {4.0, 6.0});
    for (const auto& spec : {absolute, squared, ape, webster, huntington_hill}) {
        EXPECT_EQ(equivalence_difference(spec, same), 0.0);
    }
    // A power-of-two total keeps every share exact, so the two means agree bitwise.
    EXPECT_EQ(equivalence_difference(ape, PairedSeries({1.0, 4.0, 3.0}, {2.0, 2.0, 4.0})), 0.0);
    EXPECT_NEAR(equivalence_difference(ape, PairedSeries({1.0, 4.0, 5.0}, {2.0, 2.0, 6.0})), 0.0, 1e-15);
}

TEST(EquivalenceRatio, examples) {
    const PairedSeries same({4.0, 6.0}, {4.0, 6.0});
    const auto undefined = equivalence_ratio(absolute, same);
    EXPECT_FALSE(undefined.share_over_level);
    EXPECT_FALSE(undefined.level_over_share);

    const auto one = equivalence_ratio(ape, PairedSeries({1.0, 4.0, 5.0}, {2.0, 2.0, 6.0}));
    ASSERT_TRUE(one.share_over_level && one.level_over_share);
    EXPECT_NEAR(*one.share_over_level, 1.0, 1e-15);
    EXPECT_NEAR(*one.level_over_share, 1.0, 1e-15);

    const auto r = equivalence_ratio(absolute, set1);
    EXPECT_NEAR(*r.share_over_level, set1_mean_share / 5.0, 1e-18);
    EXPECT_NEAR(*r.share_over_level, 1.782e-4, 0.0005e-4);
}

TEST(KeyDiff, examples) {
    EXPECT_EQ(keydiff(absolute, equal_totals), 0.0);
    EXPECT_NEAR(keydiff(absolute, set1), 4.1, 1e-12);
    // Hand oracle for squared losses: (1/2)[(1 - 0.81) + (81 - 0.81)].
    EXPECT_NEAR(keydiff(squared, set1), 40.19, 1e-9);
    const PairedSeries same({4.0, 6.0}, {4.0, 6.0});
    EXPECT_EQ(keydiff(webster, same), 0.0);
}

TEST(KeyDiff, zero_weight_policy) {
    const PairedSeries s({1.0, 2.0}, {0.0, 3.0});
    EXPECT_THROW((void)keydiff(ape, s), Error);
    auto skip = ape;
    skip.zero_weight_policy = ZeroWeightPolicy::SkipUnit;
    const double c = 3.0 / 3.0;
    EXPECT_NEAR(keydiff(skip, s), 1.0 * (1.0 - std::abs(2.0 - c * 3.0)), 1e-15);
}

TEST(PerUnitDiffs, examples) {
    const auto d = per_unit_diffs(absolute, set1);
    ASSERT_EQ(d.size(), 2u);
    EXPECT_NEAR(d[0], 1.0 - 505.0 * set1_mean_share, 1e-12);
    EXPECT_NEAR(d[1], 9.0 - 505.0 * set1_mean_share, 1e-12);
    EXPECT_NEAR(d[0], 0.55, 5e-5);
    EXPECT_NEAR(d[1], 8.55, 5e-5);

    for (double v : per_unit_diffs(squared, PairedSeries({4.0, 6.0}, {4.0, 6.0}))) EXPECT_EQ(v, 0.0);

    std::mt19937_64 rng(32);
    const auto s = testing::rescaled_equal_totals(rng, 50, 1.0, 1e3);
    for (double v : per_unit_diffs(ape, s)) EXPECT_LE(std::abs(v), 1e-12);

    auto skip = ape;
    skip.zero_weight_policy = ZeroWeightPolicy::SkipUnit;
    const auto with_gap = per_unit_diffs(skip, PairedSeries({1.0, 2.0}, {0.0, 3.0}));
    EXPECT_TRUE(std::isnan(with_gap[0]));
    EXPECT_FALSE(std::isnan(with_gap[1]));
}

TEST(FullReport, small_sample) {
    const auto r = full_report(absolute, set1);
    EXPECT_EQ(r.n, 2u);
    EXPECT_DOUBLE_EQ(r.c_n, 1.01);
    EXPECT_EQ(r.k, 505.0);
    EXPECT_EQ(r.mu_x_hat, 505.0);
    EXPECT_EQ(r.mu_y_hat, 500.0);
    EXPECT_NEAR(r.difference, 4.55, 5e-5);
    EXPECT_NEAR(r.keydiff, 4.1, 1e-12);
    EXPECT_NEAR(r.per_unit_diff_max, 8.55, 5e-5);
    EXPECT_GE(r.sparse_fraction, 0.0);
    EXPECT_LE(r.sparse_fraction, 1.0);
}

TEST(FullReport, identical_series) {
    const PairedSeries same({4.0, 6.0, 1.0}, {4.0, 6.0, 1.0});
    const auto r = full_report(webster, same);
    EXPECT_EQ(r.difference, 0.0);
    EXPECT_EQ(r.keydiff, 0.0);
    EXPECT_FALSE(r.ratio_share_over_level);
    EXPECT_FALSE(r.ratio_level_over_share);
    EXPECT_EQ(r.sparse_fraction, 0.0);
}

TEST(FullReport, single_unit) {
    const auto r = full_report(absolute, PairedSeries({7.0}, {3.0}));
    EXPECT_EQ(r.mean_share, 0.0);
    EXPECT_EQ(r.mean_level, 4.0);
    EXPECT_FALSE(r.ratio_level_over_share);
    ASSERT_TRUE(r.ratio_share_over_level);
    EXPECT_EQ(*r.ratio_share_over_level, 0.0);
}

// ---------------------------------------------------------------------------
// Properties
// ---------------------------------------------------------------------------

TEST(Properties, report_fields_are_consistent) {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 300; ++trial) {
        const auto s = testing::random_series(rng, testing::random_size(rng, 2, 300), 0.1, 1e5);
        for (const auto& spec : {absolute, squared, ape, webster, huntington_hill}) {
            const auto r = full_report(spec, s);
            ASSERT_LE(rel_diff(r.c_n, r.mu_x_hat / r.mu_y_hat), 1e-12);
            const double recomputed = level_loss(spec, s).value - k_constant(spec, s) * share_loss(spec, s).value;
            ASSERT_LE(std::abs(equivalence_difference(spec, s) - recomputed),
                      1e-12 * std::max(1.0, std::abs(recomputed)));
            ASSERT_EQ(r.difference, equivalence_difference(spec, s));
            ASSERT_TRUE(r.ratio_share_over_level && r.ratio_level_over_share);
            ASSERT_LE(std::abs(*r.ratio_share_over_level * *r.ratio_level_over_share - 1.0), 1e-12);
            ASSERT_GE(r.sparse_fraction, 0.0);
            ASSERT_LE(r.sparse_fraction, 1.0);
        }
    }
}

TEST(Properties, keydiff_vanishes_at_equal_totals) {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = testing::random_size(rng, 2, 200);
        const auto rescaled = testing::exact_equal_totals(rng, n, 0.0, 1e4);
        const auto integral = testing::integer_equal_totals(rng, n, 100000);
        for (const auto& s : {rescaled, integral}) {
            ASSERT_EQ(c_ratio(s), 1.0);
            for (const auto& spec : {absolute, squared, webster, huntington_hill}) {
                ASSERT_EQ(keydiff(spec, s), 0.0);
            }
        }
    }
}

TEST(Properties, keydiff_envelope_tracks_c_error_and_sparse_fraction) {
    // Fit the envelope constant on a pilot run, then check a fresh run
    // stays within it at every grid point.
    const std::vector<std::size_t> grid{100, 1000, 10000};
    const LossSpec spec = absolute;
    const EpsilonSchedule eps;
    auto envelope_terms = [&](const RatePoints& points) {
        std::vector<std::pair<double, double>> out;  // (median |keydiff|, median bound term)
        for (std::size_t n : grid) {
            std::vector<double> key, bound;
            for (const auto& p : points.points) {
                if (p.n != n) continue;
                key.push_back(std::abs(p.keydiff));
                // c_error is measured against the limit ratio 1 here.
                bound.push_back(p.c_error + p.sparse_fraction);
            }
            std::sort(key.begin(), key.end());
            std::sort(bound.begin(), bound.end());
            out.emplace_back(key[key.size() / 2], bound[bound.size() / 2]);
        }
        return out;
    };

    GeneratorSpec gen;
    ASSERT_EQ(gen.limit_ratio(), 1.0);
    gen.seed = 101;
    const auto pilot = envelope_terms(run_convergence(gen, spec, grid, 40, eps));
    double c = 0.0;
    for (const auto& [key, bound] : pilot) c = std::max(c, key / bound);

    gen.seed = 202;
    const auto fresh = envelope_terms(run_convergence(gen, spec, grid, 40, eps));
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        EXPECT_LE(fresh[i].first, 1.5 * c * fresh[i].second) << "n = " << grid[i];
        if (i > 0) {
            EXPECT_LT(fresh[i].second, fresh[i - 1].second);
        }
    }
}

}  // namespace
}  // namespace lossequiv
