#include <gtest/gtest.h>

#include <numeric>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "survhsic/kaplan_meier.hpp"

using namespace survhsic;

namespace {

CensoredDataset ordered(std::vector<int> delta) {
    std::vector<CensoredRow> rows;
    for (std::size_t i = 0; i < delta.size(); ++i)
        rows.push_back({0.0, static_cast<double>(i + 1), delta[i] == 1});
    return CensoredDataset(rows);
}

}  // namespace

TEST(KmSurvival, AllObserved) {
    const auto s = km_survival(ordered({1, 1, 1}));
    EXPECT_DOUBLE_EQ(s(1), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(s(2), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(s(3), 0.0);
    EXPECT_DOUBLE_EQ(s(0.5), 1.0);
    EXPECT_DOUBLE_EQ(s(2.5), 1.0 / 3.0);
}

TEST(KmSurvival, CensoringTargetFlipsIndicators) {
    const auto c = km_survival(ordered({1, 0, 1}), KmTarget::censoring);
    EXPECT_DOUBLE_EQ(c(1), 1.0);
    EXPECT_DOUBLE_EQ(c(2), 0.5);
    EXPECT_DOUBLE_EQ(c(3), 0.5);
    EXPECT_DOUBLE_EQ(c.left_limit(2), 1.0);
}

TEST(KmSurvival, NoEventsMeansNoDrops) {
    const auto s = km_survival(ordered({0, 0, 0, 0}));
    for (const auto& step : s.steps()) EXPECT_EQ(step.survival, 1.0);
}

TEST(KmWeights, UncensoredIsUniform) {
    const auto w = km_weights(ordered({1, 1, 1}));
    for (double v : w) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(KmWeights, HandComputedCase) {
    const auto w = km_weights(ordered({1, 0, 1}));
    EXPECT_DOUBLE_EQ(w[0], 1.0 / 3.0);
    EXPECT_EQ(w[1], 0.0);
    EXPECT_DOUBLE_EQ(w[2], 2.0 / 3.0);
}

TEST(KmWeights, LeadingCensoredRowPassesAllMassOn) {
    // w_2 = ((2-1)/(2-1+1))^0 * (1/(2-2+1))^1 = 1
    const auto w = km_weights(ordered({0, 1}));
    EXPECT_EQ(w[0], 0.0);
    EXPECT_DOUBLE_EQ(w[1], 1.0);
    const auto lit = oracle::km_weights_literal({0, 1});
    EXPECT_DOUBLE_EQ(lit[1], 1.0);
}

TEST(KmWeights, MatchLiteralProductOnRandomData) {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        const auto d = fixtures::random_dataset(rng, 1 + 2 + rep % 30, rep % 2 == 0);
        const auto w = km_weights(d);
        const auto lit = oracle::km_weights_literal(fixtures::flags(d));
        for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(w[i], lit[i], 1e-14);
        const auto s = km_survival(d);
        const auto slit = oracle::km_survival_literal(fixtures::flags(d));
        for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(s.steps()[i].survival, slit[i], 1e-14);
    }
}

TEST(KmWeights, InverseCensoringProbabilityIdentity) {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 500; ++rep) {
        const auto d = fixtures::random_dataset(rng, 2 + rep % 49);
        const auto w = km_weights(d);
        const auto g = km_survival(d, KmTarget::censoring);
        const double n = static_cast<double>(d.size());
        for (std::size_t k = 0; k < d.size(); ++k) {
            if (!d[k].event) continue;
            const double expected = (1.0 / n) / g.left_limit(d[k].z);
            EXPECT_LE(std::abs(w[k] - expected), 1e-12 * expected);
        }
    }
}

TEST(KmWeights, NonnegativeAndSumRule) {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 200; ++rep) {
        const auto d = fixtures::random_dataset(rng, 2 + rep % 40, rep % 3 == 0);
        const auto w = km_weights(d);
        const auto s = km_survival(d);
        double prev = 1.0;
        for (const auto& step : s.steps()) {
            EXPECT_LE(step.survival, prev);
            EXPECT_GE(step.survival, 0.0);
            prev = step.survival;
        }
        for (std::size_t i = 0; i < w.size(); ++i) {
            EXPECT_GE(w[i], 0.0);
            if (!d[i].event) {
                EXPECT_EQ(w[i], 0.0);
            }
        }
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        EXPECT_NEAR(total, 1.0 - s.steps().back().survival, 1e-12);
        if (d[d.size() - 1].event) {
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
        EXPECT_LE(total, 1.0 + 1e-12);
    }
}

TEST(KmWeightsWithinGroups, AppliesPerGroup) {
    const TwoSampleDataset t({{1, true}, {2, true}}, {{1, true}, {2, false}, {3, true}});
    const auto [w0, w1] = km_weights_within_groups(t);
    EXPECT_DOUBLE_EQ(w0[0], 0.5);
    EXPECT_DOUBLE_EQ(w0[1], 0.5);
    EXPECT_DOUBLE_EQ(w1[0], 1.0 / 3.0);
    EXPECT_EQ(w1[1], 0.0);
    EXPECT_DOUBLE_EQ(w1[2], 2.0 / 3.0);
}

TEST(KmWeightsWithinGroups, SymmetricGroupsGiveIdenticalWeights) {
    const std::vector<SurvivalObservation> g{{0.5, true}, {1.5, false}, {2.0, true}, {4.0, false}};
    const auto [w0, w1] = km_weights_within_groups(TwoSampleDataset(g, g));
    EXPECT_EQ(w0, w1);
}

TEST(KmLaw, MassPlusTailIsOne) {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 100; ++rep) {
        const auto d = fixtures::random_dataset(rng, 3 + rep % 20, rep % 2 == 0);
        std::vector<SurvivalObservation> obs;
        for (const auto& r : d) obs.push_back({r.z, r.event});
        for (auto target : {KmTarget::lifetime, KmTarget::censoring}) {
            const auto law = km_law(obs, target);
            double total = law.tail;
            for (std::size_t i = 0; i < law.atoms.size(); ++i) {
                total += law.mass[i];
                if (i > 0) {
                    EXPECT_LT(law.atoms[i - 1], law.atoms[i]);
                }
            }
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
    }
}

TEST(KmLaw, CensoringLawTreatsTiedEventsAsSurvivingCensoring) {
    // at z = 1 one event and one censoring: for the censoring law the censored
    // row is the "event" and must come first
    const std::vector<SurvivalObservation> obs{{1, true}, {1, false}, {2, true}};
    const auto law = km_law(obs, KmTarget::censoring);
    ASSERT_EQ(law.atoms.size(), 1u);
    EXPECT_DOUBLE_EQ(law.atoms[0], 1.0);
    EXPECT_DOUBLE_EQ(law.mass[0], 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(law.tail, 2.0 / 3.0);
}
