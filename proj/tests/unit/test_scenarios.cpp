#include <gtest/gtest.h>

#include "oracles.hpp"
#include "survhsic/scenarios.hpp"

using namespace survhsic;

TEST(ParseScenario, TagsAndParameters) {
    const auto s = parse_scenario("power-3 lambda=1/17");
    EXPECT_EQ(s.family, ScenarioFamily::power);
    EXPECT_EQ(s.index, 3);
    EXPECT_DOUBLE_EQ(s.lambda, 1.0 / 17.0);
    EXPECT_EQ(s.tag(), "power-3");
    EXPECT_EQ(s.label, "power-3 lambda=1/17");

    const auto p5 = parse_scenario("  power-5 a=19 b=1/9 ");
    EXPECT_DOUBLE_EQ(p5.a, 19.0);
    EXPECT_DOUBLE_EQ(p5.b, 1.0 / 9.0);
    EXPECT_EQ(p5.label, "power-5 a=19 b=1/9");

    EXPECT_TRUE(parse_scenario("twosample-2").two_sample());
    EXPECT_FALSE(parse_scenario("type1-6").two_sample());
}

TEST(ParseScenario, DefaultsAreSeventyFivePercentSettings) {
    EXPECT_DOUBLE_EQ(parse_scenario("power-1").lambda, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(parse_scenario("power-3").lambda, 1.0 / 45.0);
    EXPECT_DOUBLE_EQ(parse_scenario("power-6").a, 1.0 / 3.0);
}

TEST(ParseScenario, Errors) {
    for (const char* bad : {"", "power", "power-7", "type1-0", "twosample-5", "survival-1", "power-1 lambda=-1",
                            "power-1 lambda=0", "power-1 mu=2", "power-1 lambda", "power-1 lambda=x",
                            "power-5 b=0"})
        EXPECT_THROW(parse_scenario(bad), DataError) << bad;
}

TEST(ParseNumber, Fractions) {
    EXPECT_DOUBLE_EQ(*parse_number("1/45"), 1.0 / 45.0);
    EXPECT_DOUBLE_EQ(*parse_number("1.75"), 1.75);
    EXPECT_FALSE(parse_number("1/0"));
    EXPECT_FALSE(parse_number("abc"));
    EXPECT_FALSE(parse_number("1/"));
}

TEST(SampleScenario, SizesAndReproducibility) {
    for (const auto& t : observed_fraction_targets()) {
        const auto s = parse_scenario(t.scenario);
        Rng a = make_stream(3, 0), b = make_stream(3, 0);
        const auto d = sample_scenario(s, 41, a);
        EXPECT_EQ(d.size(), 41u);
        EXPECT_EQ(d, sample_scenario(s, 41, b)) << t.scenario;
        for (const auto& r : d) {
            EXPECT_TRUE(std::isfinite(r.z));
            EXPECT_GE(r.z, 0.0) << t.scenario;
        }
    }
}

TEST(SampleScenario, TwoSampleHalves) {
    const auto s = parse_scenario("twosample-1");
    Rng rng = make_stream(1, 0);
    const auto latent = sample_latent(s, 7, rng);
    for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(latent[i].x, i < 3 ? 0.0 : 1.0);
    Rng rng2 = make_stream(1, 0);
    const auto t = sample_two_sample(s, 7, rng2);
    EXPECT_EQ(t.n0(), 3u);
    EXPECT_EQ(t.n1(), 4u);
    Rng rng3 = make_stream(1, 0);
    EXPECT_THROW(sample_two_sample(parse_scenario("type1-1"), 7, rng3), DataError);
}

TEST(SampleScenario, TwosampleFourGroupOneIsUncensored) {
    Rng rng = make_stream(2, 0);
    const auto t = sample_two_sample(parse_scenario("twosample-4"), 400, rng);
    for (const auto& o : t.group1()) EXPECT_TRUE(o.event);
    EXPECT_LT(std::count_if(t.group0().begin(), t.group0().end(), [](auto o) { return o.event; }), 200);
}

TEST(Censor, InfiniteCensoringTimeIsObserved) {
    const auto r = censor({0.5, 2.0, std::numeric_limits<double>::infinity()});
    EXPECT_EQ(r.z, 2.0);
    EXPECT_TRUE(r.event);
    const auto c = censor({0.5, 2.0, 1.0});
    EXPECT_EQ(c.z, 1.0);
    EXPECT_FALSE(c.event);
}

TEST(ObservedFraction, AnalyticCases) {
    // exponential race: rate_T / (rate_T + rate_C); power-1 at lambda=1 is 1/2 by symmetry of X
    const std::size_t n = 40000;
    const std::pair<const char*, double> cases[] = {
        {"type1-1", 0.5},
        {"type1-2", 0.5},
        {"power-1 lambda=1", 0.5},
        {"twosample-1", 0.5 * (1.0 / 1.5) + 0.5 * (0.625 / 1.125)},
        {"twosample-4", 0.5 * (1.0 / 3.0) + 0.5},
    };
    for (auto [text, p] : cases) {
        Rng rng = make_stream(5, 0);
        const double f = empirical_observed_fraction(parse_scenario(text), n, rng);
        EXPECT_NEAR(f, p, oracle::three_sigma(p, n)) << text;
    }
}

TEST(ObservedFraction, TargetTable) {
    const auto t = observed_fraction_targets();
    EXPECT_EQ(t.size(), 28u);
    for (const auto& row : t) {
        EXPECT_NO_THROW(parse_scenario(row.scenario)) << row.scenario;
        EXPECT_GT(row.observed, 0.0);
        EXPECT_LT(row.observed, 1.0);
    }
}
