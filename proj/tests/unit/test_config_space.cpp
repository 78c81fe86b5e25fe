#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "pgov/config_space.hpp"

using namespace pgov;

namespace {

PassDescriptor shading(const std::string& name, int levels) { return {name, levels, true, true, true, false, {}}; }

}  // namespace

TEST(Enumeration, DefaultRosterHas729Configurations) {
    const auto roster = PassRoster::default_roster();
    EXPECT_EQ(roster.size(), 6u);
    EXPECT_EQ(enumerate_configurations(roster).size(), 729u);
    EXPECT_EQ(roster.config_count(), 729u);
}

TEST(Enumeration, SinglePassSingleLevel) {
    const PassRoster roster({shading("only", 1)});
    const auto all = enumerate_configurations(roster);
    ASSERT_EQ(all.size(), 1u);
    EXPECT_EQ(all[0].levels, std::vector<int>{0});
}

TEST(Enumeration, TwoByThreeIsLexicographic) {
    const PassRoster roster({shading("a", 2), shading("b", 3)});
    const auto all = enumerate_configurations(roster);
    const std::vector<std::vector<int>> expected{{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {1, 2}};
    ASSERT_EQ(all.size(), expected.size());
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i].levels, expected[i]);
}

TEST(Enumeration, MatchesOdometerOracleAndRoundTrips) {
    const PassRoster roster({shading("a", 3), shading("b", 1), shading("c", 4), shading("d", 2)});
    const auto all = enumerate_configurations(roster);
    const auto expected = oracle::all_levels({3, 1, 4, 2});
    ASSERT_EQ(all.size(), expected.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        EXPECT_EQ(all[i].levels, expected[i]);
        EXPECT_EQ(roster.index_of(all[i]), i);
        EXPECT_EQ(roster.config_at(i), all[i]);
    }
}

TEST(Enumeration, EveryWorstSingleDegradationAppearsOnce) {
    const auto roster = PassRoster::default_roster();
    const auto all = enumerate_configurations(roster);
    for (std::size_t i = 0; i < roster.size(); ++i) {
        const auto target = single_degradation_config(roster, i, roster.pass(i).level_count - 1);
        EXPECT_EQ(std::count(all.begin(), all.end(), target), 1);
    }
    EXPECT_EQ(all.front(), roster.best());
    EXPECT_EQ(all.back(), roster.worst());
}

TEST(SingleDegradation, Examples) {
    const auto roster = PassRoster::default_roster();
    EXPECT_EQ(single_degradation_config(roster, 3, 2).levels, (std::vector<int>{0, 0, 0, 2, 0, 0}));
    EXPECT_EQ(single_degradation_config(roster, 0, 1).levels, (std::vector<int>{1, 0, 0, 0, 0, 0}));
    EXPECT_THROW(single_degradation_config(roster, 1, 0), std::invalid_argument);
    EXPECT_THROW(single_degradation_config(roster, 6, 1), std::out_of_range);
    EXPECT_THROW(single_degradation_config(roster, 1, 3), std::out_of_range);
}

TEST(Roster, DefaultShape) {
    const auto roster = PassRoster::default_roster();
    ASSERT_TRUE(roster.resolution_index().has_value());
    EXPECT_EQ(*roster.resolution_index(), 0u);
    EXPECT_EQ(roster.power_pass_count(), 5u);
    EXPECT_EQ(roster.pass(0).name, "resolution");
    const auto& aa = roster.pass(5);
    EXPECT_FALSE(aa.uses_batches);
    EXPECT_FALSE(aa.uses_vertices);
    EXPECT_TRUE(aa.uses_fragments);
    for (const auto& p : roster.passes()) EXPECT_EQ(p.level_count, 3);
}

TEST(Roster, FragmentScaleFollowsResolutionLevel) {
    const auto roster = PassRoster::default_roster();
    EXPECT_DOUBLE_EQ(roster.fragment_scale(roster.best()), 1.0);
    EXPECT_DOUBLE_EQ(roster.fragment_scale(RenderingConfiguration{{2, 0, 0, 0, 0, 0}}), 0.36);
    const PassRoster plain({shading("a", 2)});
    EXPECT_DOUBLE_EQ(plain.fragment_scale(plain.worst()), 1.0);
}

TEST(Roster, RejectsInvalidDescriptors) {
    EXPECT_THROW(PassRoster({}), std::invalid_argument);
    EXPECT_THROW(PassRoster({shading("a", 0)}), std::invalid_argument);
    EXPECT_THROW(PassRoster({shading("a", 2), shading("a", 2)}), std::invalid_argument);
    const PassDescriptor res{"res", 2, false, false, false, true, {1.0, 0.5}};
    EXPECT_THROW(PassRoster({res, res}), std::invalid_argument);
    EXPECT_THROW(PassRoster({{"res", 2, true, false, false, true, {1.0, 0.5}}}), std::invalid_argument);
    EXPECT_THROW(PassRoster({{"res", 2, false, false, false, true, {1.0}}}), std::invalid_argument);
    EXPECT_THROW(PassRoster({{"res", 2, false, false, false, true, {1.0, 0.0}}}), std::invalid_argument);
    EXPECT_THROW(PassRoster({{"res", 2, false, false, false, true, {1.0, 1.5}}}), std::invalid_argument);
    EXPECT_NO_THROW(PassRoster({res, shading("b", 3)}));
}

TEST(Configuration, TextRoundTripAndValidation) {
    const auto roster = PassRoster::default_roster();
    const auto c = RenderingConfiguration::parse("0-2-1-1-2-2");
    EXPECT_EQ(c.levels, (std::vector<int>{0, 2, 1, 1, 2, 2}));
    EXPECT_EQ(c.to_string(), "0-2-1-1-2-2");
    EXPECT_TRUE(roster.is_valid(c));
    EXPECT_FALSE(roster.is_valid(RenderingConfiguration{{0, 3, 0, 0, 0, 0}}));
    EXPECT_FALSE(roster.is_valid(RenderingConfiguration{{0, 0}}));
    EXPECT_THROW(roster.validate(RenderingConfiguration{{0, -1, 0, 0, 0, 0}}), std::invalid_argument);
    EXPECT_THROW(RenderingConfiguration::parse(""), std::invalid_argument);
    EXPECT_THROW(RenderingConfiguration::parse("0-x-1"), std::invalid_argument);
    EXPECT_THROW(roster.index_of(RenderingConfiguration{{9, 0, 0, 0, 0, 0}}), std::invalid_argument);
    EXPECT_THROW(roster.config_at(729), std::out_of_range);
}
