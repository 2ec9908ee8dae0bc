#include "econoscope/economy.hpp"

#include <gtest/gtest.h>

#include <optional>
#include <vector>

namespace econoscope {
namespace {

// Rows of the buy-type table as literal rectangles, written independently of
// classify_buy. Full buy is any point with equipment + spend >= 20000.
struct OracleRow {
    BuyType buy;
    Dollars equip_lo, equip_hi, spend_lo, spend_hi;
};
constexpr OracleRow kOracleRows[] = {
    {BuyType::Eco, 0, 3000, 0, 2000},
    {BuyType::LowBuy, 0, 3000, 2000, 7500},
    {BuyType::HalfBuy, 0, 3000, 7500, 1'000'000'000},
    {BuyType::HeroLowBuy, 3000, 20000, 0, 7500},
    {BuyType::HeroHalfBuy, 3000, 20000, 7500, 1'000'000'000},
};

BuyType oracle_classify(Dollars equip, Dollars spend) {
    if (equip + spend >= 20000) return BuyType::FullBuy;
    std::optional<BuyType> hit;
    int hits = 0;
    for (const auto& row : kOracleRows) {
        if (equip >= row.equip_lo && equip < row.equip_hi && spend >= row.spend_lo && spend < row.spend_hi) {
            hit = row.buy;
            ++hits;
        }
    }
    EXPECT_EQ(hits, 1) << "oracle rows overlap at " << equip << "," << spend;
    return *hit;
}

BuySet brute_force_feasible(Dollars equip, Dollars money, Dollars step) {
    BuySet set;
    for (Dollars s = 0; s <= money; s += step) set.insert(classify_buy(equip, s));
    set.insert(classify_buy(equip, money));
    return set;
}

TEST(ClassifyBuy, TableExamples) {
    EXPECT_EQ(classify_buy(1000, 1500), BuyType::Eco);
    EXPECT_EQ(classify_buy(0, 0), BuyType::Eco);
    EXPECT_EQ(classify_buy(5000, 16000), BuyType::FullBuy);
    EXPECT_EQ(classify_buy(4000, 5000), BuyType::HeroLowBuy);
}

TEST(ClassifyBuy, BoundariesAreHalfOpen) {
    EXPECT_EQ(classify_buy(0, 1999), BuyType::Eco);
    EXPECT_EQ(classify_buy(0, 2000), BuyType::LowBuy);
    EXPECT_EQ(classify_buy(0, 7499), BuyType::LowBuy);
    EXPECT_EQ(classify_buy(0, 7500), BuyType::HalfBuy);
    EXPECT_EQ(classify_buy(2999, 0), BuyType::Eco);
    EXPECT_EQ(classify_buy(3000, 0), BuyType::HeroLowBuy);
    EXPECT_EQ(classify_buy(3000, 7500), BuyType::HeroHalfBuy);
    EXPECT_EQ(classify_buy(0, 19999), BuyType::HalfBuy);
    EXPECT_EQ(classify_buy(0, 20000), BuyType::FullBuy);
    EXPECT_EQ(classify_buy(19999, 0), BuyType::HeroLowBuy);
    EXPECT_EQ(classify_buy(20000, 0), BuyType::FullBuy);
}

TEST(ClassifyBuy, NegativeInputsAreRejected) {
    EXPECT_THROW(classify_buy(-1, 0), std::invalid_argument);
    EXPECT_THROW(classify_buy(0, -1), std::invalid_argument);
}

TEST(ClassifyBuy, AgreesWithRuleTableOnGrid) {
    long mismatches = 0;
    for (Dollars e = 0; e <= 30000; e += 250) {
        for (Dollars s = 0; s <= 30000; s += 250) {
            if (classify_buy(e, s) != oracle_classify(e, s)) ++mismatches;
        }
    }
    EXPECT_EQ(mismatches, 0);
}

TEST(ClassifyBuy, HeroTierSpendAbove17kIsFullBuy) {
    for (Dollars e = 3000; e < 20000; e += 250) {
        for (Dollars s = 17000; s <= 30000; s += 250) EXPECT_EQ(classify_buy(e, s), BuyType::FullBuy);
    }
}

TEST(LossBonus, LadderValues) {
    const EconomyConfig config;
    EXPECT_EQ(loss_bonus(1), 1400);
    EXPECT_EQ(loss_bonus(99), 3400);
    EXPECT_EQ(loss_bonus(3), config.loss_bonus_ladder[2]);
    EXPECT_EQ(loss_bonus(3), 2400);
    for (int n = 1; n <= 10; ++n) {
        const auto idx = std::min<std::size_t>(static_cast<std::size_t>(n), config.loss_bonus_ladder.size()) - 1;
        EXPECT_EQ(loss_bonus(n), config.loss_bonus_ladder[idx]);
    }
    EXPECT_THROW(loss_bonus(0), std::invalid_argument);
}

TEST(RoundReward, Defaults) {
    EXPECT_EQ(round_reward(Side::CT, false), 3250);
    EXPECT_EQ(round_reward(Side::T, true), 3500);
    EXPECT_EQ(round_reward(Side::T, false), 3250);
    EXPECT_THROW(round_reward(Side::CT, true), std::invalid_argument);
}

TEST(EconomyConfig, ValidateRejectsBadLadders) {
    EconomyConfig config;
    EXPECT_NO_THROW(config.validate());
    config.loss_bonus_ladder = {1400, 1300};
    EXPECT_THROW(config.validate(), std::invalid_argument);
    config.loss_bonus_ladder = {};
    EXPECT_THROW(config.validate(), std::invalid_argument);
    config = {};
    config.win_reward = -1;
    EXPECT_THROW(config.validate(), std::invalid_argument);
    config = {};
    config.full_buy_threshold = 0;
    EXPECT_THROW(config.validate(), std::invalid_argument);
}

TEST(FeasibleBuys, Examples) {
    BuySet eco_only;
    eco_only.insert(BuyType::Eco);
    EXPECT_EQ(feasible_buys(0, 1000), eco_only);
    EXPECT_EQ(feasible_buys(0, 1000), brute_force_feasible(0, 1000, 1));

    BuySet rich;
    for (BuyType b : {BuyType::Eco, BuyType::LowBuy, BuyType::HalfBuy, BuyType::FullBuy}) rich.insert(b);
    EXPECT_EQ(feasible_buys(0, 30000), rich);
    EXPECT_EQ(feasible_buys(0, 30000), brute_force_feasible(0, 30000, 50));

    BuySet full_only;
    full_only.insert(BuyType::FullBuy);
    EXPECT_EQ(feasible_buys(25000, 0), full_only);
}

TEST(FeasibleBuys, MatchesBruteForceAndIsMonotoneInMoney) {
    for (Dollars e = 0; e <= 24000; e += 500) {
        BuySet previous;
        for (Dollars m = 0; m <= 24000; m += 250) {
            const BuySet set = feasible_buys(e, m);
            EXPECT_EQ(set, brute_force_feasible(e, m, 250)) << e << " " << m;
            EXPECT_TRUE(previous.is_subset_of(set)) << e << " " << m;
            EXPECT_FALSE(set.empty());
            previous = set;
        }
    }
}

TEST(RepresentativeSpend, Examples) {
    EXPECT_EQ(representative_spend(BuyType::Eco, 0, 10000), 1000);
    EXPECT_EQ(representative_spend(BuyType::HalfBuy, 0, 9000), 8250);
    EXPECT_EQ(representative_spend(BuyType::FullBuy, 20000, 5000), 2000);
    EXPECT_THROW(representative_spend(BuyType::FullBuy, 0, 1000), std::invalid_argument);
    EXPECT_THROW(representative_spend(BuyType::HeroLowBuy, 0, 1000), std::invalid_argument);
}

TEST(RepresentativeSpend, ClassifiesBackToTheBuy) {
    for (Dollars e = 0; e <= 26000; e += 500) {
        for (Dollars m = 0; m <= 30000; m += 500) {
            for (BuyType b : feasible_buys(e, m).to_vector()) {
                const Dollars s = representative_spend(b, e, m);
                EXPECT_GE(s, 0);
                EXPECT_LE(s, m);
                EXPECT_EQ(classify_buy(e, s), b) << e << " " << m << " " << to_string(b);
            }
        }
    }
}

TEST(SpendInterval, IntervalsMatchClassification) {
    for (Dollars e : {0, 2999, 3000, 10000, 19999, 20000}) {
        for (BuyType b : kAllBuyTypes) {
            const auto iv = spend_interval(b, e);
            for (Dollars s = 0; s <= 30000; s += 100) {
                const bool inside = iv && s >= iv->lo && (!iv->hi || s < *iv->hi);
                EXPECT_EQ(inside, classify_buy(e, s) == b) << e << " " << s << " " << to_string(b);
            }
        }
    }
}

TEST(BuySet, OrderingHelpers) {
    BuySet set;
    EXPECT_TRUE(set.empty());
    set.insert(BuyType::HalfBuy);
    set.insert(BuyType::Eco);
    set.insert(BuyType::FullBuy);
    EXPECT_EQ(set.size(), 3u);
    EXPECT_EQ(set.to_vector(), (std::vector<BuyType>{BuyType::Eco, BuyType::HalfBuy, BuyType::FullBuy}));
    EXPECT_EQ(cheapest(set), BuyType::Eco);
    EXPECT_EQ(most_expensive(set), BuyType::FullBuy);
}

}  // namespace
}  // namespace econoscope
