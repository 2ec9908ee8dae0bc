#include "econoscope/errors.hpp"
#include "econoscope/features.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numeric>

namespace econoscope {
namespace {

using testing::make_state;

double block_sum(const std::vector<double>& v, std::size_t begin, std::size_t n) {
    return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(begin),
                           v.begin() + static_cast<std::ptrdiff_t>(begin + n), 0.0);
}

TEST(Features, SymmetricStatePerMap) {
    const RoundState s = make_state(0, 0, 1000, 1000, 4000, 4000, 0, 0, "mirage");
    const FeatureVector f = featurize(s, EncodingMode::PerMap);
    ASSERT_EQ(f.values.size(), 19u);
    EXPECT_EQ(f.layout, FeatureLayout::Base);
    EXPECT_EQ(f.map_name, "mirage");
    EXPECT_EQ(f.values[feature::kScoreDiff], 0.0);
    EXPECT_EQ(f.values[feature::kCtEquip], 1000.0);
    EXPECT_EQ(f.values[feature::kTMoney], 4000.0);
    const std::vector<double> eco{1, 0, 0, 0, 0, 0};
    EXPECT_EQ(std::vector<double>(f.values.begin() + 7, f.values.begin() + 13), eco);
    EXPECT_EQ(std::vector<double>(f.values.begin() + 13, f.values.begin() + 19), eco);
}

TEST(Features, OheMapBlock) {
    const RoundState s = make_state(0, 0, 1000, 1000, 4000, 4000, 0, 0, std::string(kDefaultMapPool[2]));
    const FeatureVector f = featurize(s, EncodingMode::OheMap);
    ASSERT_EQ(f.values.size(), 26u);
    for (std::size_t k = 0; k < 7; ++k) EXPECT_EQ(f.values[feature::kMapBegin + k], k == 2 ? 1.0 : 0.0);
}

TEST(Features, OheMapRejectsUnknownMap) {
    const RoundState s = make_state(0, 0, 0, 0, 0, 0, 0, 0, "ancient");
    EXPECT_THROW(featurize(s, EncodingMode::OheMap), UnknownMapError);
    EXPECT_NO_THROW(featurize(s, EncodingMode::PerMap));
    EXPECT_NO_THROW(featurize(s, EncodingMode::NoMap));
}

TEST(Features, NamesMatchWidths) {
    EXPECT_EQ(feature_names(FeatureLayout::Base).size(), 19u);
    EXPECT_EQ(feature_names(FeatureLayout::WithMap).size(), 26u);
    EXPECT_EQ(feature_names(FeatureLayout::Base)[2], "score_diff");
}

TEST(Features, RandomStatesRoundTripThroughDecoding) {
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const RoundState s = testing::random_state(rng);
        for (auto mode : {EncodingMode::PerMap, EncodingMode::OheMap}) {
            const FeatureVector f = featurize(s, mode);
            EXPECT_EQ(block_sum(f.values, feature::kCtBuyBegin, 6), 1.0);
            EXPECT_EQ(block_sum(f.values, feature::kTBuyBegin, 6), 1.0);
            EXPECT_EQ(f.values[feature::kScoreDiff], s.ct_score - s.t_score);
            const DecodedFeatures d = decode_features(f);
            EXPECT_EQ(d.ct_score, s.ct_score);
            EXPECT_EQ(d.t_score, s.t_score);
            EXPECT_EQ(d.ct_equip_start, s.ct_equip_start);
            EXPECT_EQ(d.t_equip_start, s.t_equip_start);
            EXPECT_EQ(d.ct_money, s.ct_money);
            EXPECT_EQ(d.t_money, s.t_money);
            EXPECT_EQ(d.ct_buy, s.ct_buy);
            EXPECT_EQ(d.t_buy, s.t_buy);
            if (mode == EncodingMode::OheMap) {
                EXPECT_EQ(block_sum(f.values, feature::kMapBegin, 7), 1.0);
                EXPECT_EQ(d.map_name, s.map_name);
            } else {
                EXPECT_FALSE(d.map_name);
            }
        }
    }
}

TEST(Features, EncodingIsInjectiveOnEncodedFields) {
    const RoundState base = make_state(3, 4, 5000, 2000, 9000, 3000, 8000, 1000);
    const auto f0 = featurize(base, EncodingMode::OheMap).values;
    std::vector<RoundState> variants(8, base);
    variants[0].ct_score += 1;
    variants[1].t_score += 1;
    variants[2].ct_equip_start += 1;
    variants[3].t_equip_start += 1;
    variants[4].ct_money += 1;
    variants[5].t_money += 1;
    variants[6].ct_buy = BuyType::HeroLowBuy;
    variants[7].map_name = "nuke";
    for (const auto& v : variants) EXPECT_NE(featurize(v, EncodingMode::OheMap).values, f0);
    RoundState spend_only = base;
    spend_only.ct_spend += 1;
    EXPECT_EQ(featurize(spend_only, EncodingMode::OheMap).values, f0);
}

TEST(Features, DecodeRejectsMalformedVectors) {
    FeatureVector f = featurize(make_state(1, 2, 0, 0, 1000, 1000, 0, 0), EncodingMode::PerMap);
    FeatureVector wrong_width = f;
    wrong_width.values.pop_back();
    EXPECT_THROW(decode_features(wrong_width), SchemaMismatch);
    FeatureVector two_hot = f;
    two_hot.values[feature::kCtBuyBegin + 1] = 1.0;
    EXPECT_THROW(decode_features(two_hot), SchemaMismatch);
    FeatureVector bad_diff = f;
    bad_diff.values[feature::kScoreDiff] = 5.0;
    EXPECT_THROW(decode_features(bad_diff), SchemaMismatch);
}

TEST(Features, DatasetRowsMatchFeaturize) {
    Rng rng(5);
    std::vector<LabeledRound> rounds;
    for (int i = 0; i < 20; ++i) rounds.push_back({testing::random_state(rng), GameOutcome::TWin, Side::CT});
    const Dataset d = make_dataset(rounds, FeatureLayout::WithMap);
    ASSERT_EQ(d.size(), 20u);
    EXPECT_EQ(d.n_features, 26u);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto row = d.row(i);
        EXPECT_EQ(std::vector<double>(row.begin(), row.end()), featurize(rounds[i], EncodingMode::OheMap).values);
        EXPECT_EQ(d.y[i], index_of(GameOutcome::TWin));
    }
    const Dataset again = make_dataset(rounds, FeatureLayout::WithMap);
    EXPECT_EQ(d.fingerprint(), again.fingerprint());
    rounds[3].outcome = GameOutcome::Draw;
    EXPECT_NE(make_dataset(rounds, FeatureLayout::WithMap).fingerprint(), d.fingerprint());
}

}  // namespace
}  // namespace econoscope
