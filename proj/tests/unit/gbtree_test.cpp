#include "econoscope/models/gbtree.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace econoscope {
namespace {

Dataset one_feature_dataset(std::size_t n, std::uint64_t seed) {
    Dataset d;
    d.n_features = 1;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const bool on = rng.bernoulli(0.5);
        const double row[] = {on ? 1.0 : 0.0};
        d.push_back(row, on ? GameOutcome::CtWin : GameOutcome::TWin);
    }
    return d;
}

TEST(Gbtree, MemorizesRandomRows) {
    const Dataset d = testing::random_dataset(200, 10, 21);
    GbtreeParams params;
    params.max_depth = 6;
    params.learning_rate = 0.3;
    params.max_rounds = 200;
    params.early_stopping_rounds = 0;
    const auto model = BoostedTrees::fit(d, nullptr, params);
    EXPECT_EQ(model.rounds(), 200);
    EXPECT_LT(dataset_log_loss(model, d), 0.05);
}

TEST(Gbtree, OneSplitProblem) {
    const Dataset train = one_feature_dataset(300, 1);
    const Dataset val = one_feature_dataset(100, 2);
    GbtreeParams params;
    params.max_depth = 1;
    params.colsample_per_level = 1.0;
    FitHistory history;
    const auto model = BoostedTrees::fit(train, &val, params, &history);
    EXPECT_LT(dataset_log_loss(model, val), 0.01);
    for (const auto& tree : model.trees()) {
        ASSERT_FALSE(tree.empty());
        if (tree[0].feature >= 0) {
            EXPECT_EQ(tree[0].feature, 0);
            EXPECT_GT(tree[0].threshold, 0.0);
            EXPECT_LE(tree[0].threshold, 1.0);
        }
    }
}

TEST(Gbtree, DeterministicReplay) {
    const Dataset train = testing::random_dataset(300, 8, 5);
    const Dataset val = testing::random_dataset(100, 8, 6);
    GbtreeParams params;
    params.colsample_per_level = 0.5;
    params.seed = 77;
    const auto a = BoostedTrees::fit(train, &val, params);
    const auto b = BoostedTrees::fit(train, &val, params);
    EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
    for (std::size_t i = 0; i < val.size(); ++i) EXPECT_EQ(a.predict(val.row(i)), b.predict(val.row(i)));
    params.seed = 78;
    const auto c = BoostedTrees::fit(train, &val, params);
    EXPECT_NE(a.to_json().dump(), c.to_json().dump());
}

TEST(Gbtree, TrainingLossIsNonIncreasing) {
    const Dataset train = testing::random_dataset(400, 6, 8);
    for (double lr : {0.05, 0.3}) {
        GbtreeParams params;
        params.learning_rate = lr;
        params.max_rounds = 60;
        params.early_stopping_rounds = 0;
        FitHistory history;
        BoostedTrees::fit(train, nullptr, params, &history);
        ASSERT_EQ(history.train_loss.size(), 60u);
        EXPECT_LE(history.train_loss[0], std::log(3.0));
        for (std::size_t r = 1; r < history.train_loss.size(); ++r) {
            EXPECT_LE(history.train_loss[r], history.train_loss[r - 1] + 1e-12) << "lr " << lr << " round " << r;
        }
    }
}

TEST(Gbtree, EarlyStoppingKeepsBestRound) {
    const Dataset train = testing::random_dataset(300, 6, 10);
    const Dataset val = testing::random_dataset(300, 6, 11);
    GbtreeParams params;
    FitHistory history;
    const auto model = BoostedTrees::fit(train, &val, params, &history);
    const auto best = std::min_element(history.val_loss.begin(), history.val_loss.end()) - history.val_loss.begin();
    EXPECT_EQ(history.best_iteration, best);
    EXPECT_EQ(model.rounds(), best + 1);
    EXPECT_EQ(history.val_loss.size(), static_cast<std::size_t>(best) + 1 + 10);
    EXPECT_NEAR(dataset_log_loss(model, val), history.val_loss[static_cast<std::size_t>(best)], 1e-12);
}

TEST(Gbtree, MinChildWeightLimitsSplits) {
    const Dataset d = testing::random_dataset(50, 4, 12);
    GbtreeParams params;
    params.min_child_weight = 1000.0;
    params.max_rounds = 5;
    params.early_stopping_rounds = 0;
    const auto model = BoostedTrees::fit(d, nullptr, params);
    for (const auto& tree : model.trees()) EXPECT_EQ(tree.size(), 1u);
}

TEST(Gbtree, PredictionsAreDistributions) {
    const Dataset d = testing::random_dataset(200, 5, 13);
    GbtreeParams params;
    params.max_rounds = 30;
    params.early_stopping_rounds = 0;
    const auto model = BoostedTrees::fit(d, nullptr, params);
    Rng rng(1);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> row(5);
        for (auto& v : row) v = rng.normal() * 10.0;
        const auto p = model.predict(row);
        EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
        for (double v : p) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(Gbtree, JsonRoundTripIsExact) {
    const Dataset d = testing::random_dataset(200, 5, 14);
    GbtreeParams params;
    params.max_rounds = 20;
    params.early_stopping_rounds = 0;
    const auto model = BoostedTrees::fit(d, nullptr, params);
    const auto copy = BoostedTrees::from_json(nlohmann::json::parse(model.to_json().dump()));
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(copy.predict(d.row(i)), model.predict(d.row(i)));

    auto broken = model.to_json();
    auto split = std::find_if(broken["trees"].begin(), broken["trees"].end(),
                              [](const auto& t) { return t["feature"][0].template get<int>() >= 0; });
    ASSERT_NE(split, broken["trees"].end());
    (*split)["left"][0] = 9999;
    EXPECT_THROW(BoostedTrees::from_json(broken), std::exception);
}

TEST(Gbtree, ParamsValidate) {
    GbtreeParams p;
    EXPECT_NO_THROW(p.validate());
    p.learning_rate = 0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.colsample_per_level = 1.5;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.max_depth = 0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace econoscope
