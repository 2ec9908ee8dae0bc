#include "econoscope/counterfactual.hpp"
#include "econoscope/http_server.hpp"
#include "econoscope/service.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <thread>

namespace econoscope {
namespace {

using nlohmann::json;

class ServiceTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        const auto split = testing::simulated_split(200, 13);
        TrainOptions o;
        o.family = ModelFamily::Gbtree;
        o.gbtree.max_rounds = 30;
        o.gbtree.max_depth = 3;
        o.mode = EncodingMode::OheMap;
        ohe_ = new std::shared_ptr<const TrainedModel>(
            std::make_shared<TrainedModel>(train_model(split.train, split.validation, o)));
        o.mode = EncodingMode::PerMap;
        o.family = ModelFamily::Logistic;
        o.logistic.subset = FeatureSubset::Full;
        std::vector<LabeledRound> inferno_only;
        for (const auto& r : split.train) {
            if (r.state.map_name == "inferno") inferno_only.push_back(r);
        }
        per_map_ = new std::shared_ptr<const TrainedModel>(
            std::make_shared<TrainedModel>(train_model(inferno_only, split.validation, o)));
    }
    static void TearDownTestSuite() {
        delete ohe_;
        delete per_map_;
    }

    static json state_body() {
        return {{"map_name", "inferno"}, {"ct_score", 3},         {"t_score", 5},
                {"ct_equip_start", 4000}, {"t_equip_start", 1200}, {"ct_money", 21000},
                {"t_money", 14000},       {"ct_spend", 17000},     {"t_spend", 9000}};
    }
    static json whatif_body() {
        return {{"map_name", "inferno"}, {"ct_score", 0},      {"t_score", 1},     {"ct_equip_start", 0},
                {"t_equip_start", 500},  {"ct_money", 12000}, {"t_money", 10000}, {"side", "T"}};
    }

    static std::shared_ptr<const TrainedModel>* ohe_;
    static std::shared_ptr<const TrainedModel>* per_map_;
};

std::shared_ptr<const TrainedModel>* ServiceTest::ohe_ = nullptr;
std::shared_ptr<const TrainedModel>* ServiceTest::per_map_ = nullptr;

TEST_F(ServiceTest, PredictMatchesLibraryCall) {
    const WhatIfService service(*ohe_);
    const auto res = service.predict(state_body().dump());
    ASSERT_EQ(res.status, 200) << res.body;
    const auto j = json::parse(res.body);
    const auto s = testing::make_state(3, 5, 4000, 1200, 21000, 14000, 17000, 9000);
    const auto p = (*ohe_)->predict(s);
    EXPECT_EQ(j.at("p_ct_win").get<double>(), p.p_ct_win);
    EXPECT_EQ(j.at("p_t_win").get<double>(), p.p_t_win);
    EXPECT_EQ(j.at("p_draw").get<double>(), p.p_draw);
    EXPECT_EQ(j.at("model_id"), (*ohe_)->model_id());
}

TEST_F(ServiceTest, PredictAcceptsBuyTypesInsteadOfSpend) {
    const WhatIfService service(*ohe_);
    auto body = state_body();
    body.erase("ct_spend");
    body.erase("t_spend");
    body["ct_buy"] = "FullBuy";
    body["t_buy"] = "HalfBuy";
    const auto res = service.predict(body.dump());
    ASSERT_EQ(res.status, 200) << res.body;
    auto s = testing::make_state(3, 5, 4000, 1200, 21000, 14000, 17000, 9000);
    ASSERT_EQ(s.ct_buy, BuyType::FullBuy);
    ASSERT_EQ(s.t_buy, BuyType::HalfBuy);
    EXPECT_EQ(json::parse(res.body).at("p_ct_win").get<double>(), (*ohe_)->predict(s).p_ct_win);
}

TEST_F(ServiceTest, BadRequestsAre400WithField) {
    const WhatIfService service(*ohe_);
    const auto expect_400 = [&](const json& body, const std::string& field) {
        const auto res = service.predict(body.dump());
        EXPECT_EQ(res.status, 400) << body.dump();
        EXPECT_EQ(json::parse(res.body).value("field", ""), field) << res.body;
    };
    auto missing = state_body();
    missing.erase("t_money");
    expect_400(missing, "t_money");
    auto over = state_body();
    over["ct_score"] = 16;
    expect_400(over, "ct_score");
    auto drawn = state_body();
    drawn["ct_score"] = 15;
    drawn["t_score"] = 15;
    expect_400(drawn, "ct_score");
    auto negative = state_body();
    negative["ct_money"] = -5;
    expect_400(negative, "ct_money");
    auto overspend = state_body();
    overspend["t_spend"] = 20000;
    expect_400(overspend, "t_spend");
    auto disagree = state_body();
    disagree["ct_buy"] = "Eco";
    expect_400(disagree, "ct_buy");
    auto bad_type = state_body();
    bad_type["map_name"] = 7;
    expect_400(bad_type, "map_name");

    EXPECT_EQ(service.predict("not json").status, 400);
    EXPECT_EQ(service.predict("[1,2]").status, 400);
}

TEST_F(ServiceTest, UnknownMapIs422) {
    auto body = state_body();
    body["map_name"] = "ancient";
    EXPECT_EQ(WhatIfService(*ohe_).predict(body.dump()).status, 422);
    body["map_name"] = "nuke";
    const auto res = WhatIfService(*per_map_).predict(body.dump());
    EXPECT_EQ(res.status, 422);
    EXPECT_EQ(json::parse(res.body).at("field"), "map_name");
    body["map_name"] = "inferno";
    EXPECT_EQ(WhatIfService(*per_map_).predict(body.dump()).status, 200);
}

TEST_F(ServiceTest, NoModelIs503) {
    const WhatIfService service;
    EXPECT_EQ(service.predict(state_body().dump()).status, 503);
    EXPECT_EQ(service.whatif(whatif_body().dump()).status, 503);
    EXPECT_EQ(service.meta().status, 503);
    EXPECT_EQ(service.health().status, 503);
    EXPECT_EQ(WhatIfService(*ohe_).health().status, 200);
}

TEST_F(ServiceTest, Routing) {
    const WhatIfService service(*ohe_);
    EXPECT_EQ(service.handle("GET", "/v1/health", "").status, 200);
    EXPECT_EQ(service.handle("GET", "/v1/meta", "").status, 200);
    EXPECT_EQ(service.handle("POST", "/v1/predict", state_body().dump()).status, 200);
    EXPECT_EQ(service.handle("POST", "/v1/whatif", whatif_body().dump()).status, 200);
    EXPECT_EQ(service.handle("GET", "/v1/predict", "").status, 405);
    EXPECT_EQ(service.handle("POST", "/v1/health", "").status, 405);
    EXPECT_EQ(service.handle("GET", "/v2/predict", "").status, 404);
    EXPECT_EQ(service.handle("GET", "/", "").status, 404);
}

TEST_F(ServiceTest, WhatIfWithLittleMoneyOffersOnlyEco) {
    auto body = whatif_body();
    body["t_money"] = 1000;
    body["t_equip_start"] = 0;
    const auto res = WhatIfService(*ohe_).whatif(body.dump());
    ASSERT_EQ(res.status, 200) << res.body;
    const auto j = json::parse(res.body);
    ASSERT_EQ(j.at("options").size(), 1u);
    EXPECT_EQ(j.at("options")[0].at("buy"), "Eco");
    EXPECT_EQ(j.at("optimal_buy"), "Eco");
    EXPECT_EQ(j.at("options")[0].at("delta_to_best").get<double>(), 0.0);
}

TEST_F(ServiceTest, WhatIfMatchesLibraryAndIsConsistent) {
    const WhatIfService service(*ohe_);
    Rng rng(3);
    for (int k = 0; k < 50; ++k) {
        const auto s = testing::random_state(rng);
        const Side side = k % 2 ? Side::T : Side::CT;
        json body{{"map_name", s.map_name},   {"ct_score", s.ct_score},
                  {"t_score", s.t_score},     {"ct_equip_start", s.ct_equip_start},
                  {"t_equip_start", s.t_equip_start}, {"ct_money", s.ct_money},
                  {"t_money", s.t_money},     {"side", to_string(side)},
                  {"opponent_buy", to_string(s.buy(opposite(side)))}, {"actual_buy", to_string(s.buy(side))}};
        if (s.ct_score == 15 && s.t_score == 15) continue;
        const auto res = service.whatif(body.dump());
        ASSERT_EQ(res.status, 200) << res.body;
        const auto j = json::parse(res.body);
        const auto ev = evaluate_buy_options(**ohe_, s, side);
        ASSERT_EQ(j.at("options").size(), ev.options.size());
        double best = 0.0;
        for (std::size_t i = 0; i < ev.options.size(); ++i) {
            const auto& o = j.at("options")[i];
            EXPECT_EQ(o.at("buy"), to_string(ev.options[i].buy));
            EXPECT_EQ(o.at("win_probability").get<double>(), ev.options[i].win_probability);
            best = std::max(best, o.at("win_probability").get<double>());
        }
        EXPECT_EQ(best, j.at("optimal_probability").get<double>());
        EXPECT_EQ(j.at("optimal_buy"), to_string(ev.optimal_buy));
        EXPECT_EQ(j.at("lost_probability").get<double>(), lost_probability(ev));
        EXPECT_EQ(service.whatif(body.dump()).body, res.body);
    }
}

TEST_F(ServiceTest, WhatIfDefaultsOpponentToMaxBuy) {
    const auto res = WhatIfService(*ohe_).whatif(whatif_body().dump());
    ASSERT_EQ(res.status, 200);
    EXPECT_EQ(json::parse(res.body).at("opponent_buy"), to_string(most_expensive(feasible_buys(0, 12000))));
}

TEST_F(ServiceTest, WhatIfValidation) {
    const WhatIfService service(*ohe_);
    auto no_side = whatif_body();
    no_side.erase("side");
    EXPECT_EQ(service.whatif(no_side.dump()).status, 400);
    auto bad_side = whatif_body();
    bad_side["side"] = "X";
    EXPECT_EQ(service.whatif(bad_side.dump()).status, 400);
    auto rich_opponent = whatif_body();
    rich_opponent["opponent_buy"] = "HeroHalfBuy";
    EXPECT_EQ(service.whatif(rich_opponent.dump()).status, 400);
    auto unaffordable = whatif_body();
    unaffordable["actual_buy"] = "FullBuy";
    EXPECT_EQ(service.whatif(unaffordable.dump()).status, 400);
}

TEST_F(ServiceTest, WhatIfLatencyP95) {
    const WhatIfService service(*ohe_);
    const std::string body = whatif_body().dump();
    std::vector<double> ms;
    for (int k = 0; k < 200; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto res = service.whatif(body);
        ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
        ASSERT_EQ(res.status, 200);
    }
    std::sort(ms.begin(), ms.end());
    EXPECT_LT(ms[static_cast<std::size_t>(0.95 * static_cast<double>(ms.size()))], 50.0);
}

TEST_F(ServiceTest, MetaListsPoolMapsForOheModel) {
    const auto j = json::parse(WhatIfService(*ohe_).meta().body);
    EXPECT_EQ(j.at("maps").get<std::vector<std::string>>(),
              std::vector<std::string>(kDefaultMapPool.begin(), kDefaultMapPool.end()));
    EXPECT_EQ(j.at("model_id"), (*ohe_)->model_id());
    EXPECT_EQ(j.at("families"), json::array({"gbtree"}));
    EXPECT_EQ(j.at("schema_version"), kModelFormatVersion);
    const auto per_map = json::parse(WhatIfService(*per_map_).meta().body);
    EXPECT_EQ(per_map.at("maps"), json::array({"inferno"}));
}

TEST(ServiceSymmetry, EvenStartOnSymmetricModel) {
    CorpusConfig config;
    config.n_games = 600;
    config.sim.rng_seed = 23;
    for (auto& [map, bias] : config.sim.map_side_bias) bias = 0.0;
    const auto split = split_by_date(testing::simulated_rounds(config), SplitBoundaries::defaults());
    TrainOptions o;
    o.family = ModelFamily::Gbtree;
    o.mode = EncodingMode::NoMap;
    o.gbtree.max_depth = 3;
    const auto model = std::make_shared<const TrainedModel>(train_model(split.train, split.validation, o));
    const json body{{"map_name", "mirage"}, {"ct_score", 0},       {"t_score", 0},
                    {"ct_equip_start", 1000}, {"t_equip_start", 1000}, {"ct_money", 4000},
                    {"t_money", 4000},      {"ct_spend", 3000},    {"t_spend", 3000}};
    const auto res = WhatIfService(model).predict(body.dump());
    ASSERT_EQ(res.status, 200) << res.body;
    const auto j = json::parse(res.body);
    EXPECT_LT(std::abs(j.at("p_ct_win").get<double>() - j.at("p_t_win").get<double>()), 0.05) << res.body;
}

TEST(ListenAddress, Parsing) {
    EXPECT_EQ(parse_listen_address("127.0.0.1:8080"), (std::pair<std::string, int>{"127.0.0.1", 8080}));
    EXPECT_EQ(parse_listen_address(":9000"), (std::pair<std::string, int>{"0.0.0.0", 9000}));
    EXPECT_THROW(parse_listen_address("localhost"), std::invalid_argument);
    EXPECT_THROW(parse_listen_address("h:70000"), std::invalid_argument);
    EXPECT_THROW(parse_listen_address("h:80x"), std::invalid_argument);
}

TEST_F(ServiceTest, HttpServerServesTheApi) {
    const WhatIfService service(*ohe_);
    HttpServer server(service);
    const int port = server.bind("127.0.0.1", 0);
    ASSERT_GT(port, 0);
    std::thread worker([&] { server.run(); });

    httplib::Client client("127.0.0.1", port);
    client.set_connection_timeout(5);
    httplib::Result health;
    for (int attempt = 0; attempt < 50 && !health; ++attempt) {
        health = client.Get("/v1/health");
        if (!health) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    const auto predicted = client.Post("/v1/predict", state_body().dump(), "application/json");
    ASSERT_TRUE(predicted);
    EXPECT_EQ(predicted->status, 200);
    EXPECT_EQ(predicted->body, service.predict(state_body().dump()).body);
    const auto missing = client.Get("/nope");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);

    server.stop();
    worker.join();
}

}  // namespace
}  // namespace econoscope
