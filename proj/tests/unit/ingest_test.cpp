#include "econoscope/errors.hpp"
#include "econoscope/ingest.hpp"
#include "econoscope/simgen.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

namespace econoscope {
namespace {

using testing::data_path;

std::vector<LabeledRound> labeled(const std::vector<RoundRecord>& records) {
    return derive_labels(records, collect_game_results(records));
}

TEST(Ingest, ThreeRoundJsonlFile) {
    const auto result = load_rounds(data_path("three_rounds.jsonl"), RecordFormat::Jsonl);
    ASSERT_EQ(result.records.size(), 3u);
    EXPECT_TRUE(result.warnings.empty());
    const RoundState& r2 = result.records[1].state;
    EXPECT_EQ(r2.round_number, 2);
    EXPECT_EQ(r2.t_score, 1);
    EXPECT_EQ(r2.ct_buy, BuyType::Eco);
    EXPECT_EQ(r2.t_buy, BuyType::HalfBuy);
    EXPECT_EQ(result.records[2].state.ct_buy, BuyType::FullBuy);
    EXPECT_EQ(result.records[2].state.t_buy, BuyType::HeroLowBuy);
    EXPECT_EQ(result.records[0].round_winner, Side::T);
    EXPECT_EQ(result.records[0].game_winner, "ence");
}

TEST(Ingest, CsvMatchesJsonl) {
    const auto a = load_rounds(data_path("three_rounds.jsonl"), RecordFormat::Jsonl);
    const auto b = load_rounds(data_path("three_rounds.csv"), RecordFormat::Csv);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].state, b.records[i].state);
        EXPECT_EQ(a.records[i].round_winner, b.records[i].round_winner);
        EXPECT_EQ(a.records[i].game_winner, b.records[i].game_winner);
    }
}

TEST(Ingest, OverspendIsRejectedWithLineAndField) {
    try {
        load_rounds(data_path("overspend.jsonl"), RecordFormat::Jsonl);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.field(), "ct_spend");
    }
}

TEST(Ingest, DisagreeingBuyLabelIsOverwrittenWithWarning) {
    const auto result = load_rounds(data_path("mislabeled.jsonl"), RecordFormat::Jsonl);
    ASSERT_EQ(result.records.size(), 1u);
    EXPECT_EQ(result.records[0].state.ct_buy, BuyType::LowBuy);
    EXPECT_EQ(result.records[0].state.t_buy, BuyType::LowBuy);
    ASSERT_EQ(result.warnings.size(), 1u);
    EXPECT_EQ(result.warnings[0].line, 1u);
    EXPECT_NE(result.warnings[0].message.find("ct_buy"), std::string::npos);
}

TEST(Ingest, UnknownMapNeedsOverride) {
    EXPECT_THROW(load_rounds(data_path("unknown_map.jsonl"), RecordFormat::Jsonl), ValidationError);
    IngestOptions options;
    options.allow_new_maps = true;
    const auto result = load_rounds(data_path("unknown_map.jsonl"), RecordFormat::Jsonl, options);
    EXPECT_EQ(result.records.at(0).state.map_name, "ancient");
}

TEST(Ingest, MalformedRecordsNameTheField) {
    const std::string good = R"({"game_id":"m","map_name":"nuke","round_number":1,"match_date":"2020-06-02",)"
                             R"("ct_team":"a","t_team":"b","ct_score":0,"t_score":0,"ct_equip_start":0,)"
                             R"("t_equip_start":0,"ct_money":800,"t_money":800,"ct_spend":0,"t_spend":0,)"
                             R"("round_winner":"CT","game_winner":"a"})";
    auto field_of = [](const std::string& text) -> std::string {
        std::istringstream in(text);
        try {
            parse_rounds(in, RecordFormat::Jsonl, "mem");
        } catch (const ValidationError& e) {
            return e.field();
        }
        return "";
    };
    EXPECT_EQ(field_of(good), "");
    auto replace = [&](const std::string& from, const std::string& to) {
        std::string s = good;
        s.replace(s.find(from), from.size(), to);
        return s;
    };
    EXPECT_EQ(field_of(replace(R"("game_id":"m",)", "")), "game_id");
    EXPECT_EQ(field_of(replace(R"("ct_money":800)", R"("ct_money":-5)")), "ct_money");
    EXPECT_EQ(field_of(replace(R"("round_number":1)", R"("round_number":4)")), "round_number");
    EXPECT_EQ(field_of(replace(R"("match_date":"2020-06-02")", R"("match_date":"June")")), "match_date");
    EXPECT_EQ(field_of(replace(R"("round_winner":"CT")", R"("round_winner":"X")")), "round_winner");
    EXPECT_EQ(field_of(replace(R"("game_winner":"a")", R"("game_winner":"c")")), "game_winner");
    EXPECT_EQ(field_of("{not json"), "<record>");
}

TEST(Ingest, MissingFileIsADataError) {
    EXPECT_THROW(load_rounds(data_path("does_not_exist.jsonl"), RecordFormat::Jsonl), DataError);
}

TEST(Ingest, WriteAndReloadRoundTrips) {
    const auto original = load_rounds(data_path("three_rounds.jsonl"), RecordFormat::Jsonl);
    for (auto format : {RecordFormat::Jsonl, RecordFormat::Csv}) {
        std::stringstream buffer;
        write_rounds(buffer, original.records, format);
        const auto again = parse_rounds(buffer, format, "mem");
        ASSERT_EQ(again.records.size(), original.records.size());
        for (std::size_t i = 0; i < again.records.size(); ++i) {
            EXPECT_EQ(again.records[i].state, original.records[i].state);
        }
    }
}

TEST(Ingest, FormatFromExtension) {
    EXPECT_EQ(format_from_extension("a/b.csv"), RecordFormat::Csv);
    EXPECT_EQ(format_from_extension("a/b.jsonl"), RecordFormat::Jsonl);
    EXPECT_EQ(parse_record_format("csv"), RecordFormat::Csv);
    EXPECT_FALSE(parse_record_format("xml"));
}

RoundRecord record(const std::string& game, int round, const std::string& ct, const std::string& t,
                   const std::string& winner) {
    RoundRecord r;
    r.state = testing::make_state(0, 0, 0, 0, 800, 800, 0, 0);
    r.state.game_id = game;
    r.state.round_number = round;
    r.state.ct_team = ct;
    r.state.t_team = t;
    r.game_winner = winner;
    return r;
}

TEST(DeriveLabels, SideRelativeLabels) {
    const std::vector<RoundRecord> records{record("g", 3, "A", "B", "A"), record("g", 20, "B", "A", "A"),
                                           record("d", 1, "A", "B", std::string(kDrawMarker)),
                                           record("d", 17, "B", "A", std::string(kDrawMarker))};
    const auto rounds = labeled(records);
    EXPECT_EQ(rounds[0].outcome, GameOutcome::CtWin);
    EXPECT_EQ(rounds[1].outcome, GameOutcome::TWin);
    EXPECT_EQ(rounds[1].outcome, flip(rounds[0].outcome));
    EXPECT_EQ(rounds[2].outcome, GameOutcome::Draw);
    EXPECT_EQ(rounds[3].outcome, GameOutcome::Draw);
}

TEST(DeriveLabels, MissingResultsAreListed) {
    const std::vector<RoundRecord> records{record("g1", 1, "A", "B", "A"), record("g2", 1, "A", "B", "B")};
    GameResults results{{"g1", "A"}};
    try {
        derive_labels(records, results);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("g2"), std::string::npos);
    }
}

TEST(DeriveLabels, ConflictingWinnersAreRejected) {
    const std::vector<RoundRecord> records{record("g1", 1, "A", "B", "A"), record("g1", 2, "A", "B", "B")};
    EXPECT_THROW(collect_game_results(records), DataError);
}

TEST(DeriveLabels, SideFlipHoldsForEverySimulatedGame) {
    CorpusConfig config;
    config.n_games = 30;
    const auto records = generate_corpus(config);
    const auto rounds = labeled(records);
    std::map<std::string, GameOutcome> first_half;
    for (const auto& r : rounds) {
        if (r.state.round_number == 1) first_half[r.state.game_id] = r.outcome;
    }
    for (const auto& r : rounds) {
        const GameOutcome start = first_half.at(r.state.game_id);
        EXPECT_EQ(r.outcome, r.state.round_number <= config.sim.half_length ? start : flip(start));
    }
}

TEST(SplitByDate, DefaultBoundaries) {
    const auto b = SplitBoundaries::defaults();
    EXPECT_EQ(format_date(b.train_end), "2020-09-30");
    EXPECT_EQ(format_date(b.val_end), "2020-11-30");
    ASSERT_TRUE(b.test_end);
    EXPECT_EQ(format_date(*b.test_end), "2021-04-20");
}

TEST(SplitByDate, SingleDateCorpusLandsInTrain) {
    CorpusConfig config;
    config.n_games = 10;
    config.first_date = config.last_date = std::chrono::year{2020} / std::chrono::May / 1;
    const auto rounds = labeled(generate_corpus(config));
    const auto split = split_by_date(rounds, SplitBoundaries::defaults());
    EXPECT_EQ(split.train.size(), rounds.size());
    EXPECT_TRUE(split.validation.empty());
    EXPECT_TRUE(split.test.empty());
    EXPECT_EQ(split.warnings.size(), 2u);
}

TEST(SplitByDate, PartitionSizesMatchDateHistogram) {
    CorpusConfig config;
    config.n_games = 300;
    config.sim.rng_seed = 9;
    const auto rounds = labeled(generate_corpus(config));
    const auto b = SplitBoundaries::defaults();
    const auto split = split_by_date(rounds, b);

    std::size_t n_train = 0, n_val = 0, n_test = 0;
    for (const auto& r : rounds) {
        const std::string d = format_date(r.state.match_date);
        if (d <= "2020-09-30") {
            ++n_train;
        } else if (d <= "2020-11-30") {
            ++n_val;
        } else if (d <= "2021-04-20") {
            ++n_test;
        }
    }
    EXPECT_EQ(split.train.size(), n_train);
    EXPECT_EQ(split.validation.size(), n_val);
    EXPECT_EQ(split.test.size(), n_test);
    EXPECT_GT(n_val, 0u);

    std::set<std::string> train_ids, val_ids, test_ids;
    for (const auto& r : split.train) train_ids.insert(r.state.game_id);
    for (const auto& r : split.validation) val_ids.insert(r.state.game_id);
    for (const auto& r : split.test) test_ids.insert(r.state.game_id);
    for (const auto& id : val_ids) EXPECT_FALSE(train_ids.count(id) || test_ids.count(id));
    for (const auto& id : test_ids) EXPECT_FALSE(train_ids.count(id));
}

TEST(SplitByDate, GameStraddlingABoundaryStaysTogether) {
    std::vector<LabeledRound> rounds(3);
    for (int i = 0; i < 3; ++i) {
        rounds[static_cast<std::size_t>(i)].state = testing::make_state(i, 0, 0, 0, 800, 800, 0, 0);
        rounds[static_cast<std::size_t>(i)].state.game_id = "late";
    }
    rounds[0].state.match_date = parse_date("2020-10-01");
    rounds[1].state.match_date = parse_date("2020-09-30");
    rounds[2].state.match_date = parse_date("2020-10-01");
    std::swap(rounds[0], rounds[2]);
    const auto split = split_by_date(rounds, SplitBoundaries::defaults());
    ASSERT_EQ(split.train.size(), 3u);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(split.train[static_cast<std::size_t>(i)].state.round_number, i + 1);
}

TEST(SplitByDate, RejectsInvertedBoundaries) {
    SplitBoundaries b = SplitBoundaries::defaults();
    std::swap(b.train_end, b.val_end);
    EXPECT_THROW(split_by_date({}, b), std::invalid_argument);
}

}  // namespace
}  // namespace econoscope
