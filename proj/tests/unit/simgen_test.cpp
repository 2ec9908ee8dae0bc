#include "econoscope/ingest.hpp"
#include "econoscope/simgen.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace econoscope {
namespace {

using testing::make_state;

SimConfig fair_config() {
    SimConfig config;
    config.equip_advantage_coeff = 0.0;
    for (auto& [map, bias] : config.map_side_bias) bias = 0.0;
    return config;
}

// Replays one game's round winners and checks the economy bookkeeping.
void check_game_economy(const SimConfig& config, const SimulatedGame& game) {
    const auto& eco = config.economy;
    const Dollars players = eco.players_per_team;
    const auto& ladder = eco.loss_bonus_ladder;
    int streak[2] = {0, 0};  // indexed by the side in the first half
    for (std::size_t r = 0; r < game.rounds.size(); ++r) {
        const RoundState& s = game.rounds[r].state;
        const RoundEconomy& e = game.economy[r];
        ASSERT_EQ(e.winner, game.rounds[r].round_winner);
        const bool second_half = s.round_number > config.half_length;
        // Team that started on CT plays CT in the first half.
        const int ct_team = second_half ? 1 : 0;
        if (s.round_number == config.half_length + 1) streak[0] = streak[1] = 0;

        const int winner_team = e.winner == Side::CT ? ct_team : 1 - ct_team;
        streak[winner_team] = 0;
        streak[1 - winner_team] += 1;
        const int ct_streak = streak[ct_team];
        const int t_streak = streak[1 - ct_team];
        EXPECT_EQ(e.ct_loss_streak, ct_streak);
        EXPECT_EQ(e.t_loss_streak, t_streak);

        auto expected_reward = [&](Side side, int team_streak) {
            if (e.winner == side) {
                return players * (e.detonation ? eco.bomb_detonation_reward : eco.win_reward);
            }
            const auto idx = std::min<std::size_t>(static_cast<std::size_t>(team_streak), ladder.size()) - 1;
            return players * ladder[idx];
        };
        EXPECT_EQ(e.ct_reward, expected_reward(Side::CT, ct_streak));
        EXPECT_EQ(e.t_reward, expected_reward(Side::T, t_streak));
        if (e.detonation) {
            EXPECT_EQ(e.winner, Side::T);
        }

        EXPECT_EQ(s.ct_buy, classify_buy(s.ct_equip_start, s.ct_spend));
        EXPECT_EQ(s.t_buy, classify_buy(s.t_equip_start, s.t_spend));
        EXPECT_LE(s.ct_spend, s.ct_money);
        EXPECT_LE(s.t_spend, s.t_money);
        EXPECT_EQ(s.ct_spend, representative_spend(s.ct_buy, s.ct_equip_start, s.ct_money));

        if (r + 1 < game.rounds.size()) {
            const RoundState& next = game.rounds[r + 1].state;
            if (s.round_number == config.half_length) {
                EXPECT_EQ(next.ct_money, config.start_money);
                EXPECT_EQ(next.t_money, config.start_money);
                EXPECT_EQ(next.ct_team, s.t_team);
            } else {
                const Dollars cap = eco.max_money * players;
                EXPECT_EQ(next.ct_money, std::min(cap, s.ct_money - s.ct_spend + e.ct_reward));
                EXPECT_EQ(next.t_money, std::min(cap, s.t_money - s.t_spend + e.t_reward));
                EXPECT_EQ(next.ct_team, s.ct_team);
            }
        }
    }
}

TEST(Simgen, EconomyBookkeepingHoldsOnEveryRound) {
    CorpusConfig config;
    config.n_games = 200;
    config.sim.rng_seed = 3;
    for (const auto& game : generate_games(config)) check_game_economy(config.sim, game);
}

TEST(Simgen, LossBonusResetsAfterAWin) {
    CorpusConfig config;
    config.n_games = 300;
    long resets_seen = 0;
    for (const auto& game : generate_games(config)) {
        for (std::size_t r = 2; r + 1 < game.economy.size(); ++r) {
            // CT lost at least three in a row, then won, then lost again (same half).
            const auto& prev = game.economy[r - 1];
            const auto& won = game.economy[r];
            const auto& lost = game.economy[r + 1];
            const int round = game.rounds[r].state.round_number;
            if (round == config.sim.half_length || round == config.sim.half_length + 1) continue;
            if (prev.ct_loss_streak >= 3 && won.winner == Side::CT && lost.winner == Side::T) {
                EXPECT_EQ(lost.ct_reward, 5 * config.sim.economy.loss_bonus_ladder[0]);
                ++resets_seen;
            }
        }
    }
    EXPECT_GT(resets_seen, 0);
}

TEST(Simgen, RoundCountsFollowRegulationRules) {
    CorpusConfig config;
    config.n_games = 10;
    const auto games = generate_games(config);
    std::size_t total = 0;
    for (const auto& game : games) {
        const auto n = game.rounds.size();
        total += n;
        EXPECT_GE(n, 16u);
        EXPECT_LE(n, 30u);
        const auto& last = game.rounds.back();
        const int ct_final = last.state.ct_score + (last.round_winner == Side::CT ? 1 : 0);
        const int t_final = last.state.t_score + (last.round_winner == Side::T ? 1 : 0);
        if (game.winner == kDrawMarker) {
            EXPECT_EQ(ct_final, 15);
            EXPECT_EQ(t_final, 15);
        } else {
            EXPECT_EQ(std::max(ct_final, t_final), 16);
        }
        for (std::size_t r = 0; r < n; ++r) EXPECT_EQ(game.rounds[r].state.round_number, static_cast<int>(r) + 1);
    }
    EXPECT_GE(total, 160u);
    EXPECT_LE(total, 300u);
}

TEST(Simgen, FixedSeedIsReproducibleAndSeedsDiffer) {
    CorpusConfig config;
    config.n_games = 25;
    config.sim.rng_seed = 42;
    std::ostringstream a, b, c;
    write_rounds(a, generate_corpus(config), RecordFormat::Jsonl);
    write_rounds(b, generate_corpus(config, 4), RecordFormat::Jsonl);
    config.sim.rng_seed = 43;
    write_rounds(c, generate_corpus(config), RecordFormat::Jsonl);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_NE(a.str(), c.str());
}

TEST(Simgen, CorpusReloadsWithoutWarnings) {
    CorpusConfig config;
    config.n_games = 20;
    testing::TempDir dir;
    for (auto format : {RecordFormat::Jsonl, RecordFormat::Csv}) {
        const auto path = dir / (format == RecordFormat::Csv ? "corpus.csv" : "corpus.jsonl");
        write_corpus(path, config, format);
        const auto loaded = load_rounds(path, format);
        EXPECT_TRUE(loaded.warnings.empty());
        const auto original = generate_corpus(config);
        ASSERT_EQ(loaded.records.size(), original.size());
        for (std::size_t i = 0; i < original.size(); ++i) EXPECT_EQ(loaded.records[i].state, original[i].state);
    }
}

TEST(Simgen, FairCoinDynamicsAreSymmetric) {
    CorpusConfig config;
    config.sim = fair_config();
    config.n_games = 20000;
    config.sim.rng_seed = 17;
    long ct_start_wins = 0, t_start_wins = 0;
    for (const auto& game : generate_games(config)) {
        const auto& first = game.rounds.front().state;
        if (game.winner == first.ct_team) ++ct_start_wins;
        if (game.winner == first.t_team) ++t_start_wins;
    }
    const double n = config.n_games;
    EXPECT_LE(std::abs(ct_start_wins / n - t_start_wins / n), 0.02);
}

TEST(Simgen, AlwaysMaxBeatsRandomFeasible) {
    SimConfig sim;
    long max_wins = 0, random_wins = 0;
    const int n_games = 5000;
    for (int g = 0; g < n_games; ++g) {
        GameSetup setup;
        const bool max_on_ct = g % 2 == 0;
        setup.starting_ct_policy = max_on_ct ? SpendingPolicy::always_max() : SpendingPolicy::random_feasible();
        setup.starting_t_policy = max_on_ct ? SpendingPolicy::random_feasible() : SpendingPolicy::always_max();
        setup.map_name = std::string(kDefaultMapPool[static_cast<std::size_t>(g) % kDefaultMapPool.size()]);
        Rng rng = Rng::derive(2024, static_cast<std::uint64_t>(g));
        const auto game = simulate_game(sim, setup, rng);
        const std::string& max_team = max_on_ct ? setup.starting_ct : setup.starting_t;
        if (game.winner == max_team) {
            ++max_wins;
        } else if (game.winner != kDrawMarker) {
            ++random_wins;
        }
    }
    // One-sided sign test on decisive games: z > 3.09 gives p < 0.001.
    const double decisive = static_cast<double>(max_wins + random_wins);
    const double z = (static_cast<double>(max_wins) - decisive / 2.0) / std::sqrt(decisive / 4.0);
    EXPECT_GT(z, 3.09);
}

TEST(Simgen, OracleAbsorbingStates) {
    const SimConfig config;
    RoundState won = make_state(16, 3, 0, 0, 800, 800, 0, 0);
    won.round_number = 20;
    EXPECT_EQ(oracle_win_prob(won, config, 50), (OutcomeDistribution{1.0, 0.0, 0.0}));
    RoundState lost = make_state(4, 16, 0, 0, 800, 800, 0, 0);
    EXPECT_EQ(oracle_win_prob(lost, config, 50), (OutcomeDistribution{0.0, 1.0, 0.0}));
    RoundState drawn = make_state(15, 15, 0, 0, 800, 800, 0, 0);
    EXPECT_EQ(oracle_win_prob(drawn, config, 50), (OutcomeDistribution{0.0, 0.0, 1.0}));
}

TEST(Simgen, OracleSymmetricStateIsBalanced) {
    SimConfig config = fair_config();
    const int n = 4000;
    const RoundState s = make_state(0, 0, 1000, 1000, 4000, 4000, 0, 0);
    const auto d = oracle_win_prob(s, config, n);
    EXPECT_TRUE(d.is_valid());
    const double stderr_diff = std::sqrt(0.25 / n) * std::sqrt(2.0);
    EXPECT_LE(std::abs(d.p_ct_win - d.p_t_win), 3.0 * stderr_diff);
}

TEST(Simgen, OracleNearlyDecidedState) {
    const SimConfig config;
    RoundState s = make_state(14, 0, 3000, 0, 20000, 4000, 0, 0);
    s.round_number = 15;
    s.ct_buy = BuyType::HeroLowBuy;
    const auto d = oracle_win_prob(s, config, 20000);
    EXPECT_GT(d.p_ct_win, 0.99);
}

TEST(Simgen, OracleIsDeterministicAndSharesStreamsAcrossBuys) {
    const SimConfig config;
    RoundState s = make_state(3, 5, 0, 0, 12000, 8000, 0, 0);
    const auto a = oracle_win_prob(s, config, 300);
    EXPECT_EQ(a, oracle_win_prob(s, config, 300));
    s.ct_buy = BuyType::HalfBuy;
    const auto b = oracle_win_prob(s, config, 300);
    EXPECT_TRUE(b.is_valid());
    EXPECT_NE(a, b);
}

TEST(Simgen, RolloutOutcomeIsRelativeToStateSides) {
    // Second-half state: the state's CT side is the team that started on T.
    const SimConfig config;
    RoundState s = make_state(15, 0, 0, 0, 800, 800, 0, 0);
    s.round_number = 16;
    Rng rng(1);
    long ct_wins = 0;
    for (int i = 0; i < 200; ++i) {
        if (rollout(s, config, 0, 0, {}, rng) == GameOutcome::CtWin) ++ct_wins;
    }
    EXPECT_GT(ct_wins, 190);
}

TEST(Simgen, PoliciesChooseFeasibleBuys) {
    CorpusConfig config;
    config.n_games = 60;
    config.teams = {{"max", SpendingPolicy::always_max()},
                    {"thr", SpendingPolicy::threshold_full_buy()},
                    {"rnd", SpendingPolicy::random_feasible()}};
    for (const auto& game : generate_games(config)) {
        for (const auto& rec : game.rounds) {
            for (Side side : kAllSides) {
                const auto& s = rec.state;
                const BuySet feasible = feasible_buys(s.equip_start(side), s.money(side));
                ASSERT_TRUE(feasible.contains(s.buy(side)));
                const std::string& team = s.team(side);
                if (team == "max") {
                    EXPECT_EQ(s.buy(side), most_expensive(feasible));
                }
                if (team == "thr") {
                    EXPECT_EQ(s.buy(side), feasible.contains(BuyType::FullBuy) ? BuyType::FullBuy : cheapest(feasible));
                }
            }
        }
    }
}

TEST(Simgen, ModelOptimalPolicyBestResponds) {
    // Stub model: win probability grows with the side's buy tier.
    auto model = std::make_shared<testing::FunctionPredictor>([](const RoundState& s) {
        const double ct = 0.1 + 0.1 * spend_rank(s.ct_buy);
        const double t = 0.1 + 0.1 * spend_rank(s.t_buy);
        return OutcomeDistribution{ct / (ct + t + 0.1), t / (ct + t + 0.1), 0.1 / (ct + t + 0.1)};
    });
    GameSetup setup;
    setup.starting_ct_policy = SpendingPolicy::model_optimal(model);
    setup.starting_t_policy = SpendingPolicy::random_feasible();
    Rng rng(4);
    const auto game = simulate_game(SimConfig{}, setup, rng);
    for (const auto& rec : game.rounds) {
        const auto& s = rec.state;
        const Side side = s.ct_team == setup.starting_ct ? Side::CT : Side::T;
        EXPECT_EQ(s.buy(side), most_expensive(feasible_buys(s.equip_start(side), s.money(side))));
    }
}

TEST(Simgen, PolicyNames) {
    for (auto name : {"always-max", "threshold-full-buy", "random-feasible"}) {
        const auto p = SpendingPolicy::parse(name);
        ASSERT_TRUE(p);
        EXPECT_EQ(p->name(), name);
    }
    EXPECT_FALSE(SpendingPolicy::parse("model-optimal"));
}

TEST(Simgen, ConfigValidation) {
    SimConfig config;
    EXPECT_NO_THROW(config.validate());
    config.rounds_to_win = 15;
    EXPECT_THROW(config.validate(), std::invalid_argument);
    config = {};
    config.equip_advantage_coeff = -1;
    EXPECT_THROW(config.validate(), std::invalid_argument);
    config = {};
    config.winner_carryover = 1.5;
    EXPECT_THROW(config.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace econoscope
