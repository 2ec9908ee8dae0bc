#include "econoscope/simgen.hpp"

#include "econoscope/counterfactual.hpp"
#include "econoscope/errors.hpp"
#include "econoscope/hash.hpp"
#include "econoscope/parallel.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace econoscope {

SpendingPolicy SpendingPolicy::always_max() { return SpendingPolicy(PolicyKind::AlwaysMax); }
SpendingPolicy SpendingPolicy::threshold_full_buy() { return SpendingPolicy(PolicyKind::ThresholdFullBuy); }
SpendingPolicy SpendingPolicy::random_feasible() { return SpendingPolicy(PolicyKind::RandomFeasible); }

SpendingPolicy SpendingPolicy::model_optimal(std::shared_ptr<const Predictor> model) {
    if (!model) throw std::invalid_argument("model_optimal policy needs a model");
    return SpendingPolicy(PolicyKind::ModelOptimal, std::move(model));
}

std::optional<SpendingPolicy> SpendingPolicy::parse(std::string_view name) {
    if (name == "always-max") return always_max();
    if (name == "threshold-full-buy") return threshold_full_buy();
    if (name == "random-feasible") return random_feasible();
    return std::nullopt;
}

std::string_view SpendingPolicy::name() const noexcept {
    switch (kind_) {
    case PolicyKind::AlwaysMax: return "always-max";
    case PolicyKind::ThresholdFullBuy: return "threshold-full-buy";
    case PolicyKind::RandomFeasible: return "random-feasible";
    case PolicyKind::ModelOptimal: return "model-optimal";
    }
    return "?";
}

std::map<std::string, double> SimConfig::default_side_bias() {
    return {{"dust2", 0.05},   {"inferno", 0.15}, {"mirage", 0.0},  {"nuke", 0.35},
            {"overpass", 0.1}, {"train", 0.25},   {"vertigo", -0.1}};
}

void SimConfig::validate() const {
    economy.validate();
    if (!(equip_advantage_coeff >= 0.0)) throw std::invalid_argument("equip_advantage_coeff must be >= 0");
    if (half_length < 1) throw std::invalid_argument("half_length must be >= 1");
    if (rounds_to_win <= half_length) throw std::invalid_argument("rounds_to_win must exceed half_length");
    for (double f : {winner_carryover, loser_carryover, detonation_share}) {
        if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("carryover and detonation shares must lie in [0,1]");
    }
    if (start_money < 0 || start_equip < 0) throw std::invalid_argument("start money/equipment must be >= 0");
}

double SimConfig::side_bias(std::string_view map) const noexcept {
    const auto it = map_side_bias.find(std::string(map));
    return it == map_side_bias.end() ? 0.0 : it->second;
}

namespace {

struct TeamState {
    int score = 0;
    Dollars money = 0;
    Dollars equip = 0;
    int loss_streak = 0;
    const SpendingPolicy* policy = nullptr;
};

struct GameMeta {
    const std::string* game_id = nullptr;
    const std::string* map_name = nullptr;
    const std::string* team_names[2] = {nullptr, nullptr};
    Date date{};
};

// Plays rounds of one game. teams[0] starts on CT.
class GameEngine {
public:
    GameEngine(const SimConfig& config, const GameMeta& meta, Rng& rng)
        : config_(config), meta_(meta), rng_(rng), thresholds_(config.economy.thresholds()),
          side_bias_(config.side_bias(*meta.map_name)) {}

    TeamState teams[2];
    int round_number = 1;

    int ct_index() const noexcept { return round_number <= config_.half_length ? 0 : 1; }

    std::optional<GameOutcome> outcome_for_current_ct() const noexcept {
        const int ct = ct_index();
        if (teams[ct].score >= config_.rounds_to_win) return GameOutcome::CtWin;
        if (teams[1 - ct].score >= config_.rounds_to_win) return GameOutcome::TWin;
        if (round_number > config_.max_rounds()) return GameOutcome::Draw;
        return std::nullopt;
    }

    RoundState snapshot() const {
        const int ct = ct_index();
        const TeamState& c = teams[ct];
        const TeamState& t = teams[1 - ct];
        RoundState s;
        s.game_id = *meta_.game_id;
        s.map_name = *meta_.map_name;
        s.round_number = round_number;
        s.ct_score = c.score;
        s.t_score = t.score;
        s.ct_equip_start = c.equip;
        s.t_equip_start = t.equip;
        s.ct_money = c.money;
        s.t_money = t.money;
        s.ct_team = *meta_.team_names[ct];
        s.t_team = *meta_.team_names[1 - ct];
        s.match_date = meta_.date;
        return s;
    }

    // Buys for both sides under the teams' policies; returned in side order.
    std::array<BuyType, 2> choose_buys() {
        const int ct = ct_index();
        const TeamState* side_team[2] = {&teams[ct], &teams[1 - ct]};
        std::array<BuyType, 2> buys{};
        std::array<BuySet, 2> feasible{};
        bool any_model = false;
        for (int s = 0; s < 2; ++s) {
            const TeamState& team = *side_team[s];
            feasible[s] = feasible_buys(team.equip, team.money, thresholds_);
            switch (team.policy->kind()) {
            case PolicyKind::AlwaysMax: buys[s] = most_expensive(feasible[s]); break;
            case PolicyKind::ThresholdFullBuy:
                buys[s] = feasible[s].contains(BuyType::FullBuy) ? BuyType::FullBuy : cheapest(feasible[s]);
                break;
            case PolicyKind::RandomFeasible: {
                const auto options = feasible[s].to_vector();
                buys[s] = options[rng_.below(options.size())];
                break;
            }
            case PolicyKind::ModelOptimal:
                buys[s] = most_expensive(feasible[s]);
                any_model = true;
                break;
            }
        }
        if (!any_model) return buys;

        // Model-driven sides best-respond to the other side's buy until stable.
        RoundState state = snapshot();
        const bool both = side_team[0]->policy->kind() == PolicyKind::ModelOptimal &&
                          side_team[1]->policy->kind() == PolicyKind::ModelOptimal;
        const int max_passes = both ? 8 : 1;
        for (int pass = 0; pass < max_passes; ++pass) {
            bool changed = false;
            for (int s = 0; s < 2; ++s) {
                if (side_team[s]->policy->kind() != PolicyKind::ModelOptimal) continue;
                state.ct_buy = buys[0];
                state.t_buy = buys[1];
                const auto ev = evaluate_buy_options(*side_team[s]->policy->model(), state, kAllSides[s], thresholds_);
                if (ev.optimal_buy != buys[s]) {
                    buys[s] = ev.optimal_buy;
                    changed = true;
                }
            }
            if (!changed) break;
        }
        return buys;
    }

    // Plays the current round with the given spends and advances the game.
    RoundEconomy play(Dollars ct_spend, Dollars t_spend) {
        const int ct = ct_index();
        TeamState& c = teams[ct];
        TeamState& t = teams[1 - ct];
        const Dollars ct_after = c.equip + ct_spend;
        const Dollars t_after = t.equip + t_spend;
        const double logit =
            config_.equip_advantage_coeff * static_cast<double>(ct_after - t_after) + side_bias_;
        const double p_ct = 1.0 / (1.0 + std::exp(-logit));

        RoundEconomy econ;
        econ.winner = rng_.uniform() < p_ct ? Side::CT : Side::T;
        if (econ.winner == Side::T && config_.detonation_share > 0.0) {
            econ.detonation = rng_.uniform() < config_.detonation_share;
        }

        const auto& eco = config_.economy;
        const Dollars players = eco.players_per_team;
        const Dollars cap = eco.team_money_cap();
        TeamState& winner = econ.winner == Side::CT ? c : t;
        TeamState& loser = econ.winner == Side::CT ? t : c;
        const Dollars winner_spend = econ.winner == Side::CT ? ct_spend : t_spend;
        const Dollars loser_spend = econ.winner == Side::CT ? t_spend : ct_spend;
        const Dollars winner_after = econ.winner == Side::CT ? ct_after : t_after;
        const Dollars loser_after = econ.winner == Side::CT ? t_after : ct_after;

        winner.loss_streak = 0;
        loser.loss_streak += 1;
        const Dollars win_pay = players * round_reward(econ.winner, econ.detonation, eco);
        const Dollars loss_pay = players * loss_bonus(loser.loss_streak, eco);
        winner.money = std::min(cap, winner.money - winner_spend + win_pay);
        loser.money = std::min(cap, loser.money - loser_spend + loss_pay);
        winner.equip = static_cast<Dollars>(std::floor(config_.winner_carryover * static_cast<double>(winner_after)));
        loser.equip = static_cast<Dollars>(std::floor(config_.loser_carryover * static_cast<double>(loser_after)));
        winner.score += 1;

        econ.ct_reward = econ.winner == Side::CT ? win_pay : loss_pay;
        econ.t_reward = econ.winner == Side::CT ? loss_pay : win_pay;
        econ.ct_loss_streak = c.loss_streak;
        econ.t_loss_streak = t.loss_streak;

        if (round_number == config_.half_length) {
            for (auto& team : teams) {
                team.money = config_.start_money;
                team.equip = config_.start_equip;
                team.loss_streak = 0;
            }
        }
        ++round_number;
        return econ;
    }

    Dollars spend_for(BuyType buy, Side side) const {
        const TeamState& team = teams[side == Side::CT ? ct_index() : 1 - ct_index()];
        return representative_spend(buy, team.equip, team.money, thresholds_);
    }

private:
    const SimConfig& config_;
    const GameMeta& meta_;
    Rng& rng_;
    BuyThresholds thresholds_;
    double side_bias_;
};

}  // namespace

SimulatedGame simulate_game(const SimConfig& config, const GameSetup& setup, Rng& rng) {
    config.validate();
    GameMeta meta;
    meta.game_id = &setup.game_id;
    meta.map_name = &setup.map_name;
    meta.team_names[0] = &setup.starting_ct;
    meta.team_names[1] = &setup.starting_t;
    meta.date = setup.date;

    GameEngine engine(config, meta, rng);
    const SpendingPolicy* policies[2] = {&setup.starting_ct_policy, &setup.starting_t_policy};
    for (int i = 0; i < 2; ++i) {
        engine.teams[i].money = config.start_money;
        engine.teams[i].equip = config.start_equip;
        engine.teams[i].policy = policies[i];
    }

    SimulatedGame game;
    std::optional<GameOutcome> outcome;
    while (!(outcome = engine.outcome_for_current_ct())) {
        RoundRecord rec;
        rec.state = engine.snapshot();
        const auto buys = engine.choose_buys();
        rec.state.ct_buy = buys[0];
        rec.state.t_buy = buys[1];
        rec.state.ct_spend = engine.spend_for(buys[0], Side::CT);
        rec.state.t_spend = engine.spend_for(buys[1], Side::T);
        const auto econ = engine.play(rec.state.ct_spend, rec.state.t_spend);
        rec.round_winner = econ.winner;
        game.rounds.push_back(std::move(rec));
        game.economy.push_back(econ);
    }

    if (engine.teams[0].score >= config.rounds_to_win) {
        game.winner = setup.starting_ct;
    } else if (engine.teams[1].score >= config.rounds_to_win) {
        game.winner = setup.starting_t;
    } else {
        game.winner = std::string(kDrawMarker);
    }
    for (auto& rec : game.rounds) rec.game_winner = game.winner;
    return game;
}

SimulatedGame simulate_game(const SimConfig& config) {
    GameSetup setup;
    setup.map_name = config.map_name;
    setup.starting_ct_policy = config.policy_ct;
    setup.starting_t_policy = config.policy_t;
    Rng rng(config.rng_seed);
    return simulate_game(config, setup, rng);
}

GameOutcome rollout(const RoundState& state, const SimConfig& config, Dollars ct_spend, Dollars t_spend,
                    const RolloutContext& context, Rng& rng) {
    static const std::string kCurrentCt = "current_ct";
    static const std::string kCurrentT = "current_t";
    GameMeta meta;
    meta.game_id = &state.game_id;
    meta.map_name = &state.map_name;
    meta.date = state.match_date;

    GameEngine engine(config, meta, rng);
    engine.round_number = state.round_number;
    // Team 0 starts on CT; map the state's sides onto the starting teams.
    const int ct = engine.ct_index();
    TeamState& c = engine.teams[ct];
    TeamState& t = engine.teams[1 - ct];
    meta.team_names[ct] = state.ct_team.empty() ? &kCurrentCt : &state.ct_team;
    meta.team_names[1 - ct] = state.t_team.empty() ? &kCurrentT : &state.t_team;
    c = {state.ct_score, state.ct_money, state.ct_equip_start, context.ct_loss_streak, &config.policy_ct};
    t = {state.t_score, state.t_money, state.t_equip_start, context.t_loss_streak, &config.policy_t};

    const bool ct_is_team0 = ct == 0;
    auto relative = [&](GameOutcome for_current_ct) {
        // Outcomes are reported against the sides of `state`.
        const bool flipped = engine.ct_index() == 0 ? !ct_is_team0 : ct_is_team0;
        return flipped ? flip(for_current_ct) : for_current_ct;
    };

    if (auto done = engine.outcome_for_current_ct()) return relative(*done);
    engine.play(ct_spend, t_spend);
    while (true) {
        if (auto done = engine.outcome_for_current_ct()) return relative(*done);
        const auto buys = engine.choose_buys();
        const Dollars cs = engine.spend_for(buys[0], Side::CT);
        const Dollars ts = engine.spend_for(buys[1], Side::T);
        engine.play(cs, ts);
    }
}

namespace {

std::uint64_t state_stream_seed(const RoundState& s, std::uint64_t seed) {
    Fnv1a h;
    h.update(s.map_name);
    for (std::int64_t v : {std::int64_t{s.round_number}, std::int64_t{s.ct_score}, std::int64_t{s.t_score},
                           s.ct_equip_start, s.t_equip_start, s.ct_money, s.t_money}) {
        h.update_value(v);
    }
    return mix_seed(seed, h.digest());
}

}  // namespace

OutcomeDistribution oracle_win_prob(const RoundState& state, const SimConfig& config, int n_rollouts,
                                    const RolloutContext& context) {
    if (n_rollouts < 1) throw std::invalid_argument("oracle_win_prob: n_rollouts must be >= 1");
    const auto thresholds = config.economy.thresholds();
    const Dollars ct_spend = representative_spend(state.ct_buy, state.ct_equip_start, state.ct_money, thresholds);
    const Dollars t_spend = representative_spend(state.t_buy, state.t_equip_start, state.t_money, thresholds);
    const std::uint64_t seed = state_stream_seed(state, config.rng_seed);

    long counts[kNumOutcomes] = {0, 0, 0};
    for (int i = 0; i < n_rollouts; ++i) {
        Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(i));
        ++counts[index_of(rollout(state, config, ct_spend, t_spend, context, rng))];
    }
    const double n = n_rollouts;
    OutcomeDistribution d;
    d.p_ct_win = static_cast<double>(counts[0]) / n;
    d.p_t_win = static_cast<double>(counts[1]) / n;
    d.p_draw = static_cast<double>(counts[2]) / n;
    return d;
}

std::vector<TeamProfile> CorpusConfig::default_teams(int count) {
    const SpendingPolicy cycle[] = {SpendingPolicy::always_max(), SpendingPolicy::threshold_full_buy(),
                                    SpendingPolicy::random_feasible()};
    std::vector<TeamProfile> teams;
    for (int i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "team%02d", i + 1);
        teams.push_back({name, cycle[i % 3]});
    }
    return teams;
}

std::vector<SimulatedGame> generate_games(const CorpusConfig& config, int jobs) {
    if (config.n_games < 1) throw std::invalid_argument("generate_games: n_games must be >= 1");
    if (config.teams.size() < 2) throw std::invalid_argument("generate_games: need at least two teams");
    if (config.maps.empty()) throw std::invalid_argument("generate_games: empty map list");
    const auto first = std::chrono::sys_days(config.first_date);
    const auto last = std::chrono::sys_days(config.last_date);
    if (last < first) throw std::invalid_argument("generate_games: last_date before first_date");
    config.sim.validate();
    const auto span_days = static_cast<std::uint64_t>((last - first).count()) + 1;

    std::vector<SimulatedGame> games(static_cast<std::size_t>(config.n_games));
    parallel_for(games.size(), jobs, [&](std::size_t g) {
        Rng rng = Rng::derive(config.sim.rng_seed, g);
        const auto n_teams = config.teams.size();
        const auto a = static_cast<std::size_t>(rng.below(n_teams));
        auto b = static_cast<std::size_t>(rng.below(n_teams - 1));
        if (b >= a) ++b;
        GameSetup setup;
        char id[32];
        std::snprintf(id, sizeof id, "sim-%06zu", g);
        setup.game_id = id;
        setup.starting_ct = config.teams[a].name;
        setup.starting_t = config.teams[b].name;
        setup.starting_ct_policy = config.teams[a].policy;
        setup.starting_t_policy = config.teams[b].policy;
        setup.map_name = config.maps[rng.below(config.maps.size())];
        setup.date = std::chrono::year_month_day(first + std::chrono::days(static_cast<int>(rng.below(span_days))));
        games[g] = simulate_game(config.sim, setup, rng);
    });
    return games;
}

std::vector<RoundRecord> generate_corpus(const CorpusConfig& config, int jobs) {
    std::vector<RoundRecord> records;
    for (auto& game : generate_games(config, jobs)) {
        records.insert(records.end(), std::make_move_iterator(game.rounds.begin()),
                       std::make_move_iterator(game.rounds.end()));
    }
    return records;
}

void write_corpus(const std::filesystem::path& path, const CorpusConfig& config, RecordFormat format, int jobs) {
    const auto records = generate_corpus(config, jobs);
    std::ofstream out(path);
    if (!out) throw DataError("cannot write corpus to '" + path.string() + "'");
    write_rounds(out, records, format);
    if (!out) throw DataError("error while writing '" + path.string() + "'");
}

}  // namespace econoscope
