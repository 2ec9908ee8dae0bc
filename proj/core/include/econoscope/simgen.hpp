#pragma once

#include "econoscope/domain.hpp"
#include "econoscope/economy.hpp"
#include "econoscope/ingest.hpp"
#include "econoscope/predictor.hpp"
#include "econoscope/random.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace econoscope {

enum class PolicyKind { AlwaysMax, ThresholdFullBuy, RandomFeasible, ModelOptimal };

/// How a simulated team picks its buy each round. The chosen buy is always
/// feasible and the spend is its representative_spend.
class SpendingPolicy {
public:
    /// Most expensive feasible buy.
    static SpendingPolicy always_max();
    /// Full buy when affordable, otherwise the cheapest buy.
    static SpendingPolicy threshold_full_buy();
    /// Uniform over the feasible buys.
    static SpendingPolicy random_feasible();
    /// Buy maximizing `model`'s game-win probability given the opponent's buy.
    static SpendingPolicy model_optimal(std::shared_ptr<const Predictor> model);

    /// "always-max", "threshold-full-buy" or "random-feasible".
    static std::optional<SpendingPolicy> parse(std::string_view name);

    PolicyKind kind() const noexcept { return kind_; }
    const Predictor* model() const noexcept { return model_.get(); }
    std::string_view name() const noexcept;

private:
    explicit SpendingPolicy(PolicyKind kind, std::shared_ptr<const Predictor> model = nullptr)
        : kind_(kind), model_(std::move(model)) {}

    PolicyKind kind_;
    std::shared_ptr<const Predictor> model_;
};

/// Parameters of the synthetic round/economy dynamics.
struct SimConfig {
    EconomyConfig economy{};
    /// Slope of the CT round-win logit on the post-buy team equipment gap, per dollar.
    double equip_advantage_coeff = 1.5e-4;
    /// CT round-win logit offset at equal equipment, per map.
    std::map<std::string, double> map_side_bias = default_side_bias();
    int rounds_to_win = 16;
    int half_length = 15;
    SpendingPolicy policy_ct = SpendingPolicy::always_max();
    SpendingPolicy policy_t = SpendingPolicy::always_max();
    std::uint64_t rng_seed = 0;

    /// Share of post-buy equipment value kept into the next round.
    double winner_carryover = 0.7;
    double loser_carryover = 0.2;
    /// Team totals at the start of each half.
    Dollars start_money = 4000;
    Dollars start_equip = 1000;
    /// Fraction of T round wins that come from a bomb detonation.
    double detonation_share = 0.3;
    /// Map played by simulate_game(config).
    std::string map_name = "inferno";

    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;
    double side_bias(std::string_view map) const noexcept;
    int max_rounds() const noexcept { return 2 * half_length; }

    static std::map<std::string, double> default_side_bias();
};

/// Money bookkeeping of one simulated round (team totals).
struct RoundEconomy {
    Side winner = Side::CT;
    bool detonation = false;
    /// Reward paid at the end of the round (win reward or loss bonus) x players.
    Dollars ct_reward = 0;
    Dollars t_reward = 0;
    /// Consecutive losses after this round (0 for the winner).
    int ct_loss_streak = 0;
    int t_loss_streak = 0;
};

struct SimulatedGame {
    std::vector<RoundRecord> rounds;
    /// Parallel to `rounds`.
    std::vector<RoundEconomy> economy;
    /// Winning team id or kDrawMarker.
    std::string winner;
};

struct GameSetup {
    std::string game_id = "sim-0";
    std::string starting_ct = "team_a";
    std::string starting_t = "team_b";
    std::string map_name = "inferno";
    Date date = std::chrono::year{2020} / std::chrono::June / 1;
    SpendingPolicy starting_ct_policy = SpendingPolicy::always_max();
    SpendingPolicy starting_t_policy = SpendingPolicy::always_max();
};

/// One game with config.policy_ct / policy_t for the teams starting on CT / T.
/// Seeded by config.rng_seed.
SimulatedGame simulate_game(const SimConfig& config);
SimulatedGame simulate_game(const SimConfig& config, const GameSetup& setup, Rng& rng);

/// Hidden economy state that a RoundState does not carry.
struct RolloutContext {
    int ct_loss_streak = 0;
    int t_loss_streak = 0;
};

/// Plays the game out from `state` once. The first round uses the given
/// spends; later rounds use config.policy_ct for the team currently on CT and
/// config.policy_t for the other. Returns the outcome relative to the sides
/// of `state`.
GameOutcome rollout(const RoundState& state, const SimConfig& config, Dollars ct_spend, Dollars t_spend,
                    const RolloutContext& context, Rng& rng);

/// Monte Carlo estimate of the game outcome from `state`, with each buy
/// realized at its representative spend. Rollout streams depend on the seed
/// and on the state apart from its buys, so buy alternatives of one state
/// share random numbers.
OutcomeDistribution oracle_win_prob(const RoundState& state, const SimConfig& config, int n_rollouts,
                                    const RolloutContext& context = {});

/// oracle_win_prob as a Predictor.
class MonteCarloOracle final : public Predictor {
public:
    MonteCarloOracle(SimConfig config, int n_rollouts) : config_(std::move(config)), n_rollouts_(n_rollouts) {}

    OutcomeDistribution predict(const RoundState& state) const override {
        return oracle_win_prob(state, config_, n_rollouts_);
    }
    int n_rollouts() const noexcept { return n_rollouts_; }
    const SimConfig& config() const noexcept { return config_; }

private:
    SimConfig config_;
    int n_rollouts_;
};

struct TeamProfile {
    std::string name;
    SpendingPolicy policy = SpendingPolicy::always_max();
};

struct CorpusConfig {
    SimConfig sim{};
    int n_games = 100;
    std::vector<TeamProfile> teams = default_teams(16);
    std::vector<std::string> maps{kDefaultMapPool.begin(), kDefaultMapPool.end()};
    Date first_date = std::chrono::year{2020} / std::chrono::April / 1;
    Date last_date = std::chrono::year{2021} / std::chrono::April / 20;

    /// `count` teams cycling through always-max, threshold-full-buy and
    /// random-feasible.
    static std::vector<TeamProfile> default_teams(int count);
};

/// Games are independent: game i draws from stream i of sim.rng_seed, picks
/// two distinct teams, a map and a date uniformly.
std::vector<SimulatedGame> generate_games(const CorpusConfig& config, int jobs = 1);
std::vector<RoundRecord> generate_corpus(const CorpusConfig& config, int jobs = 1);
/// Writes generate_corpus output in the round-record schema.
void write_corpus(const std::filesystem::path& path, const CorpusConfig& config, RecordFormat format,
                  int jobs = 1);

}  // namespace econoscope
