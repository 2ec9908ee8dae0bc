#pragma once

#include "econoscope/counterfactual.hpp"
#include "econoscope/domain.hpp"
#include "econoscope/predictor.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace econoscope {

/// Optimal Spending Error of one team: the mean of (W - O)^2 over its rounds,
/// W being its win probability under the actual buy and O under the optimal
/// buy.
struct TeamOseReport {
    std::string team;
    double average_ose = 0.0;
    /// Means over the rounds played on each side (0 without such rounds).
    double ct_ose = 0.0;
    double t_ose = 0.0;
    long rounds_played = 0;
    long ct_rounds = 0;
    long t_rounds = 0;
    long rounds_won = 0;
    double round_win_rate = 0.0;
};

/// OSE of every team in `rounds`, sorted by team id. Each round contributes
/// one evaluation per side.
std::vector<TeamOseReport> ose_by_team(const Predictor& model, std::span<const LabeledRound> rounds, int jobs = 1);
/// Same, from precomputed evaluations parallel to (round, side) pairs as
/// produced by evaluate_rounds with both sides.
std::vector<TeamOseReport> ose_by_team(std::span<const BuyEvaluation> evaluations,
                                       std::span<const LabeledRound> rounds);

/// Throws DataError when `team` plays no round.
TeamOseReport team_ose(const Predictor& model, std::span<const LabeledRound> rounds, const std::string& team,
                       int jobs = 1);

/// Teams with at least `min_rounds` rounds, ascending by average OSE, ties
/// by team id.
std::vector<TeamOseReport> rank_teams(std::vector<TeamOseReport> reports, long min_rounds = 300);
std::vector<TeamOseReport> rank_teams(const Predictor& model, std::span<const LabeledRound> rounds,
                                      long min_rounds = 300, int jobs = 1);

/// Pearson correlation of average OSE and round win rate. Throws DataError
/// with fewer than three teams or when either variable is constant.
double ose_winrate_correlation(std::span<const TeamOseReport> reports);

/// team,average_ose,ct_ose,t_ose,rounds_played,round_win_rate
std::string ose_scatter_csv(std::span<const TeamOseReport> reports);

struct OseRanking {
    std::vector<TeamOseReport> teams;
    long min_rounds = 300;
    std::optional<double> correlation;
    std::string generated_at;
    std::vector<std::string> notes;

    nlohmann::ordered_json to_json() const;
    std::string to_text() const;
};

}  // namespace econoscope
