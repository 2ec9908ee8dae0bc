#pragma once

#include "econoscope/domain.hpp"
#include "econoscope/economy.hpp"
#include "econoscope/predictor.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace econoscope {

struct BuyOption {
    BuyType buy = BuyType::Eco;
    /// Game-win probability of the evaluated side under this buy.
    double win_probability = 0.0;
};

/// All feasible buys for one side of one round, scored by a model.
struct BuyEvaluation {
    std::string game_id;
    int round_number = 0;
    std::string team;
    Side side = Side::CT;
    int team_score = 0;
    int opponent_score = 0;
    BuyType actual_buy = BuyType::Eco;
    /// Feasible buys in table order.
    std::vector<BuyOption> options;
    BuyType optimal_buy = BuyType::Eco;
    /// Win probability under the actual buy.
    double w_actual = 0.0;
    /// Win probability under the optimal buy; max over options.
    double o_optimal = 0.0;

    std::optional<double> option(BuyType buy) const noexcept;
};

/// Scores every feasible buy for `side` by replacing only that side's buy
/// type (money, equipment, scores and the opponent's actual buy unchanged).
/// Ties go to the buy with the lower representative spend.
/// Throws std::invalid_argument if the actual buy is not feasible.
BuyEvaluation evaluate_buy_options(const Predictor& model, const RoundState& state, Side side,
                                   const BuyThresholds& thresholds = {});

/// The optimal-minus-actual win probability (>= 0).
double lost_probability(const BuyEvaluation& evaluation) noexcept;

/// Evaluates both sides of every round.
std::vector<BuyEvaluation> evaluate_rounds(const Predictor& model, std::span<const LabeledRound> rounds,
                                           std::span<const Side> sides = kAllSides, int jobs = 1,
                                           const BuyThresholds& thresholds = {});

/// Rows are the optimal buy, columns the actual buy.
struct ConfusionMatrix {
    Side side = Side::CT;
    std::array<std::array<long, kNumBuyTypes>, kNumBuyTypes> counts{};

    long at(BuyType optimal, BuyType actual) const noexcept {
        return counts[index_of(optimal)][index_of(actual)];
    }
    long total() const noexcept;
    std::string to_text() const;
};

ConfusionMatrix confusion_matrix(const Predictor& model, std::span<const LabeledRound> rounds, Side side,
                                 int jobs = 1);
ConfusionMatrix confusion_matrix(std::span<const BuyEvaluation> evaluations, Side side);

/// Actual vs model-optimal buy distribution for second rounds where the side
/// lost the pistol round.
struct SecondRoundReport {
    struct Row {
        Side side = Side::CT;
        long rounds = 0;
        std::array<long, kNumBuyTypes> actual{};
        std::array<long, kNumBuyTypes> optimal{};

        double actual_rate(BuyType buy) const noexcept;
        double optimal_rate(BuyType buy) const noexcept;
    };
    std::array<Row, 2> rows{};  // indexed by Side

    std::string to_text() const;
};

SecondRoundReport second_round_report(const Predictor& model, std::span<const LabeledRound> rounds);
/// Uses the evaluations of second rounds whose side is down 0-1.
SecondRoundReport second_round_report(std::span<const BuyEvaluation> evaluations);

/// Lost win probability on rounds where the side played Eco, aggregated over
/// the two plausible denominators.
struct EcoLossSummary {
    Side side = Side::CT;
    long eco_rounds = 0;
    /// Eco rounds whose optimal buy was LowBuy or HalfBuy.
    long affected_rounds = 0;
    double affected_share = 0.0;
    double mean_loss_affected = 0.0;
    double mean_loss_all_eco = 0.0;
};

EcoLossSummary eco_loss_summary(std::span<const BuyEvaluation> evaluations, Side side);

}  // namespace econoscope
