#pragma once

#include "econoscope/domain.hpp"
#include "econoscope/ingest.hpp"
#include "econoscope/models/model.hpp"
#include "econoscope/predictor.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace econoscope {

/// Mean cross-entropy over the three outcomes, probabilities clipped to
/// [1e-15, 1 - 1e-15]. Throws std::invalid_argument on length mismatch or
/// empty input.
double log_loss(std::span<const OutcomeDistribution> predictions, std::span<const GameOutcome> labels);

/// log_loss of `model` over `rounds`.
double model_log_loss(const Predictor& model, std::span<const LabeledRound> rounds, int jobs = 1);

/// Test-set losses by map and model family.
struct EvalReport {
    struct Row {
        std::string label;
        long n_rounds = 0;
        std::map<ModelFamily, double> loss;
    };

    std::vector<ModelFamily> families;
    std::vector<Row> maps;
    /// Round-weighted mean of the map rows, per family.
    Row weighted_average;
    /// Losses of the map-feature models over the whole test set.
    std::optional<Row> ohe_map;
    std::map<ModelFamily, std::string> per_map_model_ids;
    std::map<ModelFamily, std::string> ohe_model_ids;
    std::string data_hash;
    std::string generated_at;
    std::vector<std::string> notes;

    nlohmann::ordered_json to_json() const;
    std::string to_text() const;
};

/// Scores every model on split.test. Per-map and map-agnostic models fill the
/// per-map rows; map-feature models fill the OHE row. Throws DataError on an
/// empty test partition and UnknownMapError when a per-map model lacks a
/// test map.
EvalReport evaluate_suite(std::span<const TrainedModel* const> models, const DatasetSplit& split, int jobs = 1,
                          std::string generated_at = {});

/// Round win rate by buy type and side.
struct BuyWinRateReport {
    struct Cell {
        long rounds = 0;
        long wins = 0;
        std::optional<double> rate() const noexcept {
            if (rounds == 0) return std::nullopt;
            return static_cast<double>(wins) / static_cast<double>(rounds);
        }
    };
    /// Indexed [side][buy].
    std::array<std::array<Cell, kNumBuyTypes>, 2> cells{};

    const Cell& at(Side side, BuyType buy) const noexcept {
        return cells[static_cast<std::size_t>(side)][index_of(buy)];
    }
    nlohmann::ordered_json to_json() const;
    std::string to_text() const;
};

BuyWinRateReport buy_winrate_report(std::span<const LabeledRound> rounds);

struct TransferOptions {
    /// Fixed architecture of the map-agnostic network.
    NeuralParams base = default_base();
    double finetune_learning_rate = 1e-5;
    /// Held-out maps to study; empty means every map in the corpus.
    std::vector<std::string> maps;
    /// Test loss of earlier per-map networks, shown for comparison.
    std::map<std::string, double> previous_best;
    int jobs = 1;

    static NeuralParams default_base();
};

struct TransferReport {
    struct Row {
        std::string map;
        long n_test = 0;
        std::optional<double> previous_best;
        double initial = 0.0;
        double fine_tuned = 0.0;
        int initial_epoch = 0;
        int fine_tune_epoch = 0;
    };
    std::vector<Row> rows;
    std::vector<std::string> warnings;
    std::string generated_at;

    nlohmann::ordered_json to_json() const;
    std::string to_text() const;
};

/// Leave-one-map-out study: for each map, a map-agnostic network trained on
/// the other maps is scored on the map's test rounds, then fine-tuned on the
/// map's train rounds (its validation rounds drive early stopping) and scored
/// again. Maps with an empty partition are skipped with a warning.
TransferReport transfer_study(const DatasetSplit& split, const TransferOptions& options = {},
                              std::string generated_at = {});

/// CSV of outcome probabilities over a grid of scores with every other field
/// taken from `base`; stops at game-deciding scores.
std::string score_grid_csv(const Predictor& model, const RoundState& base, int rounds_to_win = 16);

/// CSV of per-round outcome probabilities and buy evaluations for the rounds
/// of one game, in round order.
std::string trace_csv(const Predictor& model, std::span<const LabeledRound> game_rounds);

}  // namespace econoscope
