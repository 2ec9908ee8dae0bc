#pragma once

#include "econoscope/models/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace econoscope {

/// Tuning grids. Defaults are the published ranges and step sizes.
struct HyperparamSpace {
    std::vector<double> gbtree_learning_rate{0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
    std::vector<int> gbtree_max_depth{3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<int> gbtree_min_child_weight{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<double> gbtree_colsample_per_level{0.3, 0.4, 0.5, 0.6, 0.7, 0.8};

    std::vector<int> neural_hidden1{16, 32, 48, 64, 80, 96, 112, 128};
    std::vector<int> neural_hidden2{16, 32, 48, 64, 80, 96, 112, 128};
    std::vector<double> neural_dropout{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    std::vector<double> neural_learning_rate{1e-3, 1e-4, 1e-5};

    /// Number of grid points (1 for the untuned logistic family).
    std::size_t size(ModelFamily family) const;
    /// Grid point `index` in mixed-radix order, as a JSON object of
    /// hyperparameter names to values.
    nlohmann::json point(ModelFamily family, std::size_t index) const;
};

/// `n_trials` grid indices drawn uniformly, without replacement until the
/// grid is exhausted.
std::vector<std::size_t> sample_grid(std::size_t grid_size, int n_trials, std::uint64_t seed);

/// Applies a grid point to the family's parameters in `base`.
TrainOptions with_point(TrainOptions base, const nlohmann::json& point);

struct SearchOptions {
    /// Family, mode and the non-tuned parameters (seed, batch size, ...).
    TrainOptions base{};
    std::uint64_t seed = 0;
    /// Per-trial training budget; the early-stopping rule still applies.
    int trial_max_rounds = 1000;
    int trial_max_epochs = 500;
    int jobs = 1;
};

struct Trial {
    int index = 0;
    std::size_t grid_index = 0;
    nlohmann::json params;
    double val_loss = 0.0;
    nlohmann::json stopping_iteration;
};

struct SearchResult {
    std::vector<Trial> trials;
    /// Index into trials of the lowest validation loss (earliest on ties).
    std::size_t best = 0;

    const Trial& best_trial() const { return trials.at(best); }
    nlohmann::json to_json() const;
};

/// Trains one model per sampled point on `train` and scores it by
/// validation log-loss. In per-map mode each point is shared by all maps.
SearchResult random_search(const HyperparamSpace& space, int n_trials, std::span<const LabeledRound> train,
                           std::span<const LabeledRound> val, const SearchOptions& options);

}  // namespace econoscope
