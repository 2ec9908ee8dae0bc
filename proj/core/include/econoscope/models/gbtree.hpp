#pragma once

#include "econoscope/models/common.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>

namespace econoscope {

struct GbtreeParams {
    double learning_rate = 0.3;
    int max_depth = 6;
    double min_child_weight = 1.0;
    /// Fraction of features offered to the split search at each tree level.
    double colsample_per_level = 1.0;
    double lambda = 1.0;
    int max_rounds = 1000;
    /// Stop after this many rounds without validation improvement; 0 runs
    /// all max_rounds.
    int early_stopping_rounds = 10;
    std::uint64_t seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
    static GbtreeParams from_json(const nlohmann::json& j);
};

/// Softmax gradient boosting: one regression tree per class per round.
class BoostedTrees {
public:
    struct Node {
        /// -1 for a leaf.
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };
    using Tree = std::vector<Node>;

    /// Trains on `train`, early-stopping on `val` when given, and keeps the
    /// rounds up to the best validation loss.
    static BoostedTrees fit(const Dataset& train, const Dataset* val, const GbtreeParams& params,
                            FitHistory* history = nullptr);

    Probabilities predict(std::span<const double> row) const;

    std::size_t n_features() const noexcept { return n_features_; }
    /// Boosting rounds kept (each holds one tree per class).
    int rounds() const noexcept { return static_cast<int>(trees_.size() / kNumOutcomes); }
    const std::vector<Tree>& trees() const noexcept { return trees_; }
    const GbtreeParams& params() const noexcept { return params_; }

    nlohmann::json to_json() const;
    static BoostedTrees from_json(const nlohmann::json& j);

private:
    std::size_t n_features_ = 0;
    GbtreeParams params_;
    std::vector<Tree> trees_;  // round-major, class-minor
};

}  // namespace econoscope
