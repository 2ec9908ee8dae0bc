#pragma once

#include "econoscope/models/common.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string_view>

namespace econoscope {

/// Which feature columns the logistic model sees.
enum class FeatureSubset : std::uint8_t { ScoresOnly = 0, Full = 1 };

std::string_view to_string(FeatureSubset subset) noexcept;
std::optional<FeatureSubset> parse_feature_subset(std::string_view text) noexcept;

struct LogisticOptions {
    FeatureSubset subset = FeatureSubset::ScoresOnly;
    /// Penalty 0.5 * l2 * |W|^2 on the weights; the intercepts are free.
    double l2 = 1e-4;
    double gradient_tolerance = 1e-6;
    int max_iterations = 10000;
};

/// Multinomial logistic regression on standardized columns.
class LogisticClassifier {
public:
    LogisticClassifier() = default;
    /// Zero weights and an identity standardizer over `subset` of a
    /// `n_features`-wide layout.
    LogisticClassifier(std::size_t n_features, FeatureSubset subset, double l2 = 1e-4);

    /// Full-batch gradient descent with backtracking line search. Throws
    /// TrainingError when fewer than two classes are present.
    static LogisticClassifier fit(const Dataset& train, const LogisticOptions& options = {});

    Probabilities predict(std::span<const double> row) const;

    /// Training objective (mean cross-entropy plus penalty) at the current
    /// parameters; writes the gradient when `gradient` is non-null.
    double objective(const Dataset& data, std::vector<double>* gradient = nullptr) const;

    /// Weights (class-major) followed by the three intercepts.
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> params);

    FeatureSubset subset() const noexcept { return subset_; }
    const std::vector<std::size_t>& columns() const noexcept { return columns_; }
    std::size_t n_features() const noexcept { return n_features_; }
    int iterations() const noexcept { return iterations_; }
    bool converged() const noexcept { return converged_; }

    nlohmann::json to_json() const;
    static LogisticClassifier from_json(const nlohmann::json& j);

private:
    std::size_t n_features_ = 0;
    FeatureSubset subset_ = FeatureSubset::ScoresOnly;
    double l2_ = 1e-4;
    std::vector<std::size_t> columns_;
    Standardizer standardizer_;
    std::vector<double> weights_;  // kNumOutcomes x columns_.size()
    std::array<double, kNumOutcomes> bias_{};
    int iterations_ = 0;
    bool converged_ = false;
};

}  // namespace econoscope
