#pragma once

#include "econoscope/features.hpp"

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace econoscope {

/// Class probabilities in GameOutcome order (CT win, T win, draw).
using Probabilities = std::array<double, kNumOutcomes>;

inline constexpr double kProbabilityClip = 1e-15;

/// -log p[label] with p clipped to [1e-15, 1 - 1e-15].
inline double clipped_log_loss(const Probabilities& p, std::size_t label) noexcept {
    const double q = std::min(std::max(p[label], kProbabilityClip), 1.0 - kProbabilityClip);
    return -std::log(q);
}

/// Numerically stable softmax of three logits.
inline Probabilities softmax(const std::array<double, kNumOutcomes>& logits) noexcept {
    const double m = std::max({logits[0], logits[1], logits[2]});
    Probabilities p;
    double sum = 0.0;
    for (std::size_t k = 0; k < kNumOutcomes; ++k) {
        p[k] = std::exp(logits[k] - m);
        sum += p[k];
    }
    for (auto& v : p) v /= sum;
    return p;
}

inline OutcomeDistribution to_distribution(const Probabilities& p) noexcept {
    return {p[0], p[1], p[2]};
}

/// Per-column affine map to zero mean and unit variance. Constant columns
/// are centered only.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer identity(std::size_t n);
    static Standardizer fit(const Dataset& data, std::span<const std::size_t> columns);

    std::size_t size() const noexcept { return mean.size(); }
    double apply(std::size_t j, double value) const noexcept { return (value - mean[j]) / scale[j]; }
};

/// Mean clipped log-loss of `predict` over a dataset.
template <typename Model>
double dataset_log_loss(const Model& model, const Dataset& data) {
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) sum += clipped_log_loss(model.predict(data.row(i)), data.y[i]);
    return data.empty() ? 0.0 : sum / static_cast<double>(data.size());
}

/// Per-epoch or per-round losses recorded during training.
struct FitHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    /// Index into val_loss of the returned parameters.
    int best_iteration = 0;
};

}  // namespace econoscope
